#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "vibrofc/errors.hpp"

namespace vibrofc {

/// Per-mode vibrational quantum numbers. Entries are nonnegative.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t n) : entries_(n, 0) {}
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) { check(); }
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) { check(); }

  static MultiIndex unit(std::size_t n, std::size_t k) {
    MultiIndex e(n);
    e.entries_[k] = 1;
    return e;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  int operator[](std::size_t k) const { return entries_[k]; }
  int& operator[](std::size_t k) { return entries_[k]; }

  int total() const noexcept { return std::accumulate(entries_.begin(), entries_.end(), 0); }
  bool is_zero() const noexcept {
    return std::all_of(entries_.begin(), entries_.end(), [](int v) { return v == 0; });
  }

  const std::vector<int>& entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  /// Concatenation (n, m) used to index the 2N-dimensional Hermite polynomial.
  MultiIndex concat(const MultiIndex& other) const {
    std::vector<int> v = entries_;
    v.insert(v.end(), other.entries_.begin(), other.entries_.end());
    return MultiIndex(std::move(v));
  }

  /// Space-separated rendering, e.g. "1 0 2".
  std::string to_string() const {
    std::string s;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      if (k) s += ' ';
      s += std::to_string(entries_[k]);
    }
    return s;
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

 private:
  void check() const {
    for (int v : entries_)
      if (v < 0) throw DomainError("MultiIndex entries must be nonnegative");
  }

  std::vector<int> entries_;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& m) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int v : m) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h ^ m.size();
  }
};

/// Graded lexicographic comparison: by total quanta, then lexicographically descending in
/// the leading entry ([2,0] before [1,1] before [0,2]).
inline bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  if (a.total() != b.total()) return a.total() < b.total();
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

namespace detail {
inline void compositions(int n_modes, int remaining, std::vector<int>& cur,
                         std::vector<MultiIndex>& out) {
  const int k = static_cast<int>(cur.size());
  if (k == n_modes - 1) {
    cur.push_back(remaining);
    out.emplace_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur.push_back(v);
    compositions(n_modes, remaining - v, cur, out);
    cur.pop_back();
  }
}
}  // namespace detail

/// All multi-indices of length n_modes with total <= cutoff, in graded lexicographic order.
inline std::vector<MultiIndex> enumerate_multi_indices(int n_modes, int cutoff) {
  if (n_modes <= 0) throw DomainError("enumerate_multi_indices: n_modes must be positive");
  if (cutoff < 0) throw DomainError("enumerate_multi_indices: cutoff must be nonnegative");
  std::vector<MultiIndex> out;
  std::vector<int> cur;
  for (int s = 0; s <= cutoff; ++s) detail::compositions(n_modes, s, cur, out);
  return out;
}

}  // namespace vibrofc

template <>
struct std::hash<vibrofc::MultiIndex> : vibrofc::MultiIndexHash {};
