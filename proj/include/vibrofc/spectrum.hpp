#pragma once

// Stick spectra: molecule specification, engine dispatch, sum rule, CSV/JSON output.
//
// Energies are in units of hbar * omega with hbar = 1; the initial state sits on the initial
// surface, final states on the final surface with q' = Lambda q + gamma. Mode counting
// (3N'-6, or 3N'-5 for linear molecules) is up to whoever writes the spec.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vibrofc/closed_form.hpp"
#include "vibrofc/errors.hpp"
#include "vibrofc/linalg.hpp"
#include "vibrofc/log.hpp"
#include "vibrofc/multi_index.hpp"
#include "vibrofc/oracle.hpp"
#include "vibrofc/quadratic_state.hpp"
#include "vibrofc/tomography.hpp"

namespace vibrofc {

struct MoleculeSpec {
  int dimension = 0;
  RVector initial_frequencies;
  RVector final_frequencies;
  RMatrix dushinsky;
  RVector displacement;
  MultiIndex initial_quanta;
  int max_final_quanta = 0;

  DushinskyTransform transform() const { return DushinskyTransform(dushinsky, displacement); }
  QuadraticState initial_state() const { return mode_eigenstate(initial_frequencies, initial_quanta); }
  QuadraticState final_state(const MultiIndex& m) const { return mode_eigenstate(final_frequencies, m); }
};

namespace detail {

inline std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline const nlohmann::json& field(const nlohmann::json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end()) throw InvariantError(name, "missing field");
  return *it;
}

inline double number(const nlohmann::json& v, const std::string& name) {
  if (!v.is_number()) throw InvariantError(name, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InvariantError(name, "must be finite");
  return x;
}

inline int nonnegative_integer(const nlohmann::json& v, const std::string& name) {
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 1'000'000)
    throw InvariantError(name, "expected a nonnegative integer");
  return static_cast<int>(v.get<long long>());
}

inline RVector vector_field(const nlohmann::json& doc, const char* name, int n) {
  const nlohmann::json& v = field(doc, name);
  if (!v.is_array()) throw InvariantError(name, "expected an array");
  if (static_cast<int>(v.size()) != n)
    throw InvariantError(name, "length " + std::to_string(v.size()) + " does not match dimension " +
                                   std::to_string(n));
  RVector out(n);
  for (int i = 0; i < n; ++i)
    out(i) = number(v[i], std::string(name) + "[" + std::to_string(i) + "]");
  return out;
}

}  // namespace detail

/// Reads a JSON spec. Syntax errors carry line/column; invariant violations name the field.
///
///   { "dimension": 2,
///     "initial_frequencies": [1.0, 1.5], "final_frequencies": [1.2, 1.4],
///     "dushinsky": [[0.955, -0.296], [0.296, 0.955]], "displacement": [0.4, -0.2],
///     "initial_quanta": [0, 0], "max_final_quanta": 3 }
///
/// max_final_quanta may be omitted (0); the CLI always supplies its own cutoff.
inline MoleculeSpec parse_spec(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = detail::line_column(text, byte);
    throw ParseError("spec: " + std::string(e.what()), line, col);
  }
  if (!doc.is_object()) throw ParseError("spec: top level must be a JSON object", 1, 1);

  static const char* const known[] = {"dimension",  "initial_frequencies", "final_frequencies",
                                      "dushinsky",  "displacement",        "initial_quanta",
                                      "max_final_quanta"};
  for (const auto& item : doc.items())
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return item.key() == k; }) == std::end(known))
      throw InvariantError(item.key(), "unknown field");

  MoleculeSpec spec;
  spec.dimension = detail::nonnegative_integer(detail::field(doc, "dimension"), "dimension");
  const int n = spec.dimension;
  if (n < 1) throw InvariantError("dimension", "must be at least 1");

  spec.initial_frequencies = detail::vector_field(doc, "initial_frequencies", n);
  spec.final_frequencies = detail::vector_field(doc, "final_frequencies", n);
  for (int k = 0; k < n; ++k) {
    if (!(spec.initial_frequencies(k) > 0.0))
      throw InvariantError("initial_frequencies", "entry " + std::to_string(k) + " must be positive");
    if (!(spec.final_frequencies(k) > 0.0))
      throw InvariantError("final_frequencies", "entry " + std::to_string(k) + " must be positive");
  }

  const nlohmann::json& lam = detail::field(doc, "dushinsky");
  if (!lam.is_array() || static_cast<int>(lam.size()) != n)
    throw InvariantError("dushinsky", "expected " + std::to_string(n) + " rows");
  spec.dushinsky.resize(n, n);
  for (int i = 0; i < n; ++i) {
    if (!lam[i].is_array() || static_cast<int>(lam[i].size()) != n)
      throw InvariantError("dushinsky", "row " + std::to_string(i) + " must have " +
                                            std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j)
      spec.dushinsky(i, j) =
          detail::number(lam[i][j], "dushinsky[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  }
  if (!(std::abs(spec.dushinsky.determinant()) > kSingularTolerance))
    throw InvariantError("dushinsky", "matrix is singular (det = 0)");

  spec.displacement = detail::vector_field(doc, "displacement", n);

  const nlohmann::json& iq = detail::field(doc, "initial_quanta");
  if (!iq.is_array() || static_cast<int>(iq.size()) != n)
    throw InvariantError("initial_quanta", "expected " + std::to_string(n) + " entries");
  std::vector<int> quanta(n);
  for (int k = 0; k < n; ++k) quanta[k] = detail::nonnegative_integer(iq[k], "initial_quanta");
  spec.initial_quanta = MultiIndex(quanta);

  if (doc.contains("max_final_quanta"))
    spec.max_final_quanta = detail::nonnegative_integer(doc["max_final_quanta"], "max_final_quanta");
  return spec;
}

/// All final multi-indices with total quanta <= cutoff, graded lexicographic order.
inline std::vector<MultiIndex> enumerate_final_states(int n_modes, int cutoff) {
  return enumerate_multi_indices(n_modes, cutoff);
}

enum class Method { general, shift, freq, quadrature, tomographic };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::general: return "general";
    case Method::shift: return "shift";
    case Method::freq: return "freq";
    case Method::quadrature: return "quadrature";
    case Method::tomographic: return "tomographic";
  }
  return "general";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::general, Method::shift, Method::freq, Method::quadrature, Method::tomographic})
    if (s == to_string(m)) return m;
  throw DomainError("unknown method '" + std::string(s) + "'");
}

/// Throws MethodMismatchError naming the applicability rule the spec violates.
inline void check_applicable(const MoleculeSpec& spec, Method method) {
  const int n = spec.dimension;
  constexpr double tol = 1e-12;
  switch (method) {
    case Method::general:
      return;
    case Method::shift:
      if ((spec.dushinsky - RMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > tol)
        throw MethodMismatchError("method shift requires dushinsky = identity");
      if ((spec.initial_frequencies - spec.final_frequencies).cwiseAbs().maxCoeff() >
          tol * spec.initial_frequencies.cwiseAbs().maxCoeff())
        throw MethodMismatchError("method shift requires final_frequencies = initial_frequencies");
      return;
    case Method::freq:
      if (spec.displacement.cwiseAbs().maxCoeff() > 0.0)
        throw MethodMismatchError("method freq requires displacement = 0");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && spec.dushinsky(i, j) != 0.0)
            throw MethodMismatchError("method freq requires a diagonal dushinsky matrix");
      return;
    case Method::quadrature:
      if (n > kMaxQuadratureDim) throw MethodMismatchError("method quadrature requires dimension <= 3");
      return;
    case Method::tomographic:
      if (n != 1) throw MethodMismatchError("method tomographic requires dimension = 1");
      return;
  }
}

struct SpectrumLine {
  MultiIndex initial_index;
  MultiIndex final_index;
  double energy_offset = 0.0;
  double probability = 0.0;
  Method method = Method::general;
};

struct SumRuleReport {
  int cutoff = 0;
  std::size_t lines = 0;
  double total_probability = 0.0;
  double deficit = 0.0;
  long clamped = 0;
};

struct SpectrumOptions {
  int max_final_quanta = 0;
  int threads = 1;
  double regulator_eps = 0.25;  ///< tomographic method only
};

struct Spectrum {
  std::vector<SpectrumLine> lines;
  SumRuleReport report;
};

namespace detail {

/// One engine instance per worker (the general engine keeps a per-worker Hermite memo).
class LineEngine {
 public:
  LineEngine(const MoleculeSpec& spec, Method method, const SpectrumOptions& opt)
      : spec_(spec), method_(method), opt_(opt), initial_(spec.initial_state()),
        transform_(spec.transform()) {
    if (method == Method::general) {
      system_.emplace(build_fc_block_system(
          initial_, apply_dushinsky(spec.final_state(spec.initial_quanta), transform_)));
      table_.emplace(system_->make_table());
    }
  }

  double operator()(const MultiIndex& m) {
    const MultiIndex& n = spec_.initial_quanta;
    switch (method_) {
      case Method::general:
        return system_->probability(n, m, *table_);
      case Method::shift: {
        double p = 1.0;
        for (int k = 0; k < spec_.dimension; ++k)
          p *= fc_shift_1d(n[k], m[k], std::sqrt(spec_.initial_frequencies(k)) * spec_.displacement(k));
        return p;
      }
      case Method::freq: {
        double p = 1.0;
        for (int k = 0; k < spec_.dimension; ++k) {
          const double lam = spec_.dushinsky(k, k);
          p *= fc_freq_1d(n[k], m[k], spec_.initial_frequencies(k), spec_.final_frequencies(k) * lam * lam);
        }
        return p;
      }
      case Method::quadrature: {
        QuadratureSpec q;
        q.nodes_per_axis = (n.total() + m.total()) / 2 + 12;
        return overlap_quadrature(initial_, spec_.final_state(m), transform_, q);
      }
      case Method::tomographic: {
        TomographicOptions t;
        t.regulator_eps = opt_.regulator_eps;
        const double p =
            tomographic_overlap(initial_, apply_dushinsky(spec_.final_state(m), transform_), t).extrapolated;
        return std::clamp(p, 0.0, 1.0);
      }
    }
    return 0.0;
  }

 private:
  const MoleculeSpec& spec_;
  Method method_;
  SpectrumOptions opt_;
  QuadraticState initial_;
  DushinskyTransform transform_;
  std::optional<FcBlockSystem> system_;
  std::optional<HermiteTable> table_;
};

}  // namespace detail

/// One line per final index with total quanta <= opt.max_final_quanta, in graded lexicographic
/// order regardless of the worker count (worker w takes indices w, w + W, ...).
inline Spectrum compute_spectrum(const MoleculeSpec& spec, Method method, const SpectrumOptions& opt) {
  check_applicable(spec, method);
  if (opt.max_final_quanta < 0) throw DomainError("compute_spectrum: cutoff must be nonnegative");
  const std::vector<MultiIndex> finals = enumerate_final_states(spec.dimension, opt.max_final_quanta);
  std::vector<double> probs(finals.size(), 0.0);
  const long clamped_before = clamped_probability_count();

  const int workers = std::clamp(opt.threads, 1, std::max<int>(1, static_cast<int>(finals.size())));
  auto run = [&](int w) {
    detail::LineEngine engine(spec, method, opt);
    for (std::size_t i = w; i < finals.size(); i += workers) probs[i] = engine(finals[i]);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          run(w);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

  Spectrum out;
  double e0 = 0.0;
  for (int k = 0; k < spec.dimension; ++k) e0 += spec.initial_quanta[k] * spec.initial_frequencies(k);
  double total = 0.0;
  for (std::size_t i = 0; i < finals.size(); ++i) {
    double e = -e0;
    for (int k = 0; k < spec.dimension; ++k) e += finals[i][k] * spec.final_frequencies(k);
    out.lines.push_back({spec.initial_quanta, finals[i], e, probs[i], method});
    total += probs[i];
  }
  out.report = {opt.max_final_quanta, finals.size(), total, 1.0 - total,
                clamped_probability_count() - clamped_before};
  return out;
}

/// Stable sort by descending probability (ties keep enumeration order).
inline void sort_by_probability(std::vector<SpectrumLine>& lines) {
  std::stable_sort(lines.begin(), lines.end(), [](const SpectrumLine& a, const SpectrumLine& b) {
    return a.probability > b.probability;
  });
}

inline std::string format_report(const SumRuleReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "sum rule: cutoff %d, %zu lines, total %.17g, deficit %.3e, clamped %ld",
                r.cutoff, r.lines, r.total_probability, r.deficit, r.clamped);
  return buf;
}

enum class OutputFormat { csv, json };

inline constexpr const char* kCsvHeader = "initial_index;final_index;energy_offset;probability;method";

namespace detail {
inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace detail

inline void write_spectrum_csv(const std::vector<SpectrumLine>& lines, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& l : lines)
    out << '"' << l.initial_index.to_string() << "\";\"" << l.final_index.to_string() << "\";"
        << detail::g17(l.energy_offset) << ';' << detail::g17(l.probability) << ';'
        << to_string(l.method) << '\n';
}

inline nlohmann::json report_json(const SumRuleReport& r) {
  return {{"cutoff", r.cutoff},
          {"lines", r.lines},
          {"total_probability", r.total_probability},
          {"deficit", r.deficit},
          {"clamped", r.clamped}};
}

inline void write_spectrum_json(const std::vector<SpectrumLine>& lines, std::ostream& out,
                                const SumRuleReport* report = nullptr) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : lines)
    arr.push_back({{"initial_index", l.initial_index.entries()},
                   {"final_index", l.final_index.entries()},
                   {"energy_offset", l.energy_offset},
                   {"probability", l.probability},
                   {"method", to_string(l.method)}});
  nlohmann::json doc = {{"lines", arr}};
  if (report) doc["report"] = report_json(*report);
  out << doc.dump(2) << '\n';
}

inline void write_spectrum(const std::vector<SpectrumLine>& lines, OutputFormat format, std::ostream& out,
                           const SumRuleReport* report = nullptr) {
  if (format == OutputFormat::csv) write_spectrum_csv(lines, out);
  else write_spectrum_json(lines, out, report);
  if (!out) throw std::runtime_error("write_spectrum: output stream failed");
}

namespace detail {
inline MultiIndex parse_index(const std::string& s) {
  std::istringstream in(s);
  std::vector<int> v;
  int x;
  while (in >> x) v.push_back(x);
  if (!in.eof() || v.empty()) throw ParseError("spectrum: bad multi-index \"" + s + "\"", 0, 0);
  return MultiIndex(v);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}
}  // namespace detail

inline std::vector<SpectrumLine> read_spectrum_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw ParseError("spectrum csv: missing header", 1, 1);
  std::vector<SpectrumLine> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ';')) cols.push_back(cell);
    if (cols.size() != 5) throw ParseError("spectrum csv: expected 5 columns", row, 1);
    try {
      out.push_back({detail::parse_index(detail::unquote(cols[0])),
                     detail::parse_index(detail::unquote(cols[1])), std::stod(cols[2]),
                     std::stod(cols[3]), parse_method(cols[4])});
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(std::string("spectrum csv: ") + e.what(), row, 1);
    }
  }
  return out;
}

inline std::vector<SpectrumLine> read_spectrum_json(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(std::string("spectrum json: ") + e.what(), line, col);
  }
  std::vector<SpectrumLine> out;
  for (const auto& l : doc.at("lines"))
    out.push_back({MultiIndex(l.at("initial_index").get<std::vector<int>>()),
                   MultiIndex(l.at("final_index").get<std::vector<int>>()),
                   l.at("energy_offset").get<double>(), l.at("probability").get<double>(),
                   parse_method(l.at("method").get<std::string>())});
  return out;
}

}  // namespace vibrofc
