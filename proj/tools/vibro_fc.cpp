// vibro-fc: Franck-Condon stick spectrum of a harmonic molecule model.
//
// Exit status: 0 success, 2 bad arguments / unreadable or invalid spec, 3 method not applicable,
// 4 sum-rule deficit above --tolerance, 5 numerical non-convergence, 1 other I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vibrofc/spectrum.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitInput = 2;
constexpr int kExitMethod = 3;
constexpr int kExitSumRule = 4;
constexpr int kExitAccuracy = 5;

int run(const std::string& input, vibrofc::Method method, int max_quanta, const std::string& output,
        vibrofc::OutputFormat format, double epsilon, std::optional<double> tolerance, int threads,
        bool sort) {
  using namespace vibrofc;
  std::ifstream in(input);
  if (!in) {
    std::cerr << "vibro-fc: cannot read " << input << '\n';
    return kExitInput;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  MoleculeSpec spec;
  try {
    spec = parse_spec(buf.str());
  } catch (const ParseError& e) {
    std::cerr << "vibro-fc: " << input << ':' << e.line() << ':' << e.column() << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const InvariantError& e) {
    std::cerr << "vibro-fc: " << input << ": invalid field " << e.what() << '\n';
    return kExitInput;
  }

  SpectrumOptions opt;
  opt.max_final_quanta = max_quanta;
  opt.threads = threads;
  opt.regulator_eps = epsilon;
  Spectrum result;
  try {
    result = compute_spectrum(spec, method, opt);
  } catch (const MethodMismatchError& e) {
    std::cerr << "vibro-fc: " << e.what() << '\n';
    return kExitMethod;
  } catch (const AccuracyError& e) {
    std::cerr << "vibro-fc: " << e.what() << " (estimate " << e.estimate() << ")\n";
    return kExitAccuracy;
  } catch (const DegenerateConfigurationError& e) {
    std::cerr << "vibro-fc: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    std::cerr << "vibro-fc: " << e.what() << '\n';
    return kExitInput;
  }

  if (sort) sort_by_probability(result.lines);
  std::cerr << format_report(result.report) << '\n';

  try {
    if (output.empty()) {
      write_spectrum(result.lines, format, std::cout, &result.report);
      std::cout.flush();
    } else {
      std::ofstream out(output, std::ios::binary);
      if (!out) {
        std::cerr << "vibro-fc: cannot open " << output << " for writing\n";
        return kExitIo;
      }
      write_spectrum(result.lines, format, out, &result.report);
    }
  } catch (const std::exception& e) {
    std::cerr << "vibro-fc: " << e.what() << '\n';
    return kExitIo;
  }

  if (tolerance && result.report.deficit > *tolerance) {
    std::fprintf(stderr, "vibro-fc: sum-rule deficit %.3e exceeds tolerance %.3e\n",
                 result.report.deficit, *tolerance);
    return kExitSumRule;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Franck-Condon stick spectra for harmonic molecule models"};
  std::string input, output, method_name, format_name = "csv";
  int max_quanta = 0, threads = 1;
  double epsilon = 0.25;
  std::optional<double> tolerance;
  bool sort = false;

  app.add_option("--input", input, "Molecule spec (JSON)")->required();
  app.add_option("--method", method_name, "FC engine")
      ->required()
      ->check(CLI::IsMember({"general", "shift", "freq", "quadrature", "tomographic"}));
  app.add_option("--max-quanta", max_quanta, "Cutoff on the total final quanta")
      ->required()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--output", output, "Output file (default: standard output)");
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--epsilon", epsilon, "Largest regulator of the tomographic eps sequence")
      ->check(CLI::PositiveNumber);
  app.add_option("--tolerance", tolerance, "Fail with status 4 when the sum-rule deficit exceeds this")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_flag("--sort-by-probability", sort, "Order lines by descending probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  return run(input, vibrofc::parse_method(method_name), max_quanta, output,
             format_name == "json" ? vibrofc::OutputFormat::json : vibrofc::OutputFormat::csv, epsilon,
             tolerance, threads, sort);
}
