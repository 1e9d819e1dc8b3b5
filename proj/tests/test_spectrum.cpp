#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_support.hpp"

using namespace vibrofc;
using namespace testing_support;

namespace {

const char* kMinimal = R"({
  "dimension": 1,
  "initial_frequencies": [1.0],
  "final_frequencies": [1.0],
  "dushinsky": [[1.0]],
  "displacement": [0.0],
  "initial_quanta": [0],
  "max_final_quanta": 2
})";

std::string shift_spec(double gamma) {
  return R"({"dimension": 1, "initial_frequencies": [1.0], "final_frequencies": [1.0],
             "dushinsky": [[1.0]], "displacement": [)" +
         std::to_string(gamma) + R"(], "initial_quanta": [0]})";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VIBRO_FC_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "vibrofc_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(ParseSpec, MinimalIdentity) {
  const MoleculeSpec s = parse_spec(kMinimal);
  EXPECT_EQ(s.dimension, 1);
  EXPECT_EQ(s.dushinsky, RMatrix::Identity(1, 1));
  EXPECT_EQ(s.displacement(0), 0.0);
  EXPECT_EQ(s.max_final_quanta, 2);
  EXPECT_EQ(s.initial_quanta, MultiIndex({0}));
}

TEST(ParseSpec, TwoModeRoundTrip) {
  const std::string text = slurp(std::filesystem::path(SPECS_DIR) / "duschinsky_2d.json");
  const MoleculeSpec s = parse_spec(text);
  EXPECT_LE((s.dushinsky - rotation(0.3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((s.displacement - vec({0.4, -0.2})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ParseSpec, SingularDushinskyNamesField) {
  std::string text = kMinimal;
  text.replace(text.find("[[1.0]]"), 7, "[[0.0]]");
  try {
    parse_spec(text);
    FAIL() << "expected InvariantError";
  } catch (const InvariantError& e) {
    EXPECT_EQ(e.field(), "dushinsky");
  }
}

TEST(ParseSpec, SyntaxErrorCarriesLocation) {
  try {
    parse_spec("{\n  \"dimension\": 1,\n  \"initial_frequencies\": [1.0,, 2]\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_GT(e.column(), 20);
  }
}

TEST(ParseSpec, InvariantViolations) {
  auto field_of = [](const std::string& text) {
    try {
      parse_spec(text);
    } catch (const InvariantError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  std::string neg = kMinimal;
  neg.replace(neg.find("\"final_frequencies\": [1.0]"), 26, "\"final_frequencies\": [-1.0]");
  EXPECT_EQ(field_of(neg), "final_frequencies");
  std::string len = kMinimal;
  len.replace(len.find("[0.0]"), 5, "[0.0, 1.0]");
  EXPECT_EQ(field_of(len), "displacement");
  std::string extra = kMinimal;
  extra.replace(extra.find("\"dimension\""), 0, "\"dimensoin\": 3, ");
  EXPECT_EQ(field_of(extra), "dimensoin");
  std::string missing = kMinimal;
  missing.replace(missing.find("\"initial_quanta\": [0],"), 22, "");
  EXPECT_EQ(field_of(missing), "initial_quanta");
}

TEST(Enumerate, Counts) {
  EXPECT_EQ(enumerate_final_states(1, 3).size(), 4u);
  EXPECT_EQ(enumerate_final_states(2, 2).size(), 6u);
  EXPECT_EQ(enumerate_final_states(3, 4).size(), 35u);
}

TEST(ComputeSpectrum, ShiftLinesAndCrossEngines) {
  const MoleculeSpec s = parse_spec(shift_spec(1.0));
  SpectrumOptions opt;
  opt.max_final_quanta = 10;
  const Spectrum shift = compute_spectrum(s, Method::shift, opt);
  ASSERT_EQ(shift.lines.size(), 11u);
  EXPECT_NEAR(shift.lines[0].probability, std::exp(-0.5), 1e-15);
  EXPECT_EQ(shift.lines[3].energy_offset, 3.0);
  const Spectrum general = compute_spectrum(s, Method::general, opt);
  const Spectrum quad = compute_spectrum(s, Method::quadrature, opt);
  for (std::size_t i = 0; i < shift.lines.size(); ++i) {
    EXPECT_NEAR(general.lines[i].probability, shift.lines[i].probability, 1e-10);
    EXPECT_NEAR(quad.lines[i].probability, shift.lines[i].probability, 1e-8);
  }
  EXPECT_NEAR(shift.report.deficit, 1.0 - shift.report.total_probability, 0.0);
  EXPECT_LT(shift.report.deficit, 1e-9);
}

TEST(ComputeSpectrum, ApplicabilityGates) {
  const MoleculeSpec shift = parse_spec(shift_spec(1.0));
  SpectrumOptions opt;
  opt.max_final_quanta = 1;
  EXPECT_THROW(compute_spectrum(shift, Method::freq, opt), MethodMismatchError);
  const MoleculeSpec two = parse_spec(slurp(std::filesystem::path(SPECS_DIR) / "duschinsky_2d.json"));
  EXPECT_THROW(compute_spectrum(two, Method::shift, opt), MethodMismatchError);
  EXPECT_THROW(compute_spectrum(two, Method::tomographic, opt), MethodMismatchError);
  EXPECT_NO_THROW(compute_spectrum(two, Method::quadrature, opt));
}

TEST(ComputeSpectrum, EnergyOffsetsFromExcitedInitialState) {
  MoleculeSpec s = parse_spec(slurp(std::filesystem::path(SPECS_DIR) / "duschinsky_2d.json"));
  s.initial_quanta = MultiIndex({1, 0});
  SpectrumOptions opt;
  opt.max_final_quanta = 1;
  const Spectrum sp = compute_spectrum(s, Method::general, opt);
  EXPECT_NEAR(sp.lines[0].energy_offset, -1.0, 1e-15);
  EXPECT_NEAR(sp.lines[1].energy_offset, 1.2 - 1.0, 1e-15);
  EXPECT_NEAR(sp.lines[2].energy_offset, 1.4 - 1.0, 1e-15);
}

TEST(ComputeSpectrum, ThreadsDoNotChangeResults) {
  const MoleculeSpec s = parse_spec(slurp(std::filesystem::path(SPECS_DIR) / "duschinsky_2d.json"));
  SpectrumOptions one, many;
  one.max_final_quanta = many.max_final_quanta = 6;
  many.threads = 5;
  const Spectrum a = compute_spectrum(s, Method::general, one), b = compute_spectrum(s, Method::general, many);
  ASSERT_EQ(a.lines.size(), b.lines.size());
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    EXPECT_EQ(a.lines[i].final_index, b.lines[i].final_index);
    EXPECT_EQ(a.lines[i].probability, b.lines[i].probability);
  }
}

TEST(WriteSpectrum, EmptyAndSingleLineCsv) {
  std::ostringstream empty;
  write_spectrum({}, OutputFormat::csv, empty);
  EXPECT_EQ(empty.str(), "initial_index;final_index;energy_offset;probability;method\n");
  std::ostringstream one;
  write_spectrum({{MultiIndex({0, 1}), MultiIndex({2, 0}), 1.5, 0.25, Method::general}}, OutputFormat::csv, one);
  EXPECT_EQ(one.str(),
            "initial_index;final_index;energy_offset;probability;method\n\"0 1\";\"2 0\";1.5;0.25;general\n");
}

TEST(WriteSpectrum, RoundTripBothFormats) {
  const MoleculeSpec s = parse_spec(slurp(std::filesystem::path(SPECS_DIR) / "duschinsky_2d.json"));
  SpectrumOptions opt;
  opt.max_final_quanta = 3;
  const Spectrum sp = compute_spectrum(s, Method::general, opt);
  for (OutputFormat f : {OutputFormat::csv, OutputFormat::json}) {
    std::stringstream ss;
    write_spectrum(sp.lines, f, ss, &sp.report);
    const auto back = f == OutputFormat::csv ? read_spectrum_csv(ss) : read_spectrum_json(ss);
    ASSERT_EQ(back.size(), sp.lines.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_EQ(back[i].initial_index, sp.lines[i].initial_index);
      EXPECT_EQ(back[i].final_index, sp.lines[i].final_index);
      EXPECT_EQ(back[i].energy_offset, sp.lines[i].energy_offset);
      EXPECT_EQ(back[i].probability, sp.lines[i].probability);
      EXPECT_EQ(back[i].method, sp.lines[i].method);
    }
  }
}

TEST(WriteSpectrum, StableDescendingSort) {
  std::vector<SpectrumLine> lines;
  for (int i = 0; i < 100; ++i)
    lines.push_back({MultiIndex({0}), MultiIndex({i}), double(i), (i % 7) / 10.0, Method::shift});
  sort_by_probability(lines);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_GE(lines[i - 1].probability, lines[i].probability);
    if (lines[i - 1].probability == lines[i].probability) {
      EXPECT_LT(lines[i - 1].final_index[0], lines[i].final_index[0]);
    }
  }
}

TEST(Cli, ExitStatuses) {
  const std::string specs = SPECS_DIR;
  const auto out = (scratch_dir() / "out.csv").string();
  EXPECT_EQ(run_cli("--input " + specs + "/shift_1d.json --method shift --max-quanta 5 --output " + out), 0);
  EXPECT_EQ(slurp(out).substr(0, 59), "initial_index;final_index;energy_offset;probability;method\n");
  EXPECT_EQ(run_cli("--input " + specs + "/shift_1d.json --method freq --max-quanta 5 --output " + out), 3);
  EXPECT_EQ(run_cli("--input " + specs + "/shift_1d.json --method shift --max-quanta 2 --tolerance 1e-6 --output " + out), 4);
  EXPECT_EQ(run_cli("--input " + specs + "/shift_1d.json --method shift --max-quanta 30 --tolerance 1e-6 --output " + out), 0);
  EXPECT_EQ(run_cli("--input " + write_temp("broken.json", "{ \"dimension\": ").string() +
                    " --method general --max-quanta 1 --output " + out),
            2);
  EXPECT_EQ(run_cli("--input " + write_temp("singular.json", std::string(kMinimal).replace(std::string(kMinimal).find("[[1.0]]"), 7, "[[0.0]]")).string() +
                    " --method general --max-quanta 1 --output " + out),
            2);
  EXPECT_EQ(run_cli("--input " + specs + "/shift_1d.json --method bogus --max-quanta 1"), 2);
  EXPECT_EQ(run_cli("--method general --max-quanta 1"), 2);
  EXPECT_EQ(run_cli("--input " + specs + "/shift_1d.json --method tomographic --max-quanta 1 --epsilon 4 --output " + out), 5);
}

TEST(Cli, JsonOutputCarriesReport) {
  const auto out = scratch_dir() / "out.json";
  ASSERT_EQ(run_cli(std::string("--input ") + SPECS_DIR + "/freq_1d.json --method freq --max-quanta 4 --format json --output " +
                    out.string()),
            0);
  std::ifstream in(out);
  const auto doc = nlohmann::json::parse(in);
  EXPECT_EQ(doc.at("lines").size(), 5u);
  EXPECT_TRUE(doc.at("report").contains("deficit"));
}
