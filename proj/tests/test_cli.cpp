#include "cohstat/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <doctest.h>
#include <json.hpp>

#include "cohstat/table.hpp"

using namespace cohstat;
using namespace cohstat::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("cohstat_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string run_to_file(std::vector<std::string> args, const std::string& name) {
  const fs::path path = scratch_dir() / name;
  args.push_back("--output");
  args.push_back(path.string());
  REQUIRE(run(parse_args(args)) == 0);
  return read_file(path);
}

struct BinaryResult {
  int exit_code;
  std::string out;
  std::string err;
};

BinaryResult run_binary(const std::string& args, const std::string& tag) {
  const char* binary = std::getenv("COHSTAT_CLI");
  REQUIRE_MESSAGE(binary != nullptr,
                  "COHSTAT_CLI must point at the cohstat executable");
  const fs::path out = scratch_dir() / (tag + ".out");
  const fs::path err = scratch_dir() / (tag + ".err");
  const std::string cmd = "\"" + std::string(binary) + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return BinaryResult{WEXITSTATUS(rc), read_file(out), read_file(err)};
}

} // namespace

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0 / 3.0) == "0.66666666666666663");
  // Text produced this way parses back to the identical bits.
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, 5e22}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("table rendering and parsing") {
  Table table({"a", "b"});
  table.push_row({std::int64_t(1), 0.5});
  table.push_row({std::string("x"), 2.0});
  CHECK(table.to_csv() == "a,b\n1,0.5\nx,2\n");

  const Table parsed = Table::from_csv(table.to_csv());
  REQUIRE(parsed.columns == std::vector<std::string>{"a", "b"});
  REQUIRE(parsed.rows.size() == 2);
  CHECK(std::get<std::string>(parsed.rows[0][0]) == "1");
  CHECK(std::get<std::string>(parsed.rows[1][1]) == "2");

  CHECK_THROWS_AS(table.push_row({std::int64_t(1)}), std::invalid_argument);
  Table bad({"a"});
  bad.push_row({std::string("has,comma")});
  CHECK_THROWS_AS(bad.to_csv(), std::logic_error);
}

TEST_CASE("parse_args builds the expected config") {
  const auto config = parse_args(
      {"be-curve", "--beta", "1", "--alpha1", "0.1", "--e-max", "5", "--steps", "50"});
  CHECK(config.command == Command::kBeCurve);
  CHECK(config.params.at("beta") == "1");
  CHECK(config.params.at("alpha1") == "0.1");
  CHECK(config.params.at("e-max") == "5");
  CHECK(config.params.at("steps") == "50");
  CHECK(config.output_format == OutputFormat::kCsv);
  CHECK(!config.output_path);
  CHECK(!config.seed);

  const auto omega_config = parse_args({"omega", "--levels", "2,2", "--n", "2"});
  CHECK(omega_config.command == Command::kOmega);
  CHECK(omega_config.params.at("levels") == "2,2");
  CHECK(omega_config.params.at("n") == "2");

  const auto with_globals = parse_args(
      {"count", "--g", "2", "--n", "2", "--format", "json", "--seed", "42"});
  CHECK(with_globals.output_format == OutputFormat::kJson);
  REQUIRE(with_globals.seed.has_value());
  CHECK(*with_globals.seed == 42);
}

TEST_CASE("parse_args rejects malformed invocations") {
  CHECK_THROWS_AS(parse_args({}), UsageError);
  CHECK_THROWS_AS(parse_args({"frobnicate"}), UsageError);
  CHECK_THROWS_AS(parse_args({"count", "--g", "2"}), UsageError);
  CHECK_THROWS_AS(parse_args({"count", "--g", "2", "--n", "2", "--bogus", "1"}),
                  UsageError);
  CHECK_THROWS_AS(parse_args({"count", "--g", "2", "--n", "2", "--format", "xml"}),
                  UsageError);
}

TEST_CASE("every subcommand's help text states its governing formula") {
  const std::vector<std::pair<std::string, std::string>> expectations = {
      {"count", "2^g - 1"},
      {"omega", "(G_j+N_j-1)!"},
      {"enumerate", "2^g - 1"},
      {"be-curve", "1/(exp(eps*) - 1)"},
      {"boltzmann-curve", "exp(-beta E - alpha_1 (beta E)^2"},
      {"maxent", "exp(-sum_n beta_n E_j^n)"},
      {"q-compare", "(1-q)^(n-1)/n"},
  };
  for (const auto& [name, formula] : expectations) {
    try {
      parse_args({name, "--help"});
      FAIL("expected HelpRequested for ", name);
    } catch (const HelpRequested& help) {
      CHECK_MESSAGE(help.text.find(formula) != std::string::npos,
                    name, " help should mention ", formula);
    }
  }
  // Top-level help lists the subcommands.
  try {
    parse_args({"--help"});
    FAIL("expected HelpRequested");
  } catch (const HelpRequested& help) {
    CHECK(help.text.find("q-compare") != std::string::npos);
  }
}

TEST_CASE("worked command: count") {
  CHECK(run_to_file({"count", "--g", "2", "--n", "2"}, "count.csv") ==
        "g,n,G,w\n2,2,3,6\n");
  // A count that overflows 64-bit integers comes out as an exact decimal.
  const std::string big = run_to_file({"count", "--g", "64", "--n", "3"}, "big.csv");
  CHECK(big.find("18446744073709551615") != std::string::npos);
}

TEST_CASE("worked command: omega") {
  CHECK(run_to_file({"omega", "--levels", "2,2", "--n", "2"}, "omega.csv") ==
        "levels,n,omega\n2;2,2,21\n");
}

TEST_CASE("worked command: enumerate") {
  const std::string csv = run_to_file({"enumerate", "--g", "2", "--n", "2"},
                                      "enumerate.csv");
  const Table parsed = Table::from_csv(csv);
  CHECK(parsed.columns ==
        std::vector<std::string>{"index", "n(1)", "n(2)", "n(12)"});
  REQUIRE(parsed.rows.size() == 6);
  CHECK(std::get<std::string>(parsed.rows[0][1]) == "2");
}

TEST_CASE("worked command: maxent") {
  const std::string csv = run_to_file(
      {"maxent", "--grid", "0,1", "--moments", "0.333333333"}, "maxent.csv");
  const Table parsed = Table::from_csv(csv);
  CHECK(parsed.columns ==
        std::vector<std::string>{"beta_1", "residual", "iterations"});
  REQUIRE(parsed.rows.size() == 1);
  const double beta = std::strtod(
      std::get<std::string>(parsed.rows[0][0]).c_str(), nullptr);
  CHECK(std::abs(beta - std::log(2.0)) <= 1e-7);
}

TEST_CASE("worked command: q-compare at q = 1") {
  const std::string csv = run_to_file(
      {"q-compare", "--q", "1", "--beta-e-max", "2", "--order", "10"}, "qc.csv");
  const Table parsed = Table::from_csv(csv);
  REQUIRE(parsed.rows.size() == 50);
  for (const auto& row : parsed.rows) {
    const double residual =
        std::strtod(std::get<std::string>(row[3]).c_str(), nullptr);
    CHECK(residual <= 1e-15);
  }
}

TEST_CASE("emitted CSV floats round-trip through text") {
  const std::string csv = run_to_file(
      {"be-curve", "--beta", "1", "--alpha1", "0.1", "--e-max", "5"}, "rt.csv");
  const Table parsed = Table::from_csv(csv);
  CHECK(parsed.columns ==
        std::vector<std::string>{"beta_E", "occupation_equilibrium",
                                 "occupation_modified"});
  REQUIRE(parsed.rows.size() == 50);
  for (const auto& row : parsed.rows) {
    for (const auto& cell : row) {
      const std::string& text = std::get<std::string>(cell);
      CHECK(format_double(std::strtod(text.c_str(), nullptr)) == text);
    }
  }
}

TEST_CASE("JSON output carries meta, columns, and rows") {
  const fs::path path = scratch_dir() / "omega.json";
  auto config = parse_args({"omega", "--levels", "2,2", "--n", "2", "--format",
                            "json", "--seed", "7", "--output", path.string()});
  REQUIRE(run(config) == 0);

  const auto doc = nlohmann::json::parse(read_file(path));
  CHECK(doc["meta"]["command"] == "omega");
  CHECK(doc["meta"]["params"]["levels"] == "2,2");
  CHECK(doc["meta"]["seed"] == 7);
  CHECK(doc["columns"] == nlohmann::json({"levels", "n", "omega"}));
  REQUIRE(doc["rows"].size() == 1);
  CHECK(doc["rows"][0][2] == "21");
}

TEST_CASE("relative output paths resolve under COHSTAT_OUT_DIR") {
  const fs::path dir = scratch_dir() / "outdir";
  fs::create_directories(dir);
  REQUIRE(::setenv("COHSTAT_OUT_DIR", dir.c_str(), 1) == 0);
  auto config = parse_args(
      {"count", "--g", "2", "--n", "2", "--output", "relative.csv"});
  const int rc = run(config);
  REQUIRE(::unsetenv("COHSTAT_OUT_DIR") == 0);
  REQUIRE(rc == 0);
  CHECK(read_file(dir / "relative.csv") == "g,n,G,w\n2,2,3,6\n");
}

TEST_CASE("parameter validation happens before execution") {
  CHECK_THROWS_AS(run(parse_args({"count", "--g", "0", "--n", "2"})), UsageError);
  CHECK_THROWS_AS(run(parse_args({"count", "--g", "2", "--n", "-1"})), UsageError);
  CHECK_THROWS_AS(run(parse_args({"omega", "--levels", "2,xyz", "--n", "2"})),
                  UsageError);
  CHECK_THROWS_AS(run(parse_args({"enumerate", "--g", "5", "--n", "50"})),
                  UsageError);
  CHECK_THROWS_AS(
      run(parse_args({"be-curve", "--beta", "0", "--e-max", "5"})), UsageError);
  CHECK_THROWS_AS(run(parse_args({"be-curve", "--beta", "1", "--alpha1", "0.1",
                                  "--alphas", "0.1,0.2", "--e-max", "5"})),
                  UsageError);
  CHECK_THROWS_AS(run(parse_args({"q-compare", "--q", "3", "--beta-e-max", "1"})),
                  UsageError);
  CHECK_THROWS_AS(run(parse_args({"maxent", "--grid", "0,1", "--moments",
                                  "0.3,0.3,0.3"})),
                  UsageError);
}

TEST_CASE("binary: deterministic byte-identical output") {
  const std::string args = "omega --levels 2,2 --n 2";
  const auto first = run_binary(args, "det1");
  const auto second = run_binary(args, "det2");
  REQUIRE(first.exit_code == 0);
  REQUIRE(second.exit_code == 0);
  CHECK(first.out == second.out);
  CHECK(first.out == "levels,n,omega\n2;2,2,21\n");
}

TEST_CASE("binary: exit codes and machine-readable error records") {
  const auto usage = run_binary("count --g 0 --n 2", "err_usage");
  CHECK(usage.exit_code == 2);
  CHECK(usage.out.empty());
  const auto usage_doc = nlohmann::json::parse(usage.err);
  CHECK(usage_doc["error"]["exit"] == 2);
  CHECK(usage_doc["error"]["type"] == "usage");

  const auto domain = run_binary("maxent --grid 0,1 --moments 1.5", "err_domain");
  CHECK(domain.exit_code == 3);
  const auto domain_doc = nlohmann::json::parse(domain.err);
  CHECK(domain_doc["error"]["exit"] == 3);
  CHECK(domain_doc["error"]["type"] == "domain");

  const auto io = run_binary(
      "count --g 2 --n 2 --output /nonexistent_dir_xq1/out.csv", "err_io");
  CHECK(io.exit_code == 4);
  const auto io_doc = nlohmann::json::parse(io.err);
  CHECK(io_doc["error"]["exit"] == 4);
  CHECK(io_doc["error"]["type"] == "io");

  const auto help = run_binary("count --help", "help_ok");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("2^g - 1") != std::string::npos);
}
