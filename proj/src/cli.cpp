#include "cohstat/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cohstat/counting.hpp"
#include "cohstat/distributions.hpp"
#include "cohstat/maxent.hpp"
#include "cohstat/table.hpp"
#include "cohstat/tsallis.hpp"

namespace cohstat::cli {

namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Typed access to the raw parameter map, with unknown-key rejection.

class Params {
 public:
  Params(const RunConfig& config, std::initializer_list<const char*> allowed)
      : params_(config.params) {
    for (const auto& [key, value] : params_) {
      (void)value;
      if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
            return key == k;
          }) == allowed.end())
        throw UsageError("unknown parameter '" + key + "' for this command");
    }
  }

  bool has(const std::string& key) const { return params_.count(key) != 0; }

  std::string require(const std::string& key) const {
    auto it = params_.find(key);
    if (it == params_.end()) throw UsageError("missing required --" + key);
    return it->second;
  }

  std::uint64_t get_u64(const std::string& key) const {
    return to_u64(key, require(key));
  }

  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
  }

  double get_double(const std::string& key) const {
    return to_double(key, require(key));
  }

  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> values;
    for (const auto& item : split(require(key)))
      values.push_back(to_double(key, item));
    return values;
  }

  std::vector<std::uint64_t> get_u64_list(const std::string& key) const {
    std::vector<std::uint64_t> values;
    for (const auto& item : split(require(key)))
      values.push_back(to_u64(key, item));
    return values;
  }

 private:
  static std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream stream(text);
    while (std::getline(stream, item, ',')) items.push_back(item);
    if (items.empty()) items.push_back(text);
    return items;
  }

  static std::uint64_t to_u64(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE ||
        text.find('-') != std::string::npos)
      throw UsageError("--" + key + ": expected a nonnegative integer, got '" +
                       text + "'");
    return value;
  }

  static double to_double(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !std::isfinite(value))
      throw UsageError("--" + key + ": expected a finite number, got '" + text +
                       "'");
    return value;
  }

  const std::map<std::string, std::string>& params_;
};

// ---------------------------------------------------------------------------
// Command implementations. Each builds a Table; validation failures are
// UsageError (exit 2), anything thrown past validation maps to exit 3.

ExponentSeries<double> series_from_params(const Params& p) {
  const double beta = p.get_double("beta");
  if (!(beta > 0)) throw UsageError("--beta must be > 0 (inverse temperature)");
  if (p.has("alpha1") && p.has("alphas"))
    throw UsageError("--alpha1 and --alphas are mutually exclusive");
  ArrayX<double> alphas;
  if (p.has("alphas")) {
    const auto values = p.get_double_list("alphas");
    alphas.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) alphas[i] = values[i];
  } else if (p.has("alpha1")) {
    alphas.resize(1);
    alphas[0] = p.get_double("alpha1");
  }
  return ExponentSeries<double>(beta, std::move(alphas));
}

struct CurveGrid {
  double e_max;
  std::uint64_t steps;
};

CurveGrid curve_grid_from_params(const Params& p) {
  const double e_max = p.get_double("e-max");
  if (!(e_max > 0)) throw UsageError("--e-max must be > 0");
  const std::uint64_t steps = p.get_u64_or("steps", 50);
  if (steps < 1 || steps > 1000000)
    throw UsageError("--steps must be between 1 and 1000000");
  return {e_max, steps};
}

Table run_count(const RunConfig& config) {
  const Params p(config, {"g", "n"});
  const std::uint64_t g = p.get_u64("g");
  const std::uint64_t n = p.get_u64("n");
  if (g < 1 || g > 64) throw UsageError("--g must be between 1 and 64");
  if (n > 100000) throw UsageError("--n must be <= 100000");
  const BigCount G = coherent_degeneracy(static_cast<unsigned>(g));
  const BigCount w = microstate_count(G, n);
  Table table({"g", "n", "G", "w"});
  table.push_row({static_cast<std::int64_t>(g), static_cast<std::int64_t>(n),
                  G.str(), w.str()});
  return table;
}

Table run_omega(const RunConfig& config) {
  const Params p(config, {"levels", "n"});
  const auto levels_u64 = p.get_u64_list("levels");
  const std::uint64_t n = p.get_u64("n");
  if (levels_u64.empty() || levels_u64.size() > 8)
    throw UsageError("--levels must list 1 to 8 levels");
  std::vector<unsigned> levels;
  std::string levels_label;
  for (std::uint64_t g : levels_u64) {
    if (g < 1 || g > 16)
      throw UsageError("--levels entries must be between 1 and 16");
    levels.push_back(static_cast<unsigned>(g));
    if (!levels_label.empty()) levels_label += ';';
    levels_label += std::to_string(g);
  }
  if (n > 64) throw UsageError("--n must be <= 64");
  if (binomial(n + levels.size() - 1, levels.size() - 1) > 5000000)
    throw UsageError("occupancy compositions exceed the enumeration budget");
  const BigCount omega = total_omega(levels, n);
  Table table({"levels", "n", "omega"});
  table.push_row(
      {levels_label, static_cast<std::int64_t>(n), omega.str()});
  return table;
}

std::string subset_label(const std::vector<unsigned>& subset, unsigned g) {
  std::string label = "n(";
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i && g > 9) label += '.';
    label += std::to_string(subset[i] + 1);
  }
  label += ')';
  return label;
}

Table run_enumerate(const RunConfig& config) {
  const Params p(config, {"g", "n"});
  const std::uint64_t g = p.get_u64("g");
  const std::uint64_t n = p.get_u64("n");
  if (g < 1 || g > 16) throw UsageError("--g must be between 1 and 16");
  const BigCount G = coherent_degeneracy(static_cast<unsigned>(g));
  if (microstate_count(G, n) * G > kMaxEnumerationCells)
    throw UsageError("enumeration exceeds the documented bound; shrink --g or --n");
  const auto subsets = coherent_subsets(static_cast<unsigned>(g));
  std::vector<std::string> columns{"index"};
  for (const auto& subset : subsets)
    columns.push_back(subset_label(subset, static_cast<unsigned>(g)));
  Table table(std::move(columns));
  const auto maps = enumerate_coherent_sequences(static_cast<unsigned>(g), n);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    std::vector<Cell> row{static_cast<std::int64_t>(i)};
    for (std::uint64_t count : maps[i])
      row.push_back(static_cast<std::int64_t>(count));
    table.push_row(std::move(row));
  }
  return table;
}

void warn_outside_perturbative_regime(const ExponentSeries<double>& series,
                                      double max_beta_e) {
  if (series.alphas.size() == 0) return;
  const double alpha1 = series.alphas[0];
  // d(eps*)/d(eps) at first order is 1 + 2 alpha_1 beta E; once it crosses
  // zero the series is no longer monotone in the energy.
  if (1.0 + 2.0 * alpha1 * max_beta_e <= 0.0)
    std::cerr << "warning: 1 + 2*alpha1*beta*E <= 0 inside the grid; "
                 "the first-order series is outside the perturbative regime\n";
}

Table run_be_curve(const RunConfig& config) {
  const Params p(config, {"beta", "alpha1", "alphas", "e-max", "steps"});
  const auto series = series_from_params(p);
  const auto grid = curve_grid_from_params(p);
  warn_outside_perturbative_regime(series, series.beta * grid.e_max);
  Table table({"beta_E", "occupation_equilibrium", "occupation_modified"});
  for (std::uint64_t i = 1; i <= grid.steps; ++i) {
    const double energy =
        grid.e_max * static_cast<double>(i) / static_cast<double>(grid.steps);
    const double eps = series.beta * energy;
    table.push_row({eps, modified_bose_einstein(eps),
                    modified_bose_einstein(epsilon_star(eps, series))});
  }
  return table;
}

Table run_boltzmann_curve(const RunConfig& config) {
  const Params p(config, {"beta", "alpha1", "alphas", "e-max", "steps"});
  const auto series = series_from_params(p);
  const auto grid = curve_grid_from_params(p);
  warn_outside_perturbative_regime(series, series.beta * grid.e_max);
  Table table({"beta_E", "weight_equilibrium", "weight_modified"});
  for (std::uint64_t i = 0; i < grid.steps; ++i) {
    const double energy =
        grid.steps == 1 ? 0.0
                        : grid.e_max * static_cast<double>(i) /
                              static_cast<double>(grid.steps - 1);
    const double eps = series.beta * energy;
    table.push_row({eps, std::exp(-eps),
                    modified_boltzmann_weight(energy, series)});
  }
  return table;
}

Table run_maxent(const RunConfig& config) {
  const Params p(config, {"grid", "moments", "tol", "max-iter"});
  const auto grid_values = p.get_double_list("grid");
  const auto targets = p.get_double_list("moments");
  if (targets.empty()) throw UsageError("--moments must list at least one target");
  if (grid_values.size() <= targets.size())
    throw UsageError("--grid must have more points than --moments entries");
  if (targets.size() > 6)
    throw UsageError("--moments supports at most 6 constraints");
  const double tol = p.get_double_or("tol", 1e-10);
  if (!(tol > 0)) throw UsageError("--tol must be > 0");
  const std::uint64_t max_iter = p.get_u64_or("max-iter", 200);
  if (max_iter < 1 || max_iter > 100000)
    throw UsageError("--max-iter must be between 1 and 100000");

  ArrayX<double> grid(grid_values.size());
  for (std::size_t i = 0; i < grid_values.size(); ++i) grid[i] = grid_values[i];
  ArrayX<double> target_array(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) target_array[i] = targets[i];

  const auto solution = solve_multipliers(
      MomentConstraints<double>(std::move(target_array), std::move(grid)), tol,
      static_cast<int>(max_iter));

  std::vector<std::string> columns;
  for (Eigen::Index n = 1; n <= solution.betas.size(); ++n)
    columns.push_back("beta_" + std::to_string(n));
  columns.emplace_back("residual");
  columns.emplace_back("iterations");
  Table table(std::move(columns));
  std::vector<Cell> row;
  for (Eigen::Index n = 0; n < solution.betas.size(); ++n)
    row.emplace_back(solution.betas[n]);
  row.emplace_back(solution.residual);
  row.emplace_back(static_cast<std::int64_t>(solution.iterations));
  table.push_row(std::move(row));
  return table;
}

// Clamped q-exponential for emitting plot tables: zero outside the support
// cutoff instead of the library's hard domain error.
double clamped_q_weight(double beta_e, const QParams<double>& params) {
  if (params.q != 1.0 && 1.0 - (1.0 - params.q) * beta_e <= 0.0) return 0.0;
  return q_exponential_weight(beta_e, params);
}

Table run_q_compare(const RunConfig& config) {
  const Params p(config, {"q", "beta-e-max", "order", "steps"});
  const double q = p.get_double("q");
  if (!(q > 0)) throw UsageError("--q must be > 0");
  const double beta_e_max = p.get_double("beta-e-max");
  if (!(beta_e_max > 0)) throw UsageError("--beta-e-max must be > 0");
  if (!(std::abs((1.0 - q) * beta_e_max) < 1.0))
    throw UsageError("--beta-e-max too large: requires |1-q| * beta-e-max < 1");
  const std::uint64_t order = p.get_u64_or("order", 40);
  if (order < 1 || order > 1000)
    throw UsageError("--order must be between 1 and 1000");
  const std::uint64_t steps = p.get_u64_or("steps", 50);
  if (steps < 1 || steps > 1000000)
    throw UsageError("--steps must be between 1 and 1000000");

  const QParams<double> params(q, 1.0);
  Table table({"beta_E", "weight_series", "weight_q", "residual"});
  for (std::uint64_t i = 1; i <= steps; ++i) {
    const double beta_e =
        beta_e_max * static_cast<double>(i) / static_cast<double>(steps);
    double exponent = 0.0;
    double power = 1.0;
    for (std::uint64_t n = 1; n <= order; ++n) {
      power *= beta_e;
      exponent += q_series_coefficient(static_cast<int>(n), q) * power;
    }
    table.push_row({beta_e, std::exp(-exponent), clamped_q_weight(beta_e, params),
                    series_vs_q_residual(beta_e, params, static_cast<int>(order))});
  }
  return table;
}

Table dispatch(const RunConfig& config) {
  switch (config.command) {
    case Command::kCount: return run_count(config);
    case Command::kOmega: return run_omega(config);
    case Command::kEnumerate: return run_enumerate(config);
    case Command::kBeCurve: return run_be_curve(config);
    case Command::kBoltzmannCurve: return run_boltzmann_curve(config);
    case Command::kMaxent: return run_maxent(config);
    case Command::kQCompare: return run_q_compare(config);
  }
  throw UsageError("unknown command");
}

// ---------------------------------------------------------------------------
// Output plumbing.

json cell_to_json(const Cell& cell) {
  struct Visitor {
    json operator()(std::int64_t v) const { return v; }
    json operator()(double v) const { return v; }
    json operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

std::string json_payload(const RunConfig& config, const Table& table) {
  json meta;
  meta["command"] = command_name(config.command);
  meta["params"] = config.params;
  meta["format"] = config.output_format == OutputFormat::kJson ? "json" : "csv";
  meta["output"] = config.output_path ? json(*config.output_path) : json(nullptr);
  meta["seed"] = config.seed ? json(*config.seed) : json(nullptr);

  json rows = json::array();
  for (const auto& row : table.rows) {
    json cells = json::array();
    for (const auto& cell : row) cells.push_back(cell_to_json(cell));
    rows.push_back(std::move(cells));
  }

  json doc;
  doc["meta"] = std::move(meta);
  doc["columns"] = table.columns;
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::filesystem::path resolve_output_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(kOutputDirEnvVar)) {
      if (*dir != '\0') return std::filesystem::path(dir) / p;
    }
  }
  return p;
}

void emit(const RunConfig& config, const Table& table) {
  const std::string payload = config.output_format == OutputFormat::kJson
                                  ? json_payload(config, table)
                                  : table.to_csv();
  if (!config.output_path) {
    std::cout << payload;
    return;
  }
  const auto path = resolve_output_path(*config.output_path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path.string());
  out << payload;
  out.flush();
  if (!out) throw IoError("failed while writing: " + path.string());
}

int report_error(int exit_code, const char* type, const std::string& message) {
  json record;
  record["error"] = {{"exit", exit_code}, {"type", type}, {"message", message}};
  std::cerr << record.dump() << "\n";
  return exit_code;
}

} // namespace

const char* command_name(Command command) {
  switch (command) {
    case Command::kCount: return "count";
    case Command::kOmega: return "omega";
    case Command::kEnumerate: return "enumerate";
    case Command::kBeCurve: return "be-curve";
    case Command::kBoltzmannCurve: return "boltzmann-curve";
    case Command::kMaxent: return "maxent";
    case Command::kQCompare: return "q-compare";
  }
  return "?";
}

RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig config;

  CLI::App app{
      "cohstat: coherent-access state counting and the distributions it induces"};
  app.name("cohstat");
  app.require_subcommand(1);

  std::string format = "csv";
  app.add_option("--format", format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  std::string output;
  auto* output_opt = app.add_option(
      "--output", output,
      "output file; relative paths resolve under $COHSTAT_OUT_DIR when set; "
      "stdout when omitted");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option(
      "--seed", seed, "64-bit seed, echoed into the JSON meta record");

  const auto param = [&config](CLI::App* sub, const std::string& key,
                               const std::string& description, bool required) {
    auto* opt = sub->add_option_function<std::string>(
        "--" + key,
        [&config, key](const std::string& value) { config.params[key] = value; },
        description);
    if (required) opt->required();
    return opt;
  };

  auto* count = app.add_subcommand(
      "count",
      "Exact counts for one level: G = 2^g - 1 coherent states and "
      "w = (G+n-1)!/((G-1)! n!) placements of n particles");
  count->callback([&config] { config.command = Command::kCount; });
  param(count, "g", "sublevel count g >= 1 (dimensionless); sets G = 2^g - 1",
        true);
  param(count, "n", "particle count (dimensionless)", true);

  auto* omega = app.add_subcommand(
      "omega",
      "Total microstate count Omega = sum over occupancy splits "
      "(N_1,...,N_m) of prod_j (G_j+N_j-1)!/((G_j-1)! N_j!)");
  omega->callback([&config] { config.command = Command::kOmega; });
  param(omega, "levels",
        "comma-separated sublevel counts g_j, one per level (dimensionless)",
        true);
  param(omega, "n", "total particle count (dimensionless)", true);

  auto* enumerate = app.add_subcommand(
      "enumerate",
      "Every occupation map of n particles over the 2^g - 1 nonempty "
      "sublevel subsets of one level");
  enumerate->callback([&config] { config.command = Command::kEnumerate; });
  param(enumerate, "g", "sublevel count g >= 1 (dimensionless)", true);
  param(enumerate, "n", "particle count (dimensionless)", true);

  const auto series_flags = [&param](CLI::App* sub) {
    param(sub, "beta", "inverse temperature beta = 1/kT (1/energy)", true);
    param(sub, "alpha1",
          "correction coefficient alpha_1 of (beta E)^2 (dimensionless)",
          false);
    param(sub, "alphas",
          "comma-separated alpha_1,alpha_2,... multiplying "
          "(beta E)^2,(beta E)^3,... (dimensionless)",
          false);
    param(sub, "e-max", "largest grid energy (energy units)", true);
    param(sub, "steps", "number of grid points (default 50)", false);
  };

  auto* be_curve = app.add_subcommand(
      "be-curve",
      "Occupation curve N/G = 1/(exp(eps*) - 1) with "
      "eps* = beta E + alpha_1 (beta E)^2 + ..., next to the equilibrium "
      "occupation 1/(exp(beta E) - 1)");
  be_curve->callback([&config] { config.command = Command::kBeCurve; });
  series_flags(be_curve);

  auto* boltzmann_curve = app.add_subcommand(
      "boltzmann-curve",
      "Weight curve exp(-beta E - alpha_1 (beta E)^2 - ...) next to the "
      "equilibrium factor exp(-beta E)");
  boltzmann_curve->callback(
      [&config] { config.command = Command::kBoltzmannCurve; });
  series_flags(boltzmann_curve);

  auto* maxent = app.add_subcommand(
      "maxent",
      "Solves multipliers beta_n so that p_j = exp(-sum_n beta_n E_j^n)/Z "
      "matches the target raw moments <E^n>");
  maxent->callback([&config] { config.command = Command::kMaxent; });
  param(maxent, "grid", "comma-separated energies E_j (energy units)", true);
  param(maxent, "moments",
        "comma-separated targets <E^1>,<E^2>,... (units energy^n)", true);
  param(maxent, "tol", "max-norm moment tolerance (default 1e-10)", false);
  param(maxent, "max-iter", "Newton iteration cap (default 200)", false);

  auto* q_compare = app.add_subcommand(
      "q-compare",
      "Compares exp(-sum_n c_n (beta E)^n) with c_n = (1-q)^(n-1)/n against "
      "the q-exponential [1 - (1-q) beta E]^(1/(1-q))");
  q_compare->callback([&config] { config.command = Command::kQCompare; });
  param(q_compare, "q", "entropic index q > 0 (dimensionless)", true);
  param(q_compare, "beta-e-max",
        "largest beta*E value (dimensionless); requires |1-q|*beta-e-max < 1",
        true);
  param(q_compare, "order", "series truncation order (default 40)", false);
  param(q_compare, "steps", "number of grid points (default 50)", false);

  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    throw HelpRequested{parsed.empty() ? app.help() : parsed.front()->help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  config.output_format =
      format == "json" ? OutputFormat::kJson : OutputFormat::kCsv;
  if (output_opt->count() > 0) config.output_path = output;
  if (seed_opt->count() > 0) config.seed = seed;
  return config;
}

int run(const RunConfig& config) {
  emit(config, dispatch(config));
  return kExitOk;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? argc - 1 : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return run(parse_args(args));
  } catch (const HelpRequested& help) {
    std::cout << help.text;
    return kExitOk;
  } catch (const UsageError& e) {
    return report_error(kExitUsage, "usage", e.what());
  } catch (const IoError& e) {
    return report_error(kExitIo, "io", e.what());
  } catch (const std::exception& e) {
    return report_error(kExitDomain, "domain", e.what());
  }
}

} // namespace cohstat::cli
