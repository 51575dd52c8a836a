#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qsum/config.hpp"
#include "qsum/report.hpp"

using namespace qsum;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct Options {
  std::string config;
  std::string out = "qsum_out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  int N = 12;
  std::string eps;
  int sector = -1;
  double A = 10.0;
  int cocycle_count = 0;
  int expansion_count = 0;
  bool config_only = false;
};

struct ValidationFailure {
  json record;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cplx parse_eps(const std::string& s) {
  double re = 0.0, im = 0.0;
  char comma = 0;
  std::istringstream in(s);
  in >> re;
  if (in >> comma && comma == ',') in >> im;
  if (in.fail()) throw ConfigError("--eps expects re[,im]");
  return {re, im};
}

json report_json(const ValidationReport& rep) {
  json v = json::array();
  for (const auto& x : rep.violations) v.push_back({{"clause", x.clause}, {"detail", x.detail}});
  return {{"ok", rep.ok()}, {"violations", v}};
}

void emit(const Table& t, Manifest& m, const std::string& dir) {
  t.write(dir);
  m.record(t);
}

ScenarioConfig load(const Options& o, std::string& text) {
  text = read_file(o.config);
  ScenarioConfig cfg = parse_config(text);
  if (o.seed_set) cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  return cfg;
}

void require_valid(const ScenarioConfig& cfg) {
  const ValidationReport rep = validate_scenario(cfg);
  if (!rep.ok()) throw ValidationFailure{report_json(rep)};
}

int cmd_validate(const Options& o) {
  std::string text;
  const ScenarioConfig cfg = load(o, text);
  const ValidationReport rep = validate_scenario(cfg);
  std::cout << report_json(rep).dump(2) << "\n";
  return rep.ok() ? kExitOk : kExitValidation;
}

int cmd_formal(const Options& o) {
  std::string text;
  const ScenarioConfig cfg = load(o, text);
  const ValidationReport rep = validate_problem(cfg.problem);
  if (!rep.ok()) throw ValidationFailure{report_json(rep)};
  const cplx eps = o.eps.empty() ? cplx(cfg.asymptotics.solve_modulus) : parse_eps(o.eps);
  const auto t0 = std::chrono::steady_clock::now();
  const FormalSeries U = formal_coefficients(cfg.problem, o.N, eps);
  Manifest m("formal");
  m.set_config(cfg, text);
  emit(formal_table(U, eps), m, o.out);
  m.values()["N"] = o.N;
  m.timings()["formal"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.write(o.out);
  return kExitOk;
}

int cmd_solve(const Options& o) {
  std::string text;
  const ScenarioConfig cfg = load(o, text);
  require_valid(cfg);
  std::vector<SolveReport> runs;
  std::vector<SectorialSolution> us;
  Manifest m("solve");
  m.set_config(cfg, text);
  for (int p = 0; p < cfg.sectors(); ++p) {
    if (o.sector >= 0 && p != o.sector) continue;
    runs.push_back(solve_single(cfg, p));
    us.push_back(runs.back().u);
    m.timings()["sector_" + std::to_string(p)] = runs.back().seconds;
  }
  std::vector<PointResidual> res;
  for (const auto& r : runs) res.push_back(r.pde);
  emit(solve_table(runs), m, o.out);
  emit(acceleration_table(runs), m, o.out);
  emit(solution_table("solutions", us), m, o.out);
  emit(residual_table("residuals", res), m, o.out);
  m.write(o.out);
  return kExitOk;
}

void write_asymptotics(const ScenarioConfig& cfg, const AsymptoticsReport& rep, Manifest& m,
                       const std::string& out) {
  emit(solution_table("solutions", rep.cocycle_u), m, out);
  emit(residual_table("residuals", rep.pde), m, out);
  emit(cocycle_table(rep.cocycles), m, out);
  emit(fit_table(rep), m, out);
  emit(expansion_table(rep.expansion), m, out);
  emit(check_table(rep), m, out);
  json fits = json::array();
  for (const auto& f : rep.fits)
    fits.push_back({{"k_hat", f.k_hat}, {"M_hat", f.M_hat}, {"K_hat", f.K_hat}, {"r2", f.r2}});
  m.values()["fits"] = fits;
  m.values()["I1"] = rep.split.I1;
  m.values()["I2"] = rep.split.I2;
  m.values()["recursion_max_rel"] = rep.recursion.max_rel;
  m.values()["recursion_orders_checked"] = cfg.problem.dD;
  m.values()["gevrey_bounded"] = rep.gevrey.bounded;
  m.values()["gevrey_max_root"] = rep.gevrey.max_root;
  m.values()["gevrey_median_root"] = rep.gevrey.median_root;
  m.values()["expansion_M"] = rep.expansion.M;
  m.values()["fit_residuals"] = rep.expansion.fit_residuals;
  m.timings()["asymptotics"] = rep.seconds;
}

int cmd_asymptotics(const Options& o) {
  std::string text;
  const ScenarioConfig cfg = load(o, text);
  require_valid(cfg);
  const AsymptoticsReport rep = run_asymptotics(cfg);
  Manifest m("asymptotics");
  m.set_config(cfg, text);
  write_asymptotics(cfg, rep, m, o.out);
  m.write(o.out);
  return kExitOk;
}

int cmd_chained(const Options& o) {
  std::string text;
  const ScenarioConfig cfg = load(o, text);
  require_valid(cfg);
  const ChainedReport rep = run_chained(cfg);
  Manifest m("chained");
  m.set_config(cfg, text);
  emit(chained_table(rep), m, o.out);
  emit(solution_table("solutions", {rep.u}), m, o.out);
  emit(residual_table("residuals", {rep.composed}), m, o.out);
  m.values()["composed_max_rel"] = rep.composed.max_rel;
  m.timings()["chained"] = rep.seconds;
  m.write(o.out);
  return kExitOk;
}

int cmd_example(const Options& o) {
  const std::string text = example_config_text(o.A);
  std::filesystem::create_directories(o.out);
  std::ofstream(std::filesystem::path(o.out) / "config.json", std::ios::binary) << text;
  if (o.config_only) return kExitOk;
  ScenarioConfig cfg = parse_config(text);
  if (o.seed_set) cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  if (o.cocycle_count > 0) cfg.asymptotics.cocycle.count = o.cocycle_count;
  if (o.expansion_count > 0) cfg.asymptotics.expansion.count = o.expansion_count;
  require_valid(cfg);
  const AsymptoticsReport rep = run_asymptotics(cfg);
  Manifest m("example");
  m.set_config(cfg, text);
  m.values()["A"] = o.A;
  write_asymptotics(cfg, rep, m, o.out);
  m.write(o.out);
  return kExitOk;
}

void write_error(const Options& o, const json& rec) {
  std::cout << rec.dump(2) << "\n";
  try {
    std::filesystem::create_directories(o.out);
    std::ofstream(std::filesystem::path(o.out) / "error.json", std::ios::binary)
        << rec.dump(2) << "\n";
  } catch (...) {
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-Borel/q-Laplace summation pipeline"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* s, bool needs_config) {
    auto* c = s->add_option("--config", o.config, "scenario file (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "output directory");
    s->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { o.seed = v; o.seed_set = true; },
        "seed for collocation point selection");
    s->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* validate = app.add_subcommand("validate", "check all hypotheses of a scenario");
  common(validate, true);
  auto* formal = app.add_subcommand("formal", "coefficient table of the formal solution");
  common(formal, true);
  formal->add_option("--N", o.N, "truncation order")->check(CLI::NonNegativeNumber);
  formal->add_option("--eps", o.eps, "eps as re[,im]");
  auto* solve = app.add_subcommand("solve", "w_k1, acceleration, w_k2 and u per sector");
  common(solve, true);
  solve->add_option("--sector", o.sector, "only this sector");
  auto* asym = app.add_subcommand("asymptotics", "cocycles, flatness fits and expansion checks");
  common(asym, true);
  auto* chained = app.add_subcommand("chained", "chained forcing scenario");
  common(chained, true);
  auto* example = app.add_subcommand("example", "built-in example with parameter A");
  common(example, false);
  example->add_option("--A", o.A, "parameter A of the example");
  example->add_option("--cocycle-count", o.cocycle_count, "eps moduli per overlap ray");
  example->add_option("--expansion-count", o.expansion_count, "eps moduli per sector");
  example->add_flag("--config-only", o.config_only, "only write the scenario file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }
  try {
    if (*validate) return cmd_validate(o);
    if (*formal) return cmd_formal(o);
    if (*solve) return cmd_solve(o);
    if (*asym) return cmd_asymptotics(o);
    if (*chained) return cmd_chained(o);
    if (*example) return cmd_example(o);
  } catch (const ValidationFailure& v) {
    write_error(o, {{"error", {{"kind", "validation"}, {"report", v.record}}}});
    return kExitValidation;
  } catch (const ConfigError& e) {
    write_error(o, {{"error", {{"kind", e.kind()}, {"message", e.what()}}}});
    return kExitValidation;
  } catch (const Error& e) {
    write_error(o, {{"error", {{"kind", e.kind()}, {"message", e.what()}}}});
    return kExitRuntime;
  } catch (const std::exception& e) {
    write_error(o, {{"error", {{"kind", "internal"}, {"message", e.what()}}}});
    return kExitRuntime;
  }
  return kExitRuntime;
}
