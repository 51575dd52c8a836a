#include "qsum/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qsum {

namespace {

using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

double rad(double d) { return d * kPi / 180.0; }

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return need(j, key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

cplx to_cplx(const json& v) {
  if (v.is_number()) return cplx(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return cplx(v[0].get<double>(), v[1].get<double>());
  throw ConfigError("complex numbers are [re, im] pairs, got " + v.dump());
}

std::vector<cplx> to_cplx_list(const json& v) {
  if (!v.is_array()) throw ConfigError("expected a list, got " + v.dump());
  std::vector<cplx> out;
  for (const auto& e : v) out.push_back(to_cplx(e));
  return out;
}

Polynomial to_poly(const json& v) { return Polynomial(to_cplx_list(v)); }

// Named m-profiles: sech (sum of sech(m + shift)), gaussian, rational_decay
// or a sampled table.
GridFunction to_profile(const json& j, const MGrid& g, const Decay& d) {
  const std::string kind = get<std::string>(j, "kind");
  if (kind == "sech") {
    const auto shifts = get<std::vector<double>>(j, "shifts");
    const cplx amp = j.contains("amplitude") ? to_cplx(j.at("amplitude")) : cplx(1.0);
    return GridFunction::sample(g, d, [&](double m) {
      double s = 0.0;
      for (double a : shifts) s += 1.0 / std::cosh(m + a);
      return amp * s;
    });
  }
  if (kind == "gaussian") {
    const cplx amp = to_cplx(need(j, "amplitude"));
    const double w = get<double>(j, "width"), c = get_or<double>(j, "center", 0.0);
    if (!(w > 0.0)) throw ConfigError("gaussian width must be positive");
    return GridFunction::sample(g, d, [&](double m) {
      const double x = (m - c) / w;
      return amp * std::exp(-0.5 * x * x);
    });
  }
  if (kind == "table") {
    auto vals = to_cplx_list(need(j, "values"));
    if (static_cast<int>(vals.size()) != g.n_points)
      throw ConfigError("table profile needs n_points samples");
    return GridFunction(g, std::move(vals), d);
  }
  throw ConfigError("unknown profile kind '" + kind + "'");
}

CoefficientMap to_coefficient(const json& j, const MGrid& g, const Decay& d) {
  const std::string kind = get<std::string>(j, "kind");
  std::vector<cplx> ep = j.contains("eps_poly") ? to_cplx_list(j.at("eps_poly"))
                                                : std::vector<cplx>{1.0};
  if (kind == "gaussian")
    return CoefficientMap::gaussian(g, d, to_cplx(need(j, "amplitude")), get<double>(j, "width"),
                                    get_or<double>(j, "center", 0.0), ep);
  if (kind == "rational_decay")
    return CoefficientMap::rational_decay(g, d, to_cplx(need(j, "amplitude")),
                                          get<double>(j, "scale"), get<double>(j, "power"),
                                          get_or<double>(j, "rate", 0.0), ep);
  if (kind == "table") return CoefficientMap::table(to_profile(j, g, d), ep);
  throw ConfigError("unknown coefficient kind '" + kind + "'");
}

ProblemSpec to_problem(const json& j) {
  ProblemSpec s;
  s.q = get<double>(j, "q");
  s.k1 = get<int>(j, "k1");
  s.k2 = get<int>(j, "k2");
  s.D = get<int>(j, "D");
  s.dD = get<int>(j, "dD");
  s.Q = to_poly(need(j, "Q"));
  s.RD = to_poly(need(j, "RD"));
  const json& g = need(j, "grid");
  s.grid = MGrid{get<double>(g, "m_max"), get<int>(g, "n_points")};
  const json& d = need(j, "decay");
  s.decay = Decay{get<double>(d, "beta"), get<double>(d, "mu")};
  s.epsilon0 = get<double>(j, "epsilon0");
  const json& sq = need(j, "s_qr");
  s.s_qr = QRSector{rad(get<double>(sq, "direction_deg")), rad(get<double>(sq, "half_opening_deg")),
                    get<double>(sq, "radius")};
  for (const auto& lv : need(j, "levels")) {
    Level l;
    l.delta = get<int>(lv, "delta");
    l.R = to_poly(need(lv, "R"));
    for (const auto& t : need(lv, "terms"))
      l.terms.push_back({get_or<int>(t, "lambda", 1), get<int>(t, "d"), get<int>(t, "Delta"),
                         to_coefficient(need(t, "C"), s.grid, s.decay)});
    s.levels.push_back(std::move(l));
  }
  if (j.contains("forcing")) {
    for (const auto& f : j.at("forcing")) {
      ForcingTerm t;
      t.eps_power = get_or<int>(f, "eps_power", 0);
      t.G = to_profile(need(f, "G"), s.grid, s.decay);
      if (f.contains("poles"))
        for (const auto& p : f.at("poles"))
          t.phi.poles.push_back({to_cplx(need(p, "weight")),
                                 std::polar(get<double>(p, "modulus"), rad(get<double>(p, "angle_deg")))});
      if (f.contains("monomials"))
        for (const auto& m : f.at("monomials"))
          t.phi.monomials.push_back({get<int>(m, "power"), to_cplx(need(m, "coefficient"))});
      s.forcing.terms.push_back(std::move(t));
    }
  }
  return s;
}

EpsSampling to_sampling(const json& j, EpsSampling s) {
  s.r0 = get_or<double>(j, "r0", s.r0);
  s.ratio = get_or<double>(j, "ratio", s.ratio);
  s.count = get_or<int>(j, "count", s.count);
  return s;
}

IterationMode to_mode(const std::string& m) {
  if (m == "picard") return IterationMode::picard;
  if (m == "sweep") return IterationMode::sweep;
  throw ConfigError("unknown iteration mode '" + m + "'");
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  ScenarioConfig c;
  c.schema_version = get<int>(j, "schema_version");
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  c.name = get_or<std::string>(j, "name", c.name);
  c.problem = to_problem(need(j, "problem"));

  const json& cov = need(j, "covering");
  c.covering.epsilon0 = get_or<double>(cov, "epsilon0", c.problem.epsilon0);
  for (const auto& s : need(cov, "sectors")) {
    c.covering.sectors.push_back(Sector{rad(get<double>(s, "direction_deg")),
                                        rad(get<double>(s, "half_opening_deg")),
                                        c.covering.epsilon0});
    c.directions.push_back(rad(get_or<double>(s, "laplace_direction_deg",
                                              get<double>(s, "direction_deg"))));
  }

  if (j.contains("grids")) {
    const json& g = j.at("grids");
    GridPolicy& p = c.grids;
    p.ray_rmin = get_or(g, "ray_rmin", p.ray_rmin);
    p.k1_rmax = get_or(g, "k1_rmax", p.k1_rmax);
    p.k2_rmax = get_or(g, "k2_rmax", p.k2_rmax);
    p.L = get_or(g, "tau_ratio_denominator", p.L);
    if (g.contains("u_half_opening_deg")) p.u_half_opening = rad(get<double>(g, "u_half_opening_deg"));
    p.rho1 = get_or(g, "rho1", p.rho1);
    p.laplace_margin = get_or(g, "laplace_margin", p.laplace_margin);
    p.beta_prime = get_or(g, "beta_prime", p.beta_prime);
    p.r_T = get_or(g, "r_T", p.r_T);
    if (g.contains("t_nodes")) {
      const json& t = g.at("t_nodes");
      p.tgrid = TGrid{get<double>(t, "t0"), c.problem.q, get<int>(t, "L"), get<int>(t, "count")};
    } else {
      p.tgrid.q = c.problem.q;
    }
    if (g.contains("z_nodes")) p.z = to_cplx_list(g.at("z_nodes"));
  }
  if (j.contains("fixed_point")) {
    const json& f = j.at("fixed_point");
    FixedPointConfig& fp = c.fixed_point;
    fp.ball_radius = get_or(f, "ball_radius", fp.ball_radius);
    fp.max_iter = get_or(f, "max_iter", fp.max_iter);
    fp.tol = get_or(f, "tol", fp.tol);
    fp.zeta_psi = get_or(f, "zeta_psi", fp.zeta_psi);
    fp.zeta_le = get_or(f, "zeta_le", fp.zeta_le);
    fp.alpha = get_or(f, "alpha", fp.alpha);
    fp.nu = get_or(f, "nu", fp.nu);
    fp.shift = get_or(f, "shift", fp.shift);
    fp.mode = to_mode(get_or<std::string>(f, "mode", "sweep"));
  } else {
    c.fixed_point.mode = IterationMode::sweep;
  }
  if (j.contains("asymptotics")) {
    const json& a = j.at("asymptotics");
    AsymptoticsSettings& s = c.asymptotics;
    if (a.contains("cocycle_eps")) s.cocycle = to_sampling(a.at("cocycle_eps"), s.cocycle);
    if (a.contains("expansion_eps")) s.expansion = to_sampling(a.at("expansion_eps"), s.expansion);
    s.M = get_or(a, "M", s.M);
    s.flatness_floor = get_or(a, "flatness_floor", s.flatness_floor);
    s.collocation = get_or(a, "collocation_points", s.collocation);
    s.solve_modulus = get_or(a, "solve_modulus", s.solve_modulus);
  }
  if (j.contains("chained") && !j.at("chained").is_null()) {
    const json& ch = j.at("chained");
    ChainedSettings s;
    s.bold = to_problem(need(ch, "bold"));
    s.direction = rad(get_or<double>(ch, "direction_deg", 0.0));
    s.k1_rmax = get_or(ch, "k1_rmax", s.k1_rmax);
    s.eps = to_cplx_list(need(ch, "eps"));
    c.chained = std::move(s);
  }
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.jobs = get_or(j, "jobs", c.jobs);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string example_config_text(double A) {
  const double c = 0.3;
  auto pair = [](cplx z) { return json::array({z.real(), z.imag()}); };
  const cplx iA(0.0, A);
  const cplx a0 = iA * iA - c * c, a1 = 2.0 * iA;
  auto gauss = [](double amp, json eps_poly) {
    return json{{"kind", "gaussian"}, {"amplitude", amp}, {"width", 1.0}, {"center", 0.0},
                {"eps_poly", eps_poly}};
  };
  json problem = {
      {"q", 2.0}, {"k1", 1}, {"k2", 2}, {"D", 3}, {"dD", 3},
      {"Q", json::array({pair(a0), pair(a0 + a1), pair(a1 + 1.0), pair(1.0)})},
      {"RD", json::array({1.0, 1.0})},
      {"grid", {{"m_max", 20.0}, {"n_points", 401}}},
      {"decay", {{"beta", 0.5}, {"mu", 2.5}}},
      {"epsilon0", 0.3},
      {"s_qr", {{"direction_deg", 180.0}, {"half_opening_deg", 0.2 * 180.0 / kPi}, {"radius", c * c}}},
      {"levels", json::array({
          {{"delta", 1}, {"R", json::array({1.0})},
           {"terms", json::array({{{"lambda", 1}, {"d", 1}, {"Delta", 1},
                                   {"C", gauss(0.5, json::array({1.0, 0.5}))}}})}},
          {{"delta", 2}, {"R", json::array({0.0, 1.0})},
           {"terms", json::array({{{"lambda", 1}, {"d", 2}, {"Delta", 3},
                                   {"C", gauss(0.5, json::array({1.0}))}}})}}})},
      {"forcing", json::array({{{"eps_power", 0},
                                {"G", {{"kind", "sech"}, {"shifts", json::array({A, 0.0})}}},
                                {"poles", json::array({{{"weight", 1.0}, {"modulus", 1.0}, {"angle_deg", 120.0}},
                                                       {{"weight", 0.5}, {"modulus", 1.2}, {"angle_deg", 270.0}}})}}})}};
  const double B = 10.0, cb = 0.3;
  const cplx iB(0.0, B);
  json bold = problem;
  bold["Q"] = json::array({pair(iB * iB - cb * cb), pair(2.0 * iB), pair(1.0)});
  bold["RD"] = json::array({1.0});
  bold["dD"] = 2;
  bold["s_qr"]["radius"] = cb * cb;
  bold["levels"] = json::array({
      {{"delta", 1}, {"R", json::array({1.0})},
       {"terms", json::array({{{"lambda", 1}, {"d", 1}, {"Delta", 1}, {"C", gauss(0.25, json::array({1.0}))}}})}},
      {{"delta", 2}, {"R", json::array({1.0})},
       {"terms", json::array({{{"lambda", 1}, {"d", 2}, {"Delta", 3}, {"C", gauss(0.25, json::array({1.0}))}}})}}});
  bold["forcing"] = json::array({{{"eps_power", 0},
                                  {"G", {{"kind", "sech"}, {"shifts", json::array({0.0})}}},
                                  {"monomials", json::array({{{"power", 0}, {"coefficient", 1.0}},
                                                             {{"power", 1}, {"coefficient", 0.5}}})}}});
  const ScenarioConfig d = example_scenario(A);
  json sectors = json::array();
  const double half[4] = {70.0, 35.0, 45.0, 60.0}, dirs[4] = {0.0, 90.0, 150.0, 240.0};
  for (int p = 0; p < 4; ++p)
    sectors.push_back({{"direction_deg", dirs[p]}, {"half_opening_deg", half[p]}});
  json z = json::array();
  for (const cplx& v : d.grids.z) z.push_back(pair(v));
  json chained_eps = json::array();
  for (const cplx& e : d.chained->eps) chained_eps.push_back(pair(e));
  json j = {
      {"schema_version", kSchemaVersion},
      {"name", "example"},
      {"problem", problem},
      {"covering", {{"epsilon0", 0.3}, {"sectors", sectors}}},
      {"grids",
       {{"ray_rmin", d.grids.ray_rmin}, {"k1_rmax", d.grids.k1_rmax}, {"k2_rmax", d.grids.k2_rmax},
        {"tau_ratio_denominator", d.grids.L}, {"u_half_opening_deg", d.grids.u_half_opening * 180.0 / kPi},
        {"rho1", d.grids.rho1}, {"laplace_margin", d.grids.laplace_margin},
        {"beta_prime", d.grids.beta_prime}, {"r_T", d.grids.r_T},
        {"t_nodes", {{"t0", d.grids.tgrid.t0}, {"L", d.grids.tgrid.L}, {"count", d.grids.tgrid.count}}},
        {"z_nodes", z}}},
      {"fixed_point",
       {{"ball_radius", d.fixed_point.ball_radius}, {"max_iter", d.fixed_point.max_iter},
        {"tol", d.fixed_point.tol}, {"zeta_psi", 1.0}, {"zeta_le", 1.0},
        {"alpha", d.fixed_point.alpha}, {"nu", d.fixed_point.nu}, {"shift", d.fixed_point.shift},
        {"mode", "sweep"}}},
      {"asymptotics",
       {{"cocycle_eps", {{"r0", d.asymptotics.cocycle.r0}, {"ratio", d.asymptotics.cocycle.ratio},
                         {"count", d.asymptotics.cocycle.count}}},
        {"expansion_eps", {{"r0", d.asymptotics.expansion.r0}, {"ratio", d.asymptotics.expansion.ratio},
                           {"count", d.asymptotics.expansion.count}}},
        {"M", d.asymptotics.M}, {"flatness_floor", d.asymptotics.flatness_floor},
        {"collocation_points", d.asymptotics.collocation},
        {"solve_modulus", d.asymptotics.solve_modulus}}},
      {"chained",
       {{"bold", bold}, {"direction_deg", 0.0}, {"k1_rmax", d.chained->k1_rmax}, {"eps", chained_eps}}},
      {"seed", 0},
      {"jobs", 1}};
  return j.dump(2) + "\n";
}

}  // namespace qsum
