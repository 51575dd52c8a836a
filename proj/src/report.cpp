#include "qsum/report.hpp"

#include <Eigen/Core>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qsum {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Table::Table(std::string name, std::vector<Column> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

Table::Row& Table::Row::operator<<(double v) {
  cells_.push_back(format_double(v));
  return *this;
}
Table::Row& Table::Row::operator<<(int v) {
  cells_.push_back(std::to_string(v));
  return *this;
}
Table::Row& Table::Row::operator<<(long v) {
  cells_.push_back(std::to_string(v));
  return *this;
}
Table::Row& Table::Row::operator<<(const std::string& v) {
  if (v.find_first_of(",\"\n") != std::string::npos)
    throw ShapeError("CSV cells must not contain commas, quotes or newlines");
  cells_.push_back(v);
  return *this;
}
Table::Row& Table::Row::operator<<(cplx v) {
  cells_.push_back(format_double(v.real()));
  cells_.push_back(format_double(v.imag()));
  return *this;
}

void Table::add(const Row& r) {
  if (r.cells_.size() != columns_.size())
    throw ShapeError("row width " + std::to_string(r.cells_.size()) + " differs from header " +
                     std::to_string(columns_.size()) + " in table " + name_);
  rows_.push_back(r.cells_);
}

std::string Table::csv() const {
  std::string out;
  for (size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i].name;
  out += "\n";
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

void Table::write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream f(std::filesystem::path(dir) / (name_ + ".csv"), std::ios::binary);
  if (!f) throw ConfigError("cannot write table " + name_ + " to " + dir);
  f << csv();
}

nlohmann::json Table::schema() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns_) cols.push_back({{"name", c.name}, {"description", c.description}});
  return {{"file", name_ + ".csv"}, {"rows", rows_.size()}, {"columns", cols}};
}

Table formal_table(const FormalSeries& U, cplx eps) {
  Table t("formal", {{"n", "coefficient index"},
                     {"m", "frequency"},
                     {"re", "Re U_n(m)"},
                     {"im", "Im U_n(m)"},
                     {"eps_re", "Re eps"},
                     {"eps_im", "Im eps"}});
  for (int n = 0; n < U.size(); ++n) {
    const GridFunction& g = U[n];
    for (int i = 0; i < g.size(); ++i) {
      Table::Row r;
      r << n << g.grid().m(i) << g[i] << eps;
      t.add(r);
    }
  }
  return t;
}

Table solve_table(const std::vector<SolveReport>& runs) {
  Table t("solve", {{"sector", "sector index"},
                    {"eps_re", "Re eps"},
                    {"eps_im", "Im eps"},
                    {"k1_iterations", "Picard iterations for w_k1"},
                    {"k1_contraction", "largest ratio of consecutive w_k1 update norms"},
                    {"k1_norm", "weighted norm of w_k1"},
                    {"k1_residual", "relative residual of the w_k1 equation"},
                    {"k1_uniqueness_gap", "relative distance of w_k1 from a second start"},
                    {"k2_iterations", "Picard iterations for w_k2"},
                    {"k2_contraction", "largest ratio of consecutive w_k2 update norms"},
                    {"k2_norm", "weighted norm of w_k2"},
                    {"k2_residual", "relative residual of the w_k2 equation"},
                    {"k2_uniqueness_gap", "relative distance of w_k2 from a second start"},
                    {"acceleration_sup_rel", "sup |L(w_k1) - w_k2| / (1 + |w_k2|) on the overlap"},
                    {"pde_max_rel", "max relative (t, z) residual at seeded points"}});
  for (const auto& s : runs) {
    Table::Row r;
    r << s.index << s.eps << s.w_k1.iterations << s.w_k1.contraction_ratio << s.w_k1.norm
      << s.residual_k1 << s.uniqueness_gap_k1 << s.w_k2.iterations << s.w_k2.contraction_ratio
      << s.w_k2.norm << s.residual_k2 << s.uniqueness_gap_k2 << s.acceleration.sup_rel_diff
      << s.pde.max_rel;
    t.add(r);
  }
  return t;
}

Table acceleration_table(const std::vector<SolveReport>& runs) {
  Table t("acceleration", {{"sector", "sector index"},
                           {"radius", "|tau| of the comparison node"},
                           {"scaled_diff", "sup_m |L(w_k1) - w_k2| / sup |w_k2| at that radius"}});
  for (const auto& s : runs)
    for (size_t i = 0; i < s.acceleration.radii.size(); ++i) {
      Table::Row r;
      r << s.index << s.acceleration.radii[i] << s.acceleration.diff_by_radius[i];
      t.add(r);
    }
  return t;
}

Table solution_table(const std::string& name, const std::vector<SectorialSolution>& sectors) {
  Table t(name, {{"sector", "sector index"},
                 {"eps_re", "Re eps"},
                 {"eps_im", "Im eps"},
                 {"t", "t node"},
                 {"z_re", "Re z"},
                 {"z_im", "Im z"},
                 {"re", "Re value"},
                 {"im", "Im value"}});
  for (size_t p = 0; p < sectors.size(); ++p) {
    const auto& u = sectors[p];
    for (int e = 0; e < u.n_eps(); ++e)
      for (int j = 0; j < u.tgrid.count; ++j)
        for (size_t zi = 0; zi < u.z.size(); ++zi) {
          Table::Row r;
          r << static_cast<int>(p) << u.eps[e] << u.tgrid.t(j) << u.z[zi] << u.values[e](zi, j);
          t.add(r);
        }
  }
  return t;
}

Table residual_table(const std::string& name, const std::vector<PointResidual>& per_sector) {
  Table t(name, {{"sector", "sector index"},
                 {"point", "collocation point index"},
                 {"rel_residual", "residual relative to the sum of term moduli"}});
  for (size_t p = 0; p < per_sector.size(); ++p)
    for (size_t i = 0; i < per_sector[p].per_point.size(); ++i) {
      Table::Row r;
      r << static_cast<int>(p) << static_cast<int>(i) << per_sector[p].per_point[i];
      t.add(r);
    }
  return t;
}

Table cocycle_table(const std::vector<CocycleSample>& cocycles) {
  Table t("cocycles", {{"pair", "pair index p (sectors p, p+1)"},
                       {"eps_re", "Re eps"},
                       {"eps_im", "Im eps"},
                       {"eps_abs", "|eps|"},
                       {"diff", "sup over (t, z) of |u_{p+1} - u_p|"},
                       {"scale", "sup over (t, z) of |u_p|"}});
  for (const auto& c : cocycles)
    for (size_t i = 0; i < c.eps_values.size(); ++i) {
      Table::Row r;
      r << c.pair_index << c.eps_values[i] << std::abs(c.eps_values[i]) << c.diff_norms[i]
        << c.scales[i];
      t.add(r);
    }
  return t;
}

Table fit_table(const AsymptoticsReport& rep) {
  Table t("fits", {{"pair", "pair index"},
                   {"k_hat", "fitted flatness order"},
                   {"M_hat", "fitted power of |eps|"},
                   {"K_hat", "fitted constant"},
                   {"r2", "coefficient of determination"},
                   {"used", "samples above the noise floor"},
                   {"class", "1 or 2: nearest of k1, k2; 0 when flagged"},
                   {"margin", "classification margin in log k, 1 = exact"},
                   {"envelope_at_smallest", "fitted envelope at the smallest cocycle |eps|"}});
  for (size_t p = 0; p < rep.fits.size(); ++p) {
    const auto& f = rep.fits[p];
    int cls = 0;
    for (int i : rep.split.I1)
      if (i == static_cast<int>(p)) cls = 1;
    for (int i : rep.split.I2)
      if (i == static_cast<int>(p)) cls = 2;
    if (rep.split.flagged[p]) cls = 0;
    Table::Row r;
    r << static_cast<int>(p) << f.k_hat << f.M_hat << f.K_hat << f.r2 << f.used << cls
      << rep.split.margin[p] << rep.envelope_at_smallest[p];
    t.add(r);
  }
  return t;
}

Table expansion_table(const ExpansionEstimate& est) {
  Table t("expansion", {{"m", "expansion order"},
                        {"t", "t node"},
                        {"z_re", "Re z"},
                        {"z_im", "Im z"},
                        {"re", "Re h_m(t, z)"},
                        {"im", "Im h_m(t, z)"},
                        {"cross_sector_dev", "max over sector pairs of sup |h_m^p - h_m^p'|"}});
  for (int m = 0; m <= est.M; ++m)
    for (int j = 0; j < est.tgrid.count; ++j)
      for (size_t zi = 0; zi < est.z.size(); ++zi) {
        Table::Row r;
        r << m << est.tgrid.t(j) << est.z[zi] << est.values[m](zi, j)
          << est.cross_sector_deviation[m];
        t.add(r);
      }
  return t;
}

Table check_table(const AsymptoticsReport& rep) {
  Table t("checks", {{"order", "expansion order N or m"},
                     {"recursion_residual", "relative recursion residual for h_m"},
                     {"gevrey_eta", "remainder ratio eta_N of the bound proxy (nan if N unused)"},
                     {"fit_deviation", "cross-sector deviation of h_m"}});
  const int M = rep.expansion.M;
  for (int m = 0; m <= M; ++m) {
    Table::Row r;
    const double eta = m < static_cast<int>(rep.gevrey.eta.size()) ? rep.gevrey.eta[m] : NAN;
    r << m << rep.recursion.per_order[m] << eta << rep.expansion.cross_sector_deviation[m];
    t.add(r);
  }
  return t;
}

Table chained_table(const ChainedReport& rep) {
  Table t("chained", {{"eps_re", "Re eps"},
                      {"eps_im", "Im eps"},
                      {"psi_iterations", "iterations of the bold Borel-plane solve"},
                      {"psi_residual", "relative residual of the bold Borel-plane equation"}});
  for (size_t i = 0; i < rep.eps.size(); ++i) {
    Table::Row r;
    r << rep.eps[i] << rep.psi_iterations[i] << rep.psi_residuals[i];
    t.add(r);
  }
  return t;
}

Manifest::Manifest(std::string subcommand) {
  j_["tool"] = "qsum";
  j_["subcommand"] = std::move(subcommand);
  j_["tables"] = nlohmann::json::array();
  j_["values"] = nlohmann::json::object();
  j_["wall_seconds"] = nlohmann::json::object();
  j_["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                   std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}};
}

void Manifest::record(const Table& t) { j_["tables"].push_back(t.schema()); }

void Manifest::set_config(const ScenarioConfig& cfg, const std::string& config_text) {
  j_["config"] = {{"name", cfg.name},
                  {"schema_version", cfg.schema_version},
                  {"fingerprint", fingerprint(config_text)}};
  j_["seed"] = cfg.seed;
  j_["jobs"] = cfg.jobs;
  std::ostringstream g;
  const auto& p = cfg.problem;
  g << p.grid.m_max << ' ' << p.grid.n_points << ' ' << cfg.grids.L << ' ' << cfg.grids.ray_rmin
    << ' ' << cfg.grids.tgrid.t0 << ' ' << cfg.grids.tgrid.L << ' ' << cfg.grids.tgrid.count;
  for (const cplx& z : cfg.grids.z) g << ' ' << z;
  j_["grid_fingerprint"] = fingerprint(g.str());
  j_["tolerances"] = {{"fixed_point_tol", cfg.fixed_point.tol},
                      {"max_iter", cfg.fixed_point.max_iter},
                      {"flatness_floor", cfg.asymptotics.flatness_floor},
                      {"expansion_condition_limit", 1e12}};
}

void Manifest::write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream f(std::filesystem::path(dir) / "manifest.json", std::ios::binary);
  if (!f) throw ConfigError("cannot write manifest to " + dir);
  f << j_.dump(2) << "\n";
}

std::string fingerprint(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qsum
