#pragma once
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qsum/scenario.hpp"

namespace qsum {

// Shortest representation that parses back to the same double.
std::string format_double(double v);

struct Column {
  std::string name;
  std::string description;
};

class Table {
 public:
  Table(std::string name, std::vector<Column> columns);
  const std::string& name() const { return name_; }
  const std::vector<Column>& columns() const { return columns_; }
  size_t rows() const { return rows_.size(); }

  // Cells are formatted on insertion; the row width must match the header.
  class Row {
   public:
    Row& operator<<(double v);
    Row& operator<<(int v);
    Row& operator<<(long v);
    Row& operator<<(const std::string& v);
    Row& operator<<(cplx v);  // two cells: re, im
   private:
    friend class Table;
    std::vector<std::string> cells_;
  };
  void add(const Row& r);
  std::string csv() const;
  // Writes <dir>/<name>.csv.
  void write(const std::string& dir) const;
  nlohmann::json schema() const;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::vector<std::vector<std::string>> rows_;
};

Table formal_table(const FormalSeries& U, cplx eps);
Table solve_table(const std::vector<SolveReport>& runs);
Table acceleration_table(const std::vector<SolveReport>& runs);
Table solution_table(const std::string& name, const std::vector<SectorialSolution>& sectors);
Table residual_table(const std::string& name, const std::vector<PointResidual>& per_sector);
Table cocycle_table(const std::vector<CocycleSample>& cocycles);
Table fit_table(const AsymptoticsReport& rep);
Table expansion_table(const ExpansionEstimate& est);
Table check_table(const AsymptoticsReport& rep);
Table chained_table(const ChainedReport& rep);

// Run manifest: tables written, their column schema, fitted constants,
// tolerances and timings.
class Manifest {
 public:
  explicit Manifest(std::string subcommand);
  void record(const Table& t);
  nlohmann::json& values() { return j_["values"]; }
  nlohmann::json& timings() { return j_["wall_seconds"]; }
  void set_config(const ScenarioConfig& cfg, const std::string& config_text);
  const nlohmann::json& json() const { return j_; }
  void write(const std::string& dir) const;

 private:
  nlohmann::json j_;
};

// Stable FNV-1a hash in hex, used for grid and config fingerprints.
std::string fingerprint(const std::string& bytes);

}  // namespace qsum
