#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace voisyn {

// Optional provenance carried alongside a table (written to <name>.meta.json).
struct TableMeta {
  std::uint64_t seed = 0;
  int chains = 0;
  int burnin = 0;
  int thin = 1;
  std::string scenario;
  std::vector<std::string> synthetic_fields;
};

// K draws of V named scalar quantities.  Immutable after construction;
// the universal currency between the sampler, regression and VoI estimators.
class SampleTable {
 public:
  SampleTable() = default;
  SampleTable(std::vector<std::string> names, Eigen::MatrixXd draws);

  const std::vector<std::string>& names() const { return names_; }
  const Eigen::MatrixXd& draws() const { return draws_; }
  Eigen::Index rows() const { return draws_.rows(); }
  Eigen::Index cols() const { return draws_.cols(); }

  bool has(const std::string& name) const;
  // Throws if the name is unknown.
  Eigen::Index index_of(const std::string& name) const;
  Eigen::VectorXd col(const std::string& name) const;

  // New table holding the named columns, in the given order.
  SampleTable select(const std::vector<std::string>& names) const;
  // New table with extra columns appended (row counts must match).
  SampleTable with_columns(const SampleTable& extra) const;

  std::optional<TableMeta> meta;

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd draws_;
};

struct SummaryRow {
  std::string name;
  double mean;
  double sd;
  double median;
  double q025;
  double q975;
};

// Type-7 empirical quantile (linear interpolation between order statistics)
// of an unsorted sample.
double quantile_type7(Eigen::VectorXd values, double p);

// Unbiased (K-1 denominator) two-pass variance.
double sample_variance(const Eigen::VectorXd& values);

std::vector<SummaryRow> summarize(const SampleTable& table);

void write_csv(const SampleTable& table, const std::filesystem::path& path);
SampleTable read_csv(const std::filesystem::path& path);

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::filesystem::path& path);

// "%.17g" rendering used for every numeric cell; lossless for doubles.
std::string format_double(double x);

}  // namespace voisyn
