#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voisyn/designs.hpp"
#include "voisyn/regress.hpp"
#include "voisyn/samples.hpp"

namespace voisyn {

// Which decision problem and loss functional is in force.
struct LossSpec {
  enum class Kind { ScalarQuadratic, WeightedA, TraceA, DCriterion, FiniteAction };
  Kind kind = Kind::ScalarQuadratic;
  std::vector<std::string> outputs;
  Eigen::VectorXd weights;    // WeightedA only; same length as outputs
  bool standardized = false;  // DCriterion: report det^(1/S)

  static LossSpec scalar_quadratic(std::string output);
  static LossSpec weighted_A(std::vector<std::string> outputs, Eigen::VectorXd weights);
  static LossSpec trace_A(std::vector<std::string> outputs);
  static LossSpec d_criterion(std::vector<std::string> outputs, bool standardized = false);
  static LossSpec finite_action(std::vector<std::string> loss_columns);
};

struct VoiEstimate {
  double value = 0;     // expected loss reduction, in loss units
  double baseline = 0;  // expected loss under current information
  double proportion = std::numeric_limits<double>::quiet_NaN();  // value/baseline
  double se = std::numeric_limits<double>::quiet_NaN();
  long K_used = 0;
  std::vector<std::string> warnings;
};

struct EvppiOptions {
  FitConfig fit;
  int se_draws = 200;  // coefficient draws behind the standard error
  std::uint64_t se_seed = 20120809;
  bool compute_se = true;
};

// Expected loss of the optimal decision under current information.
double expected_loss(const SampleTable& table, const LossSpec& loss);

VoiEstimate evpi(const SampleTable& table, const LossSpec& loss);

// Regression-based EVPPI of learning the named input columns exactly.
VoiEstimate evppi(const SampleTable& table, const std::vector<std::string>& inputs,
                  const LossSpec& loss, const EvppiOptions& options = {});

struct InputGroup {
  std::string name;
  std::vector<std::string> columns;
};

struct GridCell {
  std::optional<VoiEstimate> estimate;
  std::string error;  // set when the cell's regression failed
};

struct GridResult {
  std::vector<InputGroup> groups;        // rows
  std::vector<std::string> outputs;      // columns
  std::vector<std::vector<GridCell>> cells;
};

// One scalar-quadratic EVPPI per (input group, output); failed cells are
// recorded, the grid always completes.
GridResult evppi_grid(const SampleTable& table, const std::vector<InputGroup>& groups,
                      const std::vector<std::string>& outputs,
                      const EvppiOptions& options = {});

void write_grid_csv(const GridResult& grid, const std::filesystem::path& path);

// EVSI by the same regression machinery, with the design's simulated
// sufficient-statistic columns as predictors.
VoiEstimate evsi(const SampleTable& table_with_statistics,
                 const std::vector<std::string>& statistic_names, const LossSpec& loss,
                 const EvppiOptions& options = {});

struct CurvePoint {
  long n = 0;
  VoiEstimate estimate;
  double remaining = std::numeric_limits<double>::quiet_NaN();  // baseline - value
  std::string error;
};

// EVSI across a strictly increasing grid of sample sizes; statistics are
// re-simulated per n with the design's seed.
std::vector<CurvePoint> evsi_curve(const DesignSpec& design_template,
                                   const std::vector<long>& n_grid,
                                   const SampleTable& table, const LossSpec& loss,
                                   const EvppiOptions& options = {});

void write_curve_csv(const std::vector<CurvePoint>& curve,
                     const std::filesystem::path& path);

struct EnbsRow {
  long n;
  double value;
  double cost;
  double net;
};

struct EnbsResult {
  long optimal_n = 0;
  bool do_not_sample = false;
  std::vector<EnbsRow> rows;
};

// Net benefit over the curve's grid: value(n) - fixed - per_unit * n.
// Value and cost must be in the same loss units.
EnbsResult enbs(const std::vector<CurvePoint>& curve, double fixed_cost,
                double per_unit_cost);

void write_enbs_csv(const EnbsResult& result, const std::filesystem::path& path);

}  // namespace voisyn
