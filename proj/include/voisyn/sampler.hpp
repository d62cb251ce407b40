#pragma once

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "voisyn/hiv_model.hpp"
#include "voisyn/samples.hpp"

namespace voisyn {

// A log density on an unconstrained space plus a mapping from the sampler
// state to the named columns emitted in the output table.
struct Target {
  int dim = 0;
  std::vector<std::string> column_names;
  std::function<double(const Eigen::VectorXd&)> log_density;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> columns;
  // Dispersed starting point; called repeatedly until log_density is finite.
  // The second argument is ChainConfig::init_jitter.
  std::function<Eigen::VectorXd(std::mt19937_64&, double)> initial;
};

struct ChainConfig {
  int chains = 4;
  int iterations = 37500;  // post-burn-in recorded draws per chain
  // Burn-in, thinning and the joint-proposal mode default to what the HIV
  // posterior needs for split-Rhat < 1.05; simple targets can dial them down.
  int burnin = 60000;
  int thin = 20;
  std::uint64_t seed = 1;
  double target_accept = 0.44;  // coordinate-wise
  double init_jitter = 1.0;
  bool full_cov = true;  // add one adapted full-covariance jump per sweep
  int max_init_retries = 100;
  int max_threads = 0;  // concurrent chain workers; 0 means one per chain
};

struct Diagnostics {
  std::vector<std::string> names;
  Eigen::VectorXd rhat;  // split-Rhat per column; NaN with warning for 1 chain
  Eigen::VectorXd ess;   // effective sample size per column
  std::vector<double> accept_rate;  // per chain, post-adaptation
  std::vector<std::string> warnings;
};

// Split-Rhat (between/within variance ratio on half-chains) and
// batch-means ESS, both computed per column and capped at the draw count.
Diagnostics compute_diagnostics(const std::vector<std::string>& names,
                                const std::vector<Eigen::MatrixXd>& chains);

struct RunResult {
  SampleTable table;  // chains concatenated in chain-index order
  Diagnostics diagnostics;
};

// Adaptive random-walk Metropolis, one coordinate at a time, proposal scales
// tuned by Robbins-Monro toward target_accept during burn-in only.
// Deterministic given the seed.
RunResult run_chains(const Target& target, const ChainConfig& config);

// HIV posterior as a Target; emits every founder and every derived output.
Target hiv_target(const hiv::Data& data, hiv::Scenario scenario,
                  const hiv::LikelihoodTerms& terms = {},
                  const hiv::Options& options = {});

}  // namespace voisyn
