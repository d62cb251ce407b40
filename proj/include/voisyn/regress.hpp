#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace voisyn {

// One basis term: a product of hinge functions over distinct predictors.
// An empty factor list is the intercept.
struct HingeTerm {
  struct Factor {
    int var;      // predictor column
    double knot;  // a training-data value of that predictor
    int sign;     // +1: max(0, x - knot); -1: max(0, knot - x)
  };
  std::vector<Factor> factors;

  int degree() const { return static_cast<int>(factors.size()); }
  bool uses_var(int var) const;
};

struct FitConfig {
  int max_terms = 21;
  int max_degree = 2;
  double gcv_penalty = 3.0;         // effective-parameter cost per knot
  double forward_threshold = 1e-4;  // minimum relative RSS improvement
  int max_knots = 1023;             // knot candidates per predictor
  enum class Backend { Mars, Polynomial };
  Backend backend = Backend::Mars;
};

// Fitted hinge-basis regression.  Stores enough training-time state
// (Gram matrix, basis column means) for coefficient-uncertainty simulation
// and O(terms^2) re-evaluation of variance functionals.
struct MarsModel {
  std::vector<HingeTerm> basis;  // basis[0] is the intercept
  Eigen::VectorXd coef;
  double gcv = 0;
  Eigen::VectorXd fitted;
  Eigen::VectorXd resid;
  double rss = 0;
  long K = 0;
  int n_predictors = 0;              // columns of the training X
  std::vector<int> active_columns;   // training columns kept (non-constant)
  Eigen::MatrixXd gram;              // B' B of the final basis
  Eigen::VectorXd basis_means;       // column means of the final basis
  Eigen::VectorXd bty;               // B' y
  double yty = 0;
  double sigma2 = 0;                 // RSS / (K - terms)
  std::vector<std::string> warnings;
  FitConfig::Backend backend = FitConfig::Backend::Mars;
  // Polynomial-backend state: monomial exponents over active columns of the
  // standardized predictors.
  Eigen::MatrixXi poly_exponents;
  Eigen::VectorXd center, scale;

  int terms() const { return static_cast<int>(basis.size()); }
};

MarsModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
              const FitConfig& config = {});

Eigen::VectorXd predict(const MarsModel& model, const Eigen::MatrixXd& X);

// Evaluate the basis at X (rows x terms); predictions are basis * coef.
Eigen::MatrixXd evaluate_basis(const MarsModel& model, const Eigen::MatrixXd& X);

// Draws from Normal(coef, sigma2 * (B'B)^-1), one row per draw.
Eigen::MatrixXd coefficient_draws(const MarsModel& model, int n_draws,
                                  std::uint64_t seed);

// JSON dump of basis terms and coefficients, for golden-file tests.
void dump_model_json(const MarsModel& model, const std::filesystem::path& path);

}  // namespace voisyn
