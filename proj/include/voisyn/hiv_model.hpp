#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace voisyn::hiv {

// Observed counts for the London MSM synthesis, one calendar year.
// y_pop, y_M and y_H have no published values and must come from the data
// file; the shipped defaults are synthetic and flagged as such.
struct Data {
  long long y_pop = 0;                      // ONS male population count
  long long y_G = 0, y_N = 0, y_P = 0;      // NATSAL subgroup counts
  long long n_NAT = 0;                      //   out of this many men
  long long y_M = 0;                        // SOPHID prevalent diagnosed MSM
  long long y_H = 0;                        // HANDD new diagnoses among them
  long long g1 = 0, g2 = 0, g3 = 0, g4 = 0, g5 = 0;  // GUMCAD cascade
  long long gA = 0, gAN = 0;                // GUM Anon positives / denominator
  long long y_GM_G = 0, n_GM_G = 0;         // GMSHS positives among GMSM
  long long y_GM_N = 0, n_GM_N = 0;         //   and among NGMSM
  std::vector<std::string> synthetic;       // field names with made-up values

  static Data from_json_file(const std::filesystem::path& path);
  void validate() const;  // throws on violated count constraints
};

enum class Scenario {
  Base,              // undiagnosed GMSM prevalence from the GUMCAD cascade
  AGumAnonOnly,      // (a) free pibar_G prior, informed by GUM Anon alone
  BGumcadDiagnosed,  // (b) GUMCAD also pins diagnosed GMSM prevalence
};

Scenario scenario_from_tag(std::string_view tag);  // "base" | "a" | "b"
std::string scenario_tag(Scenario s);

struct Options {
  bool include_pmsm = true;
  // pibar_P = pmsm_prevalence_factor * pibar_N; a synthetic stand-in for the
  // PMSM sub-model, isolated behind this knob.
  double pmsm_prevalence_factor = 0.25;
};

// Founder nodes.  pibar_G_free participates only under Scenario::AGumAnonOnly.
struct Params {
  double log_mu_pop = 0;
  double rho_G = 0, rho_N = 0, rho_P = 0;  // simplex with implicit remainder
  double a_S = 0;                          // SOPHID reporting bias, exp(a_S)~N(1,0.018^2)
  double a_H = 0.5;
  double a_delta_G = 0.5, a_delta_N = 0.5, a_delta_P = 0.5;
  double gamma1 = 0.5, gamma2 = 0.5, gamma3 = 0.5, gamma4 = 0.075;
  double a_UN = 0;                         // U(log 0.5, log 1.5)
  double a_OP = 0.5;
  double p_GM_G = 0.5, p_GM_N = 0.5;
  double pibar_G_free = 0.5;
};

// Quantities derived deterministically from the founders.
struct Outputs {
  double pi_UN, pi_OP, pi_GA, pi_GD;
  double or_GM;
  double pibar_G, pibar_N;
  double delta_G, delta_N;
  double pi_G, pi_N;
  double pidelta_G, pidelta_N;
  double r_G, r_N;
  double mu_DG, mu_DN, mu_UG, mu_UN;
  double mu_DP, mu_UP;  // zero when PMSM disabled
  double mu_U, mu_D, mu;
  double mu_M, p_H;
};

// Which likelihood factors are active; all on by default.  Tests use this to
// isolate single data sources.
struct LikelihoodTerms {
  bool pop = true;      // Poisson(y_pop | mu_pop)
  bool natsal = true;   // Multinomial subgroup membership
  bool sophid = true;   // Poisson(y_M | mu_M)
  bool handd = true;    // Binomial(y_H | y_M, p_H)
  bool gumcad = true;   // cascade binomials g2..g5
  bool gumanon = true;  // Binomial(gA | gAN, pi_GA)
  bool gmshs = true;    // two GMSHS binomials

  static LikelihoodTerms none() {
    return {false, false, false, false, false, false, false};
  }
};

// True iff every founder lies strictly inside its prior support (and
// gamma1 > 0, so pi_GA is well defined).
bool in_support(const Params& p, Scenario s);

Outputs derived_outputs(const Params& p, Scenario s, const Options& opt = {});

double log_prior(const Params& p, Scenario s);
double log_likelihood(const Params& p, const Data& d, Scenario s,
                      const LikelihoodTerms& terms = {}, const Options& opt = {});
double log_posterior(const Params& p, const Data& d, Scenario s,
                     const LikelihoodTerms& terms = {}, const Options& opt = {});

// Unconstrained reparameterization for the sampler: logit for bounded
// scalars (affinely rescaled where the support is not (0,1)), stick-breaking
// for the simplex, identity for log_mu_pop and a_S.
int unconstrained_dim(Scenario s);  // 17, or 18 under scenario (a)
Eigen::VectorXd to_unconstrained(const Params& p, Scenario s);
Params from_unconstrained(const Eigen::VectorXd& v, Scenario s);
// log |d constrained / d unconstrained| at v; add to the constrained-space
// log density to get the unconstrained-space one.
double log_jacobian(const Eigen::VectorXd& v, Scenario s);

std::vector<std::string> param_names(Scenario s);
std::vector<std::string> output_names(const Options& opt = {});
Eigen::VectorXd param_values(const Params& p, Scenario s);
Eigen::VectorXd output_values(const Outputs& o, const Options& opt = {});

}  // namespace voisyn::hiv
