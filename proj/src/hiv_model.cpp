#include "voisyn/hiv_model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace voisyn::hiv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGamma4Hi = 0.15;
const double kAUnLo = std::log(0.5);
const double kAUnHi = std::log(1.5);

double sigmoid(double u) {
  if (u >= 0) {
    const double e = std::exp(-u);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double odds(double p) { return p / (1.0 - p); }
double inv_odds(double o) { return o / (1.0 + o); }

bool in01(double x) { return x > 0.0 && x < 1.0; }

double normal_lpdf(double x, double mu, double sd) {
  static const double log_sqrt_2pi = 0.5 * std::log(2.0 * M_PI);
  const double z = (x - mu) / sd;
  return -0.5 * z * z - std::log(sd) - log_sqrt_2pi;
}

double poisson_lpmf(long long y, double mu) {
  if (mu <= 0) return kNegInf;
  return static_cast<double>(y) * std::log(mu) - mu - std::lgamma(static_cast<double>(y) + 1.0);
}

double binomial_lpmf(long long y, long long n, double p) {
  if (p < 0.0 || p > 1.0) return kNegInf;
  const double yd = static_cast<double>(y);
  const double nd = static_cast<double>(n);
  double lp = std::lgamma(nd + 1.0) - std::lgamma(yd + 1.0) - std::lgamma(nd - yd + 1.0);
  if (y > 0) {
    if (p == 0.0) return kNegInf;
    lp += yd * std::log(p);
  }
  if (y < n) {
    if (p == 1.0) return kNegInf;
    lp += (nd - yd) * std::log1p(-p);
  }
  return lp;
}

}  // namespace

Data Data::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);

  static const char* required[] = {"y_pop", "y_G", "y_N", "y_P", "n_NAT", "y_M",
                                   "y_H", "g1", "g2", "g3", "g4", "g5",
                                   "gA", "gAN", "y_GM_G", "n_GM_G", "y_GM_N", "n_GM_N"};
  std::string missing;
  for (const char* f : required) {
    if (!j.contains(f)) {
      if (!missing.empty()) missing += ", ";
      missing += f;
    }
  }
  if (!missing.empty()) {
    throw std::runtime_error(path.string() + ": missing required fields: " + missing);
  }

  Data d;
  d.y_pop = j["y_pop"];
  d.y_G = j["y_G"];
  d.y_N = j["y_N"];
  d.y_P = j["y_P"];
  d.n_NAT = j["n_NAT"];
  d.y_M = j["y_M"];
  d.y_H = j["y_H"];
  d.g1 = j["g1"];
  d.g2 = j["g2"];
  d.g3 = j["g3"];
  d.g4 = j["g4"];
  d.g5 = j["g5"];
  d.gA = j["gA"];
  d.gAN = j["gAN"];
  d.y_GM_G = j["y_GM_G"];
  d.n_GM_G = j["n_GM_G"];
  d.y_GM_N = j["y_GM_N"];
  d.n_GM_N = j["n_GM_N"];
  if (j.contains("synthetic")) d.synthetic = j["synthetic"].get<std::vector<std::string>>();
  d.validate();
  return d;
}

void Data::validate() const {
  auto fail = [](const std::string& msg) { throw std::runtime_error("HivData: " + msg); };
  const long long all[] = {y_pop, y_G, y_N, y_P, n_NAT, y_M, y_H, g1, g2, g3, g4,
                           g5, gA, gAN, y_GM_G, n_GM_G, y_GM_N, n_GM_N};
  for (long long v : all) {
    if (v < 0) fail("negative count");
  }
  if (g2 > g1 || g3 > g2 || g4 > g3 || g5 > g4) fail("GUMCAD cascade not decreasing");
  if (gA > gAN) fail("gA > gAN");
  if (y_H > y_M) fail("y_H > y_M");
  if (y_G + y_N + y_P > n_NAT) fail("NATSAL subgroup counts exceed n_NAT");
  if (y_GM_G > n_GM_G || y_GM_N > n_GM_N) fail("GMSHS positives exceed denominator");
}

Scenario scenario_from_tag(std::string_view tag) {
  if (tag == "base") return Scenario::Base;
  if (tag == "a") return Scenario::AGumAnonOnly;
  if (tag == "b") return Scenario::BGumcadDiagnosed;
  throw std::invalid_argument("unknown scenario tag '" + std::string(tag) +
                              "' (expected base, a or b)");
}

std::string scenario_tag(Scenario s) {
  switch (s) {
    case Scenario::Base: return "base";
    case Scenario::AGumAnonOnly: return "a";
    case Scenario::BGumcadDiagnosed: return "b";
  }
  return "?";
}

bool in_support(const Params& p, Scenario s) {
  if (!std::isfinite(p.log_mu_pop) || !std::isfinite(p.a_S)) return false;
  if (!(p.rho_G > 0 && p.rho_N > 0 && p.rho_P > 0)) return false;
  if (!(p.rho_G + p.rho_N + p.rho_P < 1.0)) return false;
  if (!in01(p.a_H) || !in01(p.a_delta_G) || !in01(p.a_delta_N) || !in01(p.a_delta_P))
    return false;
  if (!in01(p.gamma1) || !in01(p.gamma2) || !in01(p.gamma3)) return false;
  if (!(p.gamma4 > 0 && p.gamma4 < kGamma4Hi)) return false;
  if (!(p.a_UN > kAUnLo && p.a_UN < kAUnHi)) return false;
  if (!in01(p.a_OP) || !in01(p.p_GM_G) || !in01(p.p_GM_N)) return false;
  if (s == Scenario::AGumAnonOnly && !in01(p.pibar_G_free)) return false;
  return true;
}

Outputs derived_outputs(const Params& p, Scenario s, const Options& opt) {
  Outputs o{};

  const double p_UN = sigmoid(logit(p.gamma4) + p.a_UN);
  const double a_EX = p.a_OP * (kGamma4Hi - p.gamma4);
  o.pi_UN = p.gamma1 * (1.0 - p.gamma2) * p_UN;
  o.pi_OP = p.gamma1 * p.gamma2 * (1.0 - p.gamma3) * (p.gamma4 + a_EX);
  o.pi_GD = p.gamma1 * p.gamma2 * p.gamma3 * p.gamma4;

  o.pibar_G = (s == Scenario::AGumAnonOnly) ? p.pibar_G_free : o.pi_UN + o.pi_OP;
  o.pi_GA = (o.pibar_G + o.pi_GD) / p.gamma1;

  o.or_GM = odds(p.p_GM_N) / odds(p.p_GM_G);
  o.pibar_N = inv_odds(odds(o.pibar_G) * o.or_GM);

  if (s == Scenario::BGumcadDiagnosed) {
    // Diagnosed prevalence in GMSM pinned by the cascade; a_delta_G unused.
    o.pidelta_G = (1.0 - p.gamma1) + o.pi_GD;
    o.pi_G = o.pibar_G + o.pidelta_G;
    o.delta_G = o.pidelta_G / o.pi_G;
  } else {
    o.delta_G = p.a_delta_G * (1.0 - o.pibar_G);
    o.pi_G = o.pibar_G / (1.0 - o.delta_G);
    o.pidelta_G = o.pi_G - o.pibar_G;
  }
  o.delta_N = p.a_delta_N * (1.0 - o.pibar_N);
  o.pi_N = o.pibar_N / (1.0 - o.delta_N);
  o.pidelta_N = o.pi_N - o.pibar_N;

  const double mu_pop = std::exp(p.log_mu_pop);
  o.r_G = p.rho_G * mu_pop;
  o.r_N = p.rho_N * mu_pop;

  o.mu_UG = o.pibar_G * o.r_G;
  o.mu_DG = o.pidelta_G * o.r_G;
  o.mu_UN = o.pibar_N * o.r_N;
  o.mu_DN = o.pidelta_N * o.r_N;

  o.mu_DP = 0.0;
  o.mu_UP = 0.0;
  if (opt.include_pmsm) {
    const double pibar_P = opt.pmsm_prevalence_factor * o.pibar_N;
    const double delta_P = p.a_delta_P * (1.0 - pibar_P);
    const double pi_P = pibar_P / (1.0 - delta_P);
    const double r_P = p.rho_P * mu_pop;
    o.mu_UP = pibar_P * r_P;
    o.mu_DP = (pi_P - pibar_P) * r_P;
  }

  o.mu_D = o.mu_DG + o.mu_DN + o.mu_DP;
  o.mu_U = o.mu_UG + o.mu_UN + o.mu_UP;
  o.mu = o.mu_DG + o.mu_DN + o.mu_UG + o.mu_UN;

  o.mu_M = std::exp(p.a_S) * o.mu_D;
  o.p_H = p.a_H * o.mu_DG / o.mu_D;
  return o;
}

double log_prior(const Params& p, Scenario s) {
  if (!in_support(p, s)) return kNegInf;
  double lp = 0.0;
  lp += normal_lpdf(p.log_mu_pop, 0.0, 1000.0);
  // Dirichlet(1,1,1,1) over (rho_G, rho_N, rho_P, rest): log Gamma(4) = log 6.
  lp += std::log(6.0);
  // exp(a_S) ~ N(1, 0.018^2), density on the a_S scale.
  lp += normal_lpdf(std::exp(p.a_S), 1.0, 0.018) + p.a_S;
  // U(0,1) founders contribute 0 each.
  lp += -std::log(kGamma4Hi);
  lp += -std::log(kAUnHi - kAUnLo);
  return lp;
}

double log_likelihood(const Params& p, const Data& d, Scenario s,
                      const LikelihoodTerms& terms, const Options& opt) {
  if (!in_support(p, s)) return kNegInf;
  const Outputs o = derived_outputs(p, s, opt);
  if (o.pi_GA > 1.0 || o.p_H > 1.0) return kNegInf;
  if (s == Scenario::BGumcadDiagnosed && o.pi_G > 1.0) return kNegInf;

  double ll = 0.0;
  if (terms.pop) {
    ll += poisson_lpmf(d.y_pop, std::exp(p.log_mu_pop));
  }
  if (terms.natsal) {
    const double rho_rest = 1.0 - p.rho_G - p.rho_N - p.rho_P;
    const long long y_rest = d.n_NAT - d.y_G - d.y_N - d.y_P;
    double lm = std::lgamma(static_cast<double>(d.n_NAT) + 1.0);
    const long long ys[] = {d.y_G, d.y_N, d.y_P, y_rest};
    const double rhos[] = {p.rho_G, p.rho_N, p.rho_P, rho_rest};
    for (int i = 0; i < 4; ++i) {
      lm -= std::lgamma(static_cast<double>(ys[i]) + 1.0);
      if (ys[i] > 0) lm += static_cast<double>(ys[i]) * std::log(rhos[i]);
    }
    ll += lm;
  }
  if (terms.sophid) {
    ll += poisson_lpmf(d.y_M, o.mu_M);
  }
  if (terms.handd) {
    ll += binomial_lpmf(d.y_H, d.y_M, o.p_H);
  }
  if (terms.gumcad) {
    ll += binomial_lpmf(d.g2, d.g1, p.gamma1);
    ll += binomial_lpmf(d.g3, d.g2, p.gamma2);
    ll += binomial_lpmf(d.g4, d.g3, p.gamma3);
    ll += binomial_lpmf(d.g5, d.g4, p.gamma4);
  }
  if (terms.gumanon) {
    ll += binomial_lpmf(d.gA, d.gAN, o.pi_GA);
  }
  if (terms.gmshs) {
    ll += binomial_lpmf(d.y_GM_G, d.n_GM_G, p.p_GM_G);
    ll += binomial_lpmf(d.y_GM_N, d.n_GM_N, p.p_GM_N);
  }
  return ll;
}

double log_posterior(const Params& p, const Data& d, Scenario s,
                     const LikelihoodTerms& terms, const Options& opt) {
  const double lp = log_prior(p, s);
  if (lp == kNegInf) return kNegInf;
  const double ll = log_likelihood(p, d, s, terms, opt);
  return lp + ll;
}

int unconstrained_dim(Scenario s) { return s == Scenario::AGumAnonOnly ? 18 : 17; }

namespace {

double scaled_logit(double x, double lo, double hi) { return logit((x - lo) / (hi - lo)); }
double scaled_sigmoid(double u, double lo, double hi) { return lo + (hi - lo) * sigmoid(u); }
// log |dx/du| of scaled_sigmoid.
double scaled_sigmoid_lj(double u, double lo, double hi) {
  const double z = sigmoid(u);
  return std::log(hi - lo) + std::log(z) + std::log1p(-z);
}

}  // namespace

Eigen::VectorXd to_unconstrained(const Params& p, Scenario s) {
  Eigen::VectorXd v(unconstrained_dim(s));
  v[0] = p.log_mu_pop;
  // Stick-breaking over (rho_G, rho_N, rho_P, remainder).
  const double z1 = p.rho_G;
  const double z2 = p.rho_N / (1.0 - p.rho_G);
  const double z3 = p.rho_P / (1.0 - p.rho_G - p.rho_N);
  v[1] = logit(z1);
  v[2] = logit(z2);
  v[3] = logit(z3);
  v[4] = p.a_S;
  v[5] = logit(p.a_H);
  v[6] = logit(p.a_delta_G);
  v[7] = logit(p.a_delta_N);
  v[8] = logit(p.a_delta_P);
  v[9] = logit(p.gamma1);
  v[10] = logit(p.gamma2);
  v[11] = logit(p.gamma3);
  v[12] = scaled_logit(p.gamma4, 0.0, kGamma4Hi);
  v[13] = scaled_logit(p.a_UN, kAUnLo, kAUnHi);
  v[14] = logit(p.a_OP);
  v[15] = logit(p.p_GM_G);
  v[16] = logit(p.p_GM_N);
  if (s == Scenario::AGumAnonOnly) v[17] = logit(p.pibar_G_free);
  return v;
}

Params from_unconstrained(const Eigen::VectorXd& v, Scenario s) {
  if (v.size() != unconstrained_dim(s)) {
    throw std::invalid_argument("from_unconstrained: wrong dimension");
  }
  Params p;
  p.log_mu_pop = v[0];
  const double z1 = sigmoid(v[1]);
  const double z2 = sigmoid(v[2]);
  const double z3 = sigmoid(v[3]);
  p.rho_G = z1;
  p.rho_N = z2 * (1.0 - p.rho_G);
  p.rho_P = z3 * (1.0 - p.rho_G - p.rho_N);
  p.a_S = v[4];
  p.a_H = sigmoid(v[5]);
  p.a_delta_G = sigmoid(v[6]);
  p.a_delta_N = sigmoid(v[7]);
  p.a_delta_P = sigmoid(v[8]);
  p.gamma1 = sigmoid(v[9]);
  p.gamma2 = sigmoid(v[10]);
  p.gamma3 = sigmoid(v[11]);
  p.gamma4 = scaled_sigmoid(v[12], 0.0, kGamma4Hi);
  p.a_UN = scaled_sigmoid(v[13], kAUnLo, kAUnHi);
  p.a_OP = sigmoid(v[14]);
  p.p_GM_G = sigmoid(v[15]);
  p.p_GM_N = sigmoid(v[16]);
  if (s == Scenario::AGumAnonOnly) p.pibar_G_free = sigmoid(v[17]);
  return p;
}

double log_jacobian(const Eigen::VectorXd& v, Scenario s) {
  if (v.size() != unconstrained_dim(s)) {
    throw std::invalid_argument("log_jacobian: wrong dimension");
  }
  double lj = 0.0;  // identity transforms for v[0], v[4]
  // Simplex sticks: |J| = prod_i z_i (1 - z_i) * (remaining stick length).
  double remaining = 1.0;
  for (int i = 1; i <= 3; ++i) {
    const double z = sigmoid(v[i]);
    lj += std::log(z) + std::log1p(-z) + std::log(remaining);
    remaining *= (1.0 - z);
  }
  for (int i : {5, 6, 7, 8, 9, 10, 11, 14, 15, 16}) {
    lj += scaled_sigmoid_lj(v[i], 0.0, 1.0);
  }
  lj += scaled_sigmoid_lj(v[12], 0.0, kGamma4Hi);
  lj += scaled_sigmoid_lj(v[13], kAUnLo, kAUnHi);
  if (s == Scenario::AGumAnonOnly) lj += scaled_sigmoid_lj(v[17], 0.0, 1.0);
  return lj;
}

std::vector<std::string> param_names(Scenario s) {
  std::vector<std::string> n = {"log_mu_pop", "rho_G", "rho_N", "rho_P", "a_S",
                                "a_H", "a_delta_G", "a_delta_N", "a_delta_P",
                                "gamma1", "gamma2", "gamma3", "gamma4",
                                "a_UN", "a_OP", "p_GM_G", "p_GM_N"};
  if (s == Scenario::AGumAnonOnly) n.push_back("pibar_G_free");
  return n;
}

Eigen::VectorXd param_values(const Params& p, Scenario s) {
  const int extra = s == Scenario::AGumAnonOnly ? 1 : 0;
  Eigen::VectorXd v(17 + extra);
  v << p.log_mu_pop, p.rho_G, p.rho_N, p.rho_P, p.a_S, p.a_H, p.a_delta_G,
      p.a_delta_N, p.a_delta_P, p.gamma1, p.gamma2, p.gamma3, p.gamma4, p.a_UN,
      p.a_OP, p.p_GM_G, p.p_GM_N;
  if (extra) v[17] = p.pibar_G_free;
  return v;
}

std::vector<std::string> output_names(const Options& opt) {
  std::vector<std::string> n = {"pi_UN", "pi_OP", "pi_GA", "pi_GD", "or_GM",
                                "pibar_G", "pibar_N", "delta_G", "delta_N",
                                "pi_G", "pi_N", "pidelta_G", "pidelta_N",
                                "r_G", "r_N", "mu_DG", "mu_DN", "mu_UG", "mu_UN"};
  if (opt.include_pmsm) {
    n.push_back("mu_DP");
    n.push_back("mu_UP");
  }
  n.insert(n.end(), {"mu_U", "mu_D", "mu", "mu_M", "p_H"});
  return n;
}

Eigen::VectorXd output_values(const Outputs& o, const Options& opt) {
  std::vector<double> v = {o.pi_UN, o.pi_OP, o.pi_GA, o.pi_GD, o.or_GM,
                           o.pibar_G, o.pibar_N, o.delta_G, o.delta_N,
                           o.pi_G, o.pi_N, o.pidelta_G, o.pidelta_N,
                           o.r_G, o.r_N, o.mu_DG, o.mu_DN, o.mu_UG, o.mu_UN};
  if (opt.include_pmsm) {
    v.push_back(o.mu_DP);
    v.push_back(o.mu_UP);
  }
  v.insert(v.end(), {o.mu_U, o.mu_D, o.mu, o.mu_M, o.p_H});
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace voisyn::hiv
