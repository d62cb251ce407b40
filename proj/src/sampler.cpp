#include "voisyn/sampler.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace voisyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ChainResult {
  Eigen::MatrixXd draws;  // iterations x columns
  double accept_rate = 0;
};

ChainResult run_one_chain(const Target& target, const ChainConfig& cfg, int chain_index) {
  std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(chain_index) + 1};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int d = target.dim;
  Eigen::VectorXd x;
  double lp = -std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < cfg.max_init_retries; ++attempt) {
    x = target.initial(rng, cfg.init_jitter);
    lp = target.log_density(x);
    if (std::isfinite(lp)) break;
  }
  if (!std::isfinite(lp)) {
    throw std::runtime_error("sampler: no finite log-density start after " +
                             std::to_string(cfg.max_init_retries) + " attempts");
  }

  Eigen::VectorXd log_scale = Eigen::VectorXd::Constant(d, std::log(0.5));

  // Full-covariance adaptation state (optional).
  Eigen::MatrixXd chol;      // lower factor of proposal covariance
  double joint_log_scale = 0;
  bool joint_mode = false;
  std::vector<Eigen::VectorXd> warm_states;

  const int total = cfg.burnin + cfg.iterations * cfg.thin;
  const std::size_t ncols = target.column_names.size();
  Eigen::MatrixXd draws(cfg.iterations, static_cast<Eigen::Index>(ncols));
  int recorded = 0;

  long long accepted = 0, proposed = 0;  // post-burn-in

  Eigen::VectorXd prop = x;
  for (int t = 0; t < total; ++t) {
    const bool adapting = t < cfg.burnin;
    const double gamma = adapting ? std::pow(static_cast<double>(t + 1), -0.6) : 0.0;

    if (cfg.full_cov && adapting && t >= cfg.burnin / 4 && t < (3 * cfg.burnin) / 4) {
      warm_states.push_back(x);
    }
    if (cfg.full_cov && !joint_mode && t == (3 * cfg.burnin) / 4 &&
        warm_states.size() > 10) {
      const auto n = static_cast<Eigen::Index>(warm_states.size());
      Eigen::MatrixXd s(n, d);
      for (Eigen::Index i = 0; i < n; ++i) s.row(i) = warm_states[i].transpose();
      Eigen::RowVectorXd mean = s.colwise().mean();
      s.rowwise() -= mean;
      Eigen::MatrixXd cov = s.transpose() * s / static_cast<double>(n - 1);
      cov.diagonal().array() += 1e-10;
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() == Eigen::Success) {
        chol = llt.matrixL();
        joint_log_scale = std::log(2.38 / std::sqrt(static_cast<double>(d)));
        joint_mode = true;
      }
    }

    for (int j = 0; j < d; ++j) {
      const double old = x[j];
      x[j] = old + std::exp(log_scale[j]) * normal(rng);
      const double lp_new = target.log_density(x);
      double alpha = 0.0;
      if (std::isfinite(lp_new)) alpha = std::min(1.0, std::exp(lp_new - lp));
      if (!adapting) ++proposed;
      if (unif(rng) < alpha) {
        lp = lp_new;
        if (!adapting) ++accepted;
      } else {
        x[j] = old;
      }
      if (adapting) log_scale[j] += gamma * (alpha - cfg.target_accept);
    }
    if (joint_mode) {
      // One correlated jump per sweep; follows ridges the coordinate moves
      // cannot traverse.
      Eigen::VectorXd z(d);
      for (int j = 0; j < d; ++j) z[j] = normal(rng);
      prop = x + std::exp(joint_log_scale) * (chol * z);
      const double lp_new = target.log_density(prop);
      double alpha = 0.0;
      if (std::isfinite(lp_new)) alpha = std::min(1.0, std::exp(lp_new - lp));
      if (!adapting) ++proposed;
      if (unif(rng) < alpha) {
        x = prop;
        lp = lp_new;
        if (!adapting) ++accepted;
      }
      if (adapting) joint_log_scale += gamma * (alpha - 0.234);
    }

    if (!adapting && (t - cfg.burnin) % cfg.thin == 0 && recorded < cfg.iterations) {
      draws.row(recorded++) = target.columns(x).transpose();
    }
  }

  ChainResult r;
  r.draws = std::move(draws);
  r.accept_rate = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed)
                           : kNaN;
  return r;
}

}  // namespace

Diagnostics compute_diagnostics(const std::vector<std::string>& names,
                                const std::vector<Eigen::MatrixXd>& chains) {
  if (chains.empty()) throw std::invalid_argument("diagnostics: no chains");
  const Eigen::Index V = chains[0].cols();
  Diagnostics diag;
  diag.names = names;
  diag.rhat = Eigen::VectorXd::Constant(V, kNaN);
  diag.ess = Eigen::VectorXd::Constant(V, kNaN);

  const bool single = chains.size() < 2;
  if (single) diag.warnings.push_back("single chain: split-Rhat omitted");

  // Split each chain into halves.
  std::vector<Eigen::VectorXd> seqs_template;
  const Eigen::Index L = chains[0].rows() / 2;
  if (L < 2) {
    diag.warnings.push_back("chains too short for diagnostics");
    return diag;
  }

  for (Eigen::Index v = 0; v < V; ++v) {
    std::vector<Eigen::VectorXd> seqs;
    for (const auto& c : chains) {
      const Eigen::Index half = c.rows() / 2;
      seqs.push_back(c.col(v).head(half));
      seqs.push_back(c.col(v).segment(half, half));
    }
    const auto M = static_cast<Eigen::Index>(seqs.size());
    Eigen::VectorXd means(M), vars(M);
    for (Eigen::Index m = 0; m < M; ++m) {
      means[m] = seqs[m].mean();
      vars[m] = (seqs[m].array() - means[m]).square().sum() / static_cast<double>(L - 1);
    }
    const double grand = means.mean();
    const double W = vars.mean();
    const double B = static_cast<double>(L) *
                     (means.array() - grand).square().sum() / static_cast<double>(M - 1);

    if (!single) {
      if (B == 0.0) {
        // No between-sequence spread at all: report exact convergence.
        diag.rhat[v] = 1.0;
      } else if (W > 0.0) {
        const double var_plus =
            (static_cast<double>(L - 1) / static_cast<double>(L)) * W +
            B / static_cast<double>(L);
        diag.rhat[v] = std::sqrt(var_plus / W);
      }
    }

    // Batch-means ESS: tau = b * var(batch means) / var(all).
    const auto b = static_cast<Eigen::Index>(std::max(2.0, std::floor(std::sqrt(L))));
    const Eigen::Index nb = L / b;
    double pooled_var = 0;
    double bm_var = 0;
    Eigen::Index bm_count = 0;
    double total_mean = grand;
    for (Eigen::Index m = 0; m < M; ++m) {
      pooled_var += (seqs[m].array() - total_mean).square().sum();
      for (Eigen::Index k = 0; k < nb; ++k) {
        const double bm = seqs[m].segment(k * b, b).mean();
        bm_var += (bm - total_mean) * (bm - total_mean);
        ++bm_count;
      }
    }
    pooled_var /= static_cast<double>(M * L - 1);
    bm_var /= static_cast<double>(std::max<Eigen::Index>(bm_count - 1, 1));
    const double N = static_cast<double>(M) * static_cast<double>(L);
    if (pooled_var > 0 && bm_var > 0) {
      diag.ess[v] = std::min(N, N * pooled_var / (static_cast<double>(b) * bm_var));
    } else {
      diag.ess[v] = pooled_var == 0 ? 0.0 : N;
    }
  }
  return diag;
}

RunResult run_chains(const Target& target, const ChainConfig& cfg) {
  if (cfg.iterations < 1 || cfg.thin < 1 || cfg.chains < 1) {
    throw std::invalid_argument("run_chains: invalid chain configuration");
  }
  if (!(cfg.target_accept > 0 && cfg.target_accept < 1)) {
    throw std::invalid_argument("run_chains: target_accept outside (0,1)");
  }

  std::vector<ChainResult> results(static_cast<std::size_t>(cfg.chains));
  std::exception_ptr err;
  std::mutex err_mutex;
  const int width = cfg.max_threads > 0 ? std::min(cfg.max_threads, cfg.chains)
                                        : cfg.chains;
  for (int base = 0; base < cfg.chains; base += width) {
    std::vector<std::thread> workers;
    for (int c = base; c < std::min(base + width, cfg.chains); ++c) {
      workers.emplace_back([&, c] {
        try {
          results[static_cast<std::size_t>(c)] = run_one_chain(target, cfg, c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
  }
  if (err) std::rethrow_exception(err);

  std::vector<Eigen::MatrixXd> per_chain;
  per_chain.reserve(results.size());
  for (auto& r : results) per_chain.push_back(std::move(r.draws));

  Diagnostics diag = compute_diagnostics(target.column_names, per_chain);
  for (const auto& r : results) diag.accept_rate.push_back(r.accept_rate);

  const auto ncols = static_cast<Eigen::Index>(target.column_names.size());
  Eigen::MatrixXd pooled(static_cast<Eigen::Index>(cfg.chains) * cfg.iterations, ncols);
  for (int c = 0; c < cfg.chains; ++c) {
    pooled.middleRows(static_cast<Eigen::Index>(c) * cfg.iterations, cfg.iterations) =
        per_chain[static_cast<std::size_t>(c)];
  }

  SampleTable table(target.column_names, std::move(pooled));
  TableMeta meta;
  meta.seed = cfg.seed;
  meta.chains = cfg.chains;
  meta.burnin = cfg.burnin;
  meta.thin = cfg.thin;
  table.meta = meta;
  return {std::move(table), std::move(diag)};
}

Target hiv_target(const hiv::Data& data, hiv::Scenario scenario,
                  const hiv::LikelihoodTerms& terms, const hiv::Options& options) {
  Target t;
  t.dim = hiv::unconstrained_dim(scenario);

  t.column_names = hiv::param_names(scenario);
  const auto outs = hiv::output_names(options);
  t.column_names.insert(t.column_names.end(), outs.begin(), outs.end());

  t.log_density = [data, scenario, terms, options](const Eigen::VectorXd& v) {
    const hiv::Params p = hiv::from_unconstrained(v, scenario);
    const double lp = hiv::log_posterior(p, data, scenario, terms, options);
    if (!std::isfinite(lp)) return lp;
    return lp + hiv::log_jacobian(v, scenario);
  };

  t.columns = [scenario, options](const Eigen::VectorXd& v) {
    const hiv::Params p = hiv::from_unconstrained(v, scenario);
    const hiv::Outputs o = hiv::derived_outputs(p, scenario, options);
    const Eigen::VectorXd pv = hiv::param_values(p, scenario);
    const Eigen::VectorXd ov = hiv::output_values(o, options);
    Eigen::VectorXd row(pv.size() + ov.size());
    row << pv, ov;
    return row;
  };

  const double log_pop_init = std::log(static_cast<double>(data.y_pop) + 1.0);
  t.initial = [scenario, log_pop_init](std::mt19937_64& rng, double jitter) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    hiv::Params p;
    // Bounded founders from their priors; rho from Dirichlet(1,1,1,1).
    double e[4];
    double esum = 0;
    for (double& x : e) esum += (x = expo(rng));
    p.rho_G = e[0] / esum;
    p.rho_N = e[1] / esum;
    p.rho_P = e[2] / esum;
    p.a_H = u01(rng);
    p.a_delta_G = u01(rng);
    p.a_delta_N = u01(rng);
    p.a_delta_P = u01(rng);
    p.gamma1 = u01(rng);
    p.gamma2 = u01(rng);
    p.gamma3 = u01(rng);
    p.gamma4 = 0.15 * u01(rng);
    p.a_UN = std::log(0.5) + std::log(3.0) * u01(rng);
    p.a_OP = u01(rng);
    p.p_GM_G = u01(rng);
    p.p_GM_N = u01(rng);
    p.pibar_G_free = u01(rng);
    // The two unbounded founders start near the data scale instead of their
    // very diffuse priors, which a random-walk sampler cannot traverse.
    p.log_mu_pop = log_pop_init;
    p.a_S = std::log(std::max(1e-6, 1.0 + 0.018 * normal(rng)));
    Eigen::VectorXd v = hiv::to_unconstrained(p, scenario);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += jitter * normal(rng);
    return v;
  };
  return t;
}

}  // namespace voisyn
