#include "voisyn/regress.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace voisyn {

bool HingeTerm::uses_var(int var) const {
  for (const auto& f : factors) {
    if (f.var == var) return true;
  }
  return false;
}

namespace {

Eigen::VectorXd evaluate_term(const HingeTerm& term, const Eigen::MatrixXd& X) {
  Eigen::VectorXd col = Eigen::VectorXd::Ones(X.rows());
  for (const auto& f : term.factors) {
    if (f.sign > 0) {
      col.array() *= (X.col(f.var).array() - f.knot).max(0.0);
    } else {
      col.array() *= (f.knot - X.col(f.var).array()).max(0.0);
    }
  }
  return col;
}

double gcv_score(double rss, long K, int terms, double penalty) {
  const double C = terms + penalty * (terms - 1);
  const double Kd = static_cast<double>(K);
  if (C >= Kd) return std::numeric_limits<double>::infinity();
  const double denom = 1.0 - C / Kd;
  return (rss / Kd) / (denom * denom);
}

// Candidate knots: distinct sorted values, thinned to at most max_knots
// evenly spaced order statistics (endpoints kept).
std::vector<double> knot_candidates(const Eigen::VectorXd& x, int max_knots) {
  std::vector<double> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  const auto n = static_cast<int>(v.size());
  if (n <= max_knots) return v;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(max_knots));
  for (int i = 0; i < max_knots; ++i) {
    const auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * (n - 1) / (max_knots - 1)));
    out.push_back(v[idx]);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct Candidate {
  double gain = -1;
  int parent = -1;
  int var = -1;  // index into active columns
  double knot = 0;
  bool use_plus = false;   // max(0, x - knot) column
  bool use_minus = false;  // max(0, knot - x) column
};

// Deterministic preference for near-equal gains: lower var, then smaller
// knot, then earlier parent.
bool better(const Candidate& a, const Candidate& b) {
  if (b.parent < 0) return true;
  const double tol = 1e-9 * std::max(std::abs(a.gain), std::abs(b.gain));
  if (a.gain > b.gain + tol) return true;
  if (b.gain > a.gain + tol) return false;
  if (a.var != b.var) return a.var < b.var;
  if (a.knot != b.knot) return a.knot < b.knot;
  return a.parent < b.parent;
}

struct ForwardState {
  Eigen::MatrixXd B;  // K x m basis columns
  std::vector<HingeTerm> terms;
  Eigen::MatrixXd gram;
  Eigen::VectorXd bty;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  Eigen::VectorXd coef;
  Eigen::VectorXd resid;
  double rss = 0;

  void refresh(const Eigen::VectorXd& y) {
    gram = B.transpose() * B;
    bty = B.transpose() * y;
    ldlt.compute(gram);
    coef = ldlt.solve(bty);
    resid = y - B * coef;
    rss = resid.squaredNorm();
  }
};

MarsModel fit_polynomial(const Eigen::MatrixXd& Xa, const Eigen::VectorXd& y,
                         const FitConfig& cfg, MarsModel model) {
  const Eigen::Index K = Xa.rows();
  const Eigen::Index p = Xa.cols();

  model.backend = FitConfig::Backend::Polynomial;
  model.center = Xa.colwise().mean();
  model.scale.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt((Xa.col(j).array() - model.center[j]).square().sum() /
                                static_cast<double>(K - 1));
    model.scale[j] = sd > 0 ? sd : 1.0;
  }

  // Monomial exponent tuples with total degree <= 3.
  std::vector<Eigen::VectorXi> expos;
  Eigen::VectorXi e = Eigen::VectorXi::Zero(p);
  std::function<void(Eigen::Index, int)> gen = [&](Eigen::Index j, int budget) {
    if (j == p) {
      expos.push_back(e);
      return;
    }
    for (int d = 0; d <= budget; ++d) {
      e[j] = d;
      gen(j + 1, budget - d);
    }
    e[j] = 0;
  };
  gen(0, 3);
  std::sort(expos.begin(), expos.end(), [](const auto& a, const auto& b) {
    const int sa = a.sum(), sb = b.sum();
    if (sa != sb) return sa < sb;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a[i] != b[i]) return a[i] > b[i];
    }
    return false;
  });

  const auto m = static_cast<Eigen::Index>(expos.size());
  model.poly_exponents.resize(m, p);
  for (Eigen::Index t = 0; t < m; ++t) model.poly_exponents.row(t) = expos[t].transpose();

  Eigen::MatrixXd B(K, m);
  for (Eigen::Index t = 0; t < m; ++t) {
    Eigen::VectorXd col = Eigen::VectorXd::Ones(K);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (int r = 0; r < model.poly_exponents(t, j); ++r) {
        col.array() *= (Xa.col(j).array() - model.center[j]) / model.scale[j];
      }
    }
    B.col(t) = col;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  model.coef = qr.solve(y);
  model.fitted = B * model.coef;
  model.resid = y - model.fitted;
  model.rss = model.resid.squaredNorm();
  model.K = K;
  model.gram = B.transpose() * B;
  model.basis_means = B.colwise().mean();
  model.bty = B.transpose() * y;
  model.yty = y.squaredNorm();
  model.gcv = gcv_score(model.rss, K, static_cast<int>(m), 0.0);
  model.sigma2 = K > m ? model.rss / static_cast<double>(K - m) : 0.0;
  model.basis.assign(static_cast<std::size_t>(m), HingeTerm{});
  return model;
}

}  // namespace

MarsModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitConfig& cfg) {
  const Eigen::Index K = X.rows();
  const Eigen::Index p_in = X.cols();
  if (y.size() != K) throw std::invalid_argument("fit: X and y row counts differ");
  if (p_in < 1) throw std::invalid_argument("fit: need at least one predictor");
  if (K <= 3 * p_in || K < 2) {
    throw std::invalid_argument("fit: insufficient draws (K=" + std::to_string(K) +
                                ", p=" + std::to_string(p_in) + ")");
  }

  MarsModel model;
  model.backend = cfg.backend;
  model.n_predictors = static_cast<int>(p_in);
  model.K = K;

  // Drop constant predictor columns.
  for (Eigen::Index j = 0; j < p_in; ++j) {
    if ((X.col(j).array() != X(0, j)).any()) {
      model.active_columns.push_back(static_cast<int>(j));
    } else {
      model.warnings.push_back("constant predictor column " + std::to_string(j) +
                               " dropped");
    }
  }

  Eigen::MatrixXd Xa(K, static_cast<Eigen::Index>(model.active_columns.size()));
  for (std::size_t j = 0; j < model.active_columns.size(); ++j) {
    Xa.col(static_cast<Eigen::Index>(j)) = X.col(model.active_columns[j]);
  }
  const Eigen::Index p = Xa.cols();

  if (p == 0) {
    // Intercept-only model.
    model.basis = {HingeTerm{}};
    const double mean = y.mean();
    model.coef = Eigen::VectorXd::Constant(1, mean);
    model.fitted = Eigen::VectorXd::Constant(K, mean);
    model.resid = y.array() - mean;
    model.rss = model.resid.squaredNorm();
    model.gram = Eigen::MatrixXd::Constant(1, 1, static_cast<double>(K));
    model.basis_means = Eigen::VectorXd::Ones(1);
    model.bty = Eigen::VectorXd::Constant(1, y.sum());
    model.yty = y.squaredNorm();
    model.gcv = gcv_score(model.rss, K, 1, cfg.gcv_penalty);
    model.sigma2 = model.rss / static_cast<double>(K - 1);
    model.warnings.push_back("all predictors constant: intercept-only model");
    return model;
  }

  if (cfg.backend == FitConfig::Backend::Polynomial || (p == 1 && K < 500)) {
    return fit_polynomial(Xa, y, cfg, std::move(model));
  }

  int max_terms = cfg.max_terms;
  if (10 * max_terms >= K) {
    max_terms = std::max(3, static_cast<int>(K / 10));
    model.warnings.push_back("max_terms reduced to " + std::to_string(max_terms) +
                             " for small K");
  }

  // Per-predictor sorted row order (descending) and knot candidates.
  std::vector<std::vector<Eigen::Index>> order_desc(static_cast<std::size_t>(p));
  std::vector<std::vector<double>> knots(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    auto& ord = order_desc[static_cast<std::size_t>(j)];
    ord.resize(static_cast<std::size_t>(K));
    for (Eigen::Index i = 0; i < K; ++i) ord[static_cast<std::size_t>(i)] = i;
    std::stable_sort(ord.begin(), ord.end(), [&](Eigen::Index a, Eigen::Index b) {
      return Xa(a, j) > Xa(b, j);
    });
    knots[static_cast<std::size_t>(j)] = knot_candidates(Xa.col(j), cfg.max_knots);
  }

  ForwardState st;
  st.B = Eigen::MatrixXd::Ones(K, 1);
  st.terms = {HingeTerm{}};
  st.refresh(y);

  const double yty = y.squaredNorm();
  const double rss_floor = 1e-12 * std::max(yty, 1.0);

  while (st.terms.size() < static_cast<std::size_t>(max_terms) && st.rss > rss_floor) {
    const int slots = max_terms - static_cast<int>(st.terms.size());
    const bool allow_pair = slots >= 2;
    const auto m = static_cast<Eigen::Index>(st.terms.size());

    Candidate best;
    for (Eigen::Index parent = 0; parent < m; ++parent) {
      if (st.terms[static_cast<std::size_t>(parent)].degree() >= cfg.max_degree) continue;
      const Eigen::VectorXd h = st.B.col(parent);
      const double hth = h.squaredNorm();
      if (hth <= 0) continue;

      for (Eigen::Index j = 0; j < p; ++j) {
        if (st.terms[static_cast<std::size_t>(parent)].uses_var(static_cast<int>(j)))
          continue;
        const Eigen::VectorXd x = Xa.col(j);
        const Eigen::VectorXd hx = h.cwiseProduct(x);

        // Fixed inner products for this (parent, predictor).
        const Eigen::VectorXd Bth = st.B.transpose() * h;
        const Eigen::VectorXd Bthx = st.B.transpose() * hx;
        const double yth = y.dot(h);
        const double ythx = y.dot(hx);
        const double hthx = h.dot(hx);
        const double hxthx = hx.squaredNorm();

        // Running sums over the active set {i : x_i > t}.
        Eigen::VectorXd S_B = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd S_Bx = Eigen::VectorXd::Zero(m);
        double S_y = 0, S_yx = 0, S_hh = 0, S_hhx = 0, S_hhxx = 0;

        const auto& ord = order_desc[static_cast<std::size_t>(j)];
        const auto& ks = knots[static_cast<std::size_t>(j)];
        std::size_t idx = 0;

        for (auto kit = ks.rbegin(); kit != ks.rend(); ++kit) {
          const double t = *kit;
          while (idx < ord.size() && Xa(ord[idx], j) > t) {
            const Eigen::Index i = ord[idx];
            const double hi = h[i];
            if (hi != 0.0) {
              const double xi = x[i];
              S_B.noalias() += hi * st.B.row(i).transpose();
              S_Bx.noalias() += hi * xi * st.B.row(i).transpose();
              S_y += hi * y[i];
              S_yx += hi * xi * y[i];
              S_hh += hi * hi;
              S_hhx += hi * hi * xi;
              S_hhxx += hi * hi * xi * xi;
            }
            ++idx;
          }

          // Plus column c1 = h .* max(0, x - t).
          const Eigen::VectorXd u1 = S_Bx - t * S_B;
          const double yc1 = S_yx - t * S_y;
          const double c1c1 = S_hhxx - 2 * t * S_hhx + t * t * S_hh;
          const double hc1 = S_hhx - t * S_hh;
          const double hxc1 = S_hhxx - t * S_hhx;
          // Minus column c2 = t*h - h.*x + c1.
          const Eigen::VectorXd u2 = t * Bth - Bthx + u1;
          const double yc2 = t * yth - ythx + yc1;
          const double c2c2 = t * t * hth + hxthx + c1c1 - 2 * t * hthx +
                              2 * t * hc1 - 2 * hxc1;
          const double c1c2 = t * hc1 - hxc1 + c1c1;

          const Eigen::VectorXd g1 = st.ldlt.solve(u1);
          const Eigen::VectorXd g2 = st.ldlt.solve(u2);
          const double v1 = yc1 - u1.dot(st.coef);
          const double v2 = yc2 - u2.dot(st.coef);
          const double M11 = c1c1 - u1.dot(g1);
          const double M22 = c2c2 - u2.dot(g2);
          const double M12 = c1c2 - u1.dot(g2);

          const double tol1 = 1e-9 * std::max(c1c1, rss_floor);
          const double tol2 = 1e-9 * std::max(c2c2, rss_floor);
          const bool ok1 = M11 > tol1;
          const bool ok2 = M22 > tol2;

          Candidate cand;
          cand.parent = static_cast<int>(parent);
          cand.var = static_cast<int>(j);
          cand.knot = t;
          if (allow_pair && ok1 && ok2) {
            const double det = M11 * M22 - M12 * M12;
            if (det > 1e-12 * M11 * M22) {
              cand.gain = (v1 * v1 * M22 - 2 * v1 * v2 * M12 + v2 * v2 * M11) / det;
              cand.use_plus = cand.use_minus = true;
            }
          }
          if (ok1) {
            const double g = v1 * v1 / M11;
            if (g > cand.gain) {
              cand.gain = g;
              cand.use_plus = true;
              cand.use_minus = false;
            }
          }
          if (ok2) {
            const double g = v2 * v2 / M22;
            if (g > cand.gain) {
              cand.gain = g;
              cand.use_plus = false;
              cand.use_minus = true;
            }
          }
          if (cand.gain > 0 && better(cand, best)) best = cand;
        }
      }
    }

    if (best.parent < 0 || best.gain < cfg.forward_threshold * st.rss) break;

    const HingeTerm& parent_term = st.terms[static_cast<std::size_t>(best.parent)];
    std::vector<std::pair<HingeTerm, Eigen::VectorXd>> added;
    for (int sign : {+1, -1}) {
      if ((sign > 0 && !best.use_plus) || (sign < 0 && !best.use_minus)) continue;
      HingeTerm term = parent_term;
      term.factors.push_back({best.var, best.knot, sign});
      added.emplace_back(term, evaluate_term(term, Xa));
    }
    for (auto& [term, col] : added) {
      st.B.conservativeResize(Eigen::NoChange, st.B.cols() + 1);
      st.B.col(st.B.cols() - 1) = col;
      st.terms.push_back(term);
    }
    const double prev_rss = st.rss;
    st.refresh(y);
    // Rank check: a term whose addition did not change RSS and whose pivot
    // collapsed is linearly dependent; drop it.
    if (!(st.rss <= prev_rss + 1e-9 * std::max(prev_rss, 1.0))) {
      // Numerical trouble; undo this step and stop the forward pass.
      const auto keep = st.B.cols() - static_cast<Eigen::Index>(added.size());
      st.B.conservativeResize(Eigen::NoChange, keep);
      st.terms.resize(static_cast<std::size_t>(keep));
      st.refresh(y);
      model.warnings.push_back("forward pass stopped on ill-conditioned basis");
      break;
    }
  }

  // Backward pruning by GCV over nested subsets; intercept never pruned.
  const auto m_full = static_cast<int>(st.terms.size());
  const Eigen::MatrixXd gram_full = st.B.transpose() * st.B;
  const Eigen::VectorXd bty_full = st.B.transpose() * y;

  auto subset_rss = [&](const std::vector<int>& subset) {
    const auto ms = static_cast<Eigen::Index>(subset.size());
    Eigen::MatrixXd G(ms, ms);
    Eigen::VectorXd b(ms);
    for (Eigen::Index a = 0; a < ms; ++a) {
      b[a] = bty_full[subset[static_cast<std::size_t>(a)]];
      for (Eigen::Index c = 0; c < ms; ++c) {
        G(a, c) = gram_full(subset[static_cast<std::size_t>(a)],
                            subset[static_cast<std::size_t>(c)]);
      }
    }
    const Eigen::VectorXd beta = G.ldlt().solve(b);
    return std::max(0.0, yty - beta.dot(b));
  };

  std::vector<int> current(static_cast<std::size_t>(m_full));
  for (int i = 0; i < m_full; ++i) current[static_cast<std::size_t>(i)] = i;
  std::vector<int> best_subset = current;
  double best_gcv = gcv_score(st.rss, K, m_full, cfg.gcv_penalty);

  while (current.size() > 1) {
    double step_best_gcv = std::numeric_limits<double>::infinity();
    std::size_t step_best_drop = 0;
    for (std::size_t drop = 1; drop < current.size(); ++drop) {
      std::vector<int> trial = current;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(drop));
      const double rss = subset_rss(trial);
      const double g = gcv_score(rss, K, static_cast<int>(trial.size()), cfg.gcv_penalty);
      if (g < step_best_gcv) {
        step_best_gcv = g;
        step_best_drop = drop;
      }
    }
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(step_best_drop));
    if (step_best_gcv < best_gcv) {
      best_gcv = step_best_gcv;
      best_subset = current;
    }
  }

  // Final refit on the GCV-minimal subset.
  auto mf = static_cast<Eigen::Index>(best_subset.size());
  Eigen::MatrixXd Bf(K, mf);
  model.basis.clear();
  for (Eigen::Index a = 0; a < mf; ++a) {
    Bf.col(a) = st.B.col(best_subset[static_cast<std::size_t>(a)]);
    model.basis.push_back(st.terms[static_cast<std::size_t>(
        best_subset[static_cast<std::size_t>(a)])]);
  }

  // Drop linearly dependent columns (intercept always kept) so the final
  // Gram matrix stays positive definite for coefficient simulation.
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Bf);
    if (qr.rank() < mf) {
      const auto& perm = qr.colsPermutation().indices();
      std::vector<Eigen::Index> keep;
      for (Eigen::Index a = 0; a < qr.rank(); ++a) keep.push_back(perm[a]);
      if (std::find(keep.begin(), keep.end(), 0) == keep.end()) keep.push_back(0);
      std::sort(keep.begin(), keep.end());
      Eigen::MatrixXd Bk(K, static_cast<Eigen::Index>(keep.size()));
      std::vector<HingeTerm> basis_k;
      for (std::size_t a = 0; a < keep.size(); ++a) {
        Bk.col(static_cast<Eigen::Index>(a)) = Bf.col(keep[a]);
        basis_k.push_back(model.basis[static_cast<std::size_t>(keep[a])]);
      }
      model.warnings.push_back("rank-deficient basis: dropped " +
                               std::to_string(mf - static_cast<Eigen::Index>(keep.size())) +
                               " dependent term(s)");
      Bf = std::move(Bk);
      model.basis = std::move(basis_k);
      mf = Bf.cols();
    }
  }
  model.gram = Bf.transpose() * Bf;
  model.bty = Bf.transpose() * y;
  model.coef = model.gram.ldlt().solve(model.bty);
  model.fitted = Bf * model.coef;
  model.resid = y - model.fitted;
  model.rss = model.resid.squaredNorm();
  model.yty = yty;
  model.basis_means = Bf.colwise().mean();
  model.gcv = gcv_score(model.rss, K, static_cast<int>(mf), cfg.gcv_penalty);
  model.sigma2 = K > mf ? model.rss / static_cast<double>(K - mf) : 0.0;
  return model;
}

Eigen::MatrixXd evaluate_basis(const MarsModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.n_predictors) {
    throw std::invalid_argument("predict: expected " +
                                std::to_string(model.n_predictors) + " columns, got " +
                                std::to_string(X.cols()));
  }
  Eigen::MatrixXd Xa(X.rows(), static_cast<Eigen::Index>(model.active_columns.size()));
  for (std::size_t j = 0; j < model.active_columns.size(); ++j) {
    Xa.col(static_cast<Eigen::Index>(j)) = X.col(model.active_columns[j]);
  }

  const auto m = static_cast<Eigen::Index>(model.basis.size());
  Eigen::MatrixXd B(X.rows(), m);
  if (model.backend == FitConfig::Backend::Polynomial && model.poly_exponents.size()) {
    for (Eigen::Index t = 0; t < m; ++t) {
      Eigen::VectorXd col = Eigen::VectorXd::Ones(X.rows());
      for (Eigen::Index j = 0; j < Xa.cols(); ++j) {
        for (int r = 0; r < model.poly_exponents(t, j); ++r) {
          col.array() *= (Xa.col(j).array() - model.center[j]) / model.scale[j];
        }
      }
      B.col(t) = col;
    }
  } else {
    for (Eigen::Index t = 0; t < m; ++t) {
      B.col(t) = evaluate_term(model.basis[static_cast<std::size_t>(t)], Xa);
    }
  }
  return B;
}

Eigen::VectorXd predict(const MarsModel& model, const Eigen::MatrixXd& X) {
  return evaluate_basis(model, X) * model.coef;
}

Eigen::MatrixXd coefficient_draws(const MarsModel& model, int n_draws,
                                  std::uint64_t seed) {
  const auto m = static_cast<Eigen::Index>(model.basis.size());
  Eigen::LLT<Eigen::MatrixXd> llt(model.gram);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("coefficient_draws: singular Gram matrix");
  }
  Eigen::MatrixXd out(n_draws, m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = std::sqrt(std::max(0.0, model.sigma2));
  for (int i = 0; i < n_draws; ++i) {
    Eigen::VectorXd z(m);
    for (Eigen::Index j = 0; j < m; ++j) z[j] = normal(rng);
    // cov = sigma2 * (B'B)^-1 = sigma2 * L^-T L^-1; sample L^-T z.
    const Eigen::VectorXd delta =
        llt.matrixU().solve(z);
    out.row(i) = (model.coef + sigma * delta).transpose();
  }
  return out;
}

void dump_model_json(const MarsModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["backend"] = model.backend == FitConfig::Backend::Polynomial ? "polynomial" : "mars";
  j["gcv"] = model.gcv;
  j["rss"] = model.rss;
  j["terms"] = nlohmann::json::array();
  for (std::size_t t = 0; t < model.basis.size(); ++t) {
    nlohmann::json term;
    term["coefficient"] = model.coef[static_cast<Eigen::Index>(t)];
    term["factors"] = nlohmann::json::array();
    for (const auto& f : model.basis[t].factors) {
      term["factors"].push_back({{"var", f.var}, {"knot", f.knot}, {"sign", f.sign}});
    }
    j["terms"].push_back(term);
  }
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

}  // namespace voisyn
