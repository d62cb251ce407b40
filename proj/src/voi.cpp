#include "voisyn/voi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace voisyn {

LossSpec LossSpec::scalar_quadratic(std::string output) {
  LossSpec l;
  l.kind = Kind::ScalarQuadratic;
  l.outputs = {std::move(output)};
  return l;
}

LossSpec LossSpec::weighted_A(std::vector<std::string> outputs, Eigen::VectorXd weights) {
  LossSpec l;
  l.kind = Kind::WeightedA;
  l.outputs = std::move(outputs);
  l.weights = std::move(weights);
  return l;
}

LossSpec LossSpec::trace_A(std::vector<std::string> outputs) {
  LossSpec l;
  l.kind = Kind::TraceA;
  l.outputs = std::move(outputs);
  return l;
}

LossSpec LossSpec::d_criterion(std::vector<std::string> outputs, bool standardized) {
  LossSpec l;
  l.kind = Kind::DCriterion;
  l.outputs = std::move(outputs);
  l.standardized = standardized;
  return l;
}

LossSpec LossSpec::finite_action(std::vector<std::string> loss_columns) {
  LossSpec l;
  l.kind = Kind::FiniteAction;
  l.outputs = std::move(loss_columns);
  return l;
}

namespace {

void validate_loss(const SampleTable& table, const LossSpec& loss) {
  if (loss.outputs.empty()) throw std::invalid_argument("loss: no output columns");
  for (const auto& o : loss.outputs) {
    if (!table.has(o)) throw std::invalid_argument("loss: unknown column '" + o + "'");
  }
  if (loss.kind == LossSpec::Kind::ScalarQuadratic && loss.outputs.size() != 1) {
    throw std::invalid_argument("scalar_quadratic loss needs exactly one output");
  }
  if (loss.kind == LossSpec::Kind::WeightedA &&
      loss.weights.size() != static_cast<Eigen::Index>(loss.outputs.size())) {
    throw std::invalid_argument("weighted_A: weight vector length mismatch");
  }
  if (table.rows() < 2) throw std::invalid_argument("loss: need at least 2 draws");
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& cols) {
  Eigen::MatrixXd c = cols.rowwise() - cols.colwise().mean();
  return c.transpose() * c / static_cast<double>(cols.rows() - 1);
}

// Quadratic loss functionals of a covariance matrix.  The matrix is
// symmetrized and eigen-floored at zero for the determinant.
double loss_of_cov(const Eigen::MatrixXd& cov, const LossSpec& loss,
                   std::vector<std::string>* warnings) {
  switch (loss.kind) {
    case LossSpec::Kind::ScalarQuadratic:
      return cov(0, 0);
    case LossSpec::Kind::WeightedA:
      return loss.weights.dot(cov * loss.weights);
    case LossSpec::Kind::TraceA:
      return cov.trace();
    case LossSpec::Kind::DCriterion: {
      const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
      const double ev_max = es.eigenvalues().cwiseAbs().maxCoeff();
      double det = 1.0;
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double ev = es.eigenvalues()[i];
        if (ev < 0) {
          if (warnings && ev < -1e-12 * ev_max) {
            warnings->push_back("covariance not PSD: eigenvalue floored at 0");
          }
          det = 0.0;  // floored eigenvalue zeroes the determinant
          break;
        }
        det *= ev;
      }
      if (loss.standardized) {
        det = std::pow(det, 1.0 / static_cast<double>(cov.rows()));
      }
      return det;
    }
    case LossSpec::Kind::FiniteAction:
      throw std::logic_error("finite_action loss has no covariance form");
  }
  return 0;
}

Eigen::MatrixXd output_matrix(const SampleTable& table, const LossSpec& loss) {
  Eigen::MatrixXd m(table.rows(), static_cast<Eigen::Index>(loss.outputs.size()));
  for (std::size_t j = 0; j < loss.outputs.size(); ++j) {
    m.col(static_cast<Eigen::Index>(j)) = table.col(loss.outputs[j]);
  }
  return m;
}

// Variance of B*beta from basis summary statistics, (K-1) denominator.
double fitted_variance(const MarsModel& model, const Eigen::VectorXd& beta) {
  const double Kd = static_cast<double>(model.K);
  const double quad = beta.dot(model.gram * beta);
  const double mean = model.basis_means.dot(beta);
  return (quad - Kd * mean * mean) / (Kd - 1.0);
}

}  // namespace

double expected_loss(const SampleTable& table, const LossSpec& loss) {
  validate_loss(table, loss);
  if (loss.kind == LossSpec::Kind::FiniteAction) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : loss.outputs) best = std::min(best, table.col(o).mean());
    return best;
  }
  // Per-column variances go through sample_variance so that trace_A is the
  // exact floating-point sum of the scalar_quadratic baselines.
  if (loss.kind == LossSpec::Kind::ScalarQuadratic) {
    return sample_variance(table.col(loss.outputs[0]));
  }
  if (loss.kind == LossSpec::Kind::TraceA) {
    double total = 0.0;
    for (const auto& o : loss.outputs) total += sample_variance(table.col(o));
    return total;
  }
  return loss_of_cov(covariance(output_matrix(table, loss)), loss, nullptr);
}

VoiEstimate evpi(const SampleTable& table, const LossSpec& loss) {
  validate_loss(table, loss);
  VoiEstimate est;
  est.K_used = table.rows();
  est.baseline = expected_loss(table, loss);
  if (loss.kind == LossSpec::Kind::FiniteAction) {
    // Averaging the per-row regrets (best fixed action minus row minimum)
    // rather than differencing two means keeps the value exactly invariant
    // under a common shift of all loss columns.
    const Eigen::MatrixXd a = output_matrix(table, loss);
    Eigen::Index dstar = 0;
    double best = a.col(0).mean();
    for (Eigen::Index d = 1; d < a.cols(); ++d) {
      const double m = a.col(d).mean();
      if (m < best) {
        best = m;
        dstar = d;
      }
    }
    est.value = (a.col(dstar) - a.rowwise().minCoeff()).mean();
  } else {
    // Quadratic losses vanish under perfect information.
    est.value = est.baseline;
  }
  est.se = 0.0;
  if (est.baseline != 0) est.proportion = est.value / est.baseline;
  return est;
}

namespace {

struct FittedOutputs {
  std::vector<MarsModel> models;           // one per output column
  std::vector<Eigen::MatrixXd> bases;      // cached basis matrices
  Eigen::MatrixXd X;
};

FittedOutputs fit_outputs(const SampleTable& table, const std::vector<std::string>& inputs,
                          const std::vector<std::string>& outputs,
                          const FitConfig& cfg, std::vector<std::string>* warnings) {
  FittedOutputs f;
  f.X.resize(table.rows(), static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    f.X.col(static_cast<Eigen::Index>(j)) = table.col(inputs[j]);
  }
  for (const auto& out : outputs) {
    MarsModel m = fit(f.X, table.col(out), cfg);
    if (warnings) {
      for (const auto& w : m.warnings) warnings->push_back(out + ": " + w);
    }
    f.bases.push_back(evaluate_basis(m, f.X));
    f.models.push_back(std::move(m));
  }
  return f;
}

}  // namespace

VoiEstimate evppi(const SampleTable& table, const std::vector<std::string>& inputs,
                  const LossSpec& loss, const EvppiOptions& options) {
  validate_loss(table, loss);
  if (inputs.empty()) throw std::invalid_argument("evppi: no input columns");
  for (const auto& in : inputs) {
    if (!table.has(in)) throw std::invalid_argument("evppi: unknown input '" + in + "'");
    for (const auto& out : loss.outputs) {
      if (in == out && loss.kind != LossSpec::Kind::ScalarQuadratic) {
        throw std::invalid_argument("evppi: input '" + in + "' is also an output");
      }
    }
  }

  VoiEstimate est;
  est.K_used = table.rows();
  est.baseline = expected_loss(table, loss);
  if (inputs.size() > 4 && options.fit.backend == FitConfig::Backend::Mars) {
    est.warnings.push_back("more than 4 predictors: MARS defaults may underfit");
  }

  FittedOutputs f = fit_outputs(table, inputs, loss.outputs, options.fit, &est.warnings);
  const double Km1 = static_cast<double>(table.rows() - 1);

  if (loss.kind == LossSpec::Kind::ScalarQuadratic) {
    const MarsModel& m = f.models[0];
    const double v_fitted = sample_variance(m.fitted);
    const double v_resid = est.baseline - m.rss / Km1;
    if (est.baseline > 0 &&
        std::abs(v_fitted - v_resid) > 0.01 * est.baseline) {
      est.warnings.push_back("estimator mismatch: var(fitted) vs baseline-residual "
                             "differ by more than 1%");
    }
    est.value = v_fitted;
    if (options.compute_se && options.se_draws > 0) {
      const Eigen::MatrixXd draws =
          coefficient_draws(m, options.se_draws, options.se_seed);
      Eigen::VectorXd vals(draws.rows());
      for (Eigen::Index i = 0; i < draws.rows(); ++i) {
        vals[i] = fitted_variance(m, draws.row(i).transpose());
      }
      est.se = draws.rows() > 1 ? std::sqrt(sample_variance(vals)) : 0.0;
    }
  } else if (loss.kind == LossSpec::Kind::FiniteAction) {
    const auto S = static_cast<Eigen::Index>(loss.outputs.size());
    Eigen::MatrixXd fitted(table.rows(), S);
    for (Eigen::Index s = 0; s < S; ++s) fitted.col(s) = f.models[static_cast<std::size_t>(s)].fitted;
    est.value = est.baseline - fitted.rowwise().minCoeff().mean();
    if (options.compute_se && options.se_draws > 0) {
      std::vector<Eigen::MatrixXd> draws;
      for (Eigen::Index s = 0; s < S; ++s) {
        draws.push_back(coefficient_draws(f.models[static_cast<std::size_t>(s)],
                                          options.se_draws,
                                          options.se_seed + static_cast<std::uint64_t>(s)));
      }
      Eigen::VectorXd vals(options.se_draws);
      Eigen::MatrixXd rep(table.rows(), S);
      for (int r = 0; r < options.se_draws; ++r) {
        for (Eigen::Index s = 0; s < S; ++s) {
          rep.col(s) = f.bases[static_cast<std::size_t>(s)] *
                       draws[static_cast<std::size_t>(s)].row(r).transpose();
        }
        vals[r] = est.baseline - rep.rowwise().minCoeff().mean();
      }
      est.se = options.se_draws > 1 ? std::sqrt(sample_variance(vals)) : 0.0;
    }
  } else {
    // Covariance-functional losses: residual covariance across outputs.
    const auto S = static_cast<Eigen::Index>(loss.outputs.size());
    Eigen::MatrixXd resid(table.rows(), S);
    for (Eigen::Index s = 0; s < S; ++s) resid.col(s) = f.models[static_cast<std::size_t>(s)].resid;
    est.value = est.baseline - loss_of_cov(covariance(resid), loss, &est.warnings);

    if (options.compute_se && options.se_draws > 0) {
      // Centered cross-statistics let each replicate's residual covariance
      // be formed in O(terms^2).
      Eigen::MatrixXd Y = output_matrix(table, loss);
      Eigen::MatrixXd Yc = Y.rowwise() - Y.colwise().mean();
      std::vector<Eigen::MatrixXd> Bc;
      for (Eigen::Index s = 0; s < S; ++s) {
        const Eigen::MatrixXd& B = f.bases[static_cast<std::size_t>(s)];
        Bc.push_back(B.rowwise() - B.colwise().mean());
      }
      const Eigen::MatrixXd Cyy = Yc.transpose() * Yc / Km1;
      std::vector<std::vector<Eigen::VectorXd>> CyB(static_cast<std::size_t>(S));
      std::vector<std::vector<Eigen::MatrixXd>> CBB(static_cast<std::size_t>(S));
      for (Eigen::Index s = 0; s < S; ++s) {
        for (Eigen::Index t = 0; t < S; ++t) {
          CyB[static_cast<std::size_t>(s)].push_back(
              Bc[static_cast<std::size_t>(t)].transpose() * Yc.col(s) / Km1);
          CBB[static_cast<std::size_t>(s)].push_back(
              Bc[static_cast<std::size_t>(s)].transpose() *
              Bc[static_cast<std::size_t>(t)] / Km1);
        }
      }
      std::vector<Eigen::MatrixXd> draws;
      for (Eigen::Index s = 0; s < S; ++s) {
        draws.push_back(coefficient_draws(f.models[static_cast<std::size_t>(s)],
                                          options.se_draws,
                                          options.se_seed + static_cast<std::uint64_t>(s)));
      }
      Eigen::VectorXd vals(options.se_draws);
      for (int r = 0; r < options.se_draws; ++r) {
        Eigen::MatrixXd cov(S, S);
        for (Eigen::Index s = 0; s < S; ++s) {
          const Eigen::VectorXd bs = draws[static_cast<std::size_t>(s)].row(r).transpose();
          for (Eigen::Index t = s; t < S; ++t) {
            const Eigen::VectorXd bt = draws[static_cast<std::size_t>(t)].row(r).transpose();
            const double c = Cyy(s, t) -
                             CyB[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)].dot(bt) -
                             CyB[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)].dot(bs) +
                             bs.dot(CBB[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] * bt);
            cov(s, t) = cov(t, s) = c;
          }
        }
        vals[r] = est.baseline - loss_of_cov(cov, loss, nullptr);
      }
      est.se = options.se_draws > 1 ? std::sqrt(sample_variance(vals)) : 0.0;
    }
  }

  if (est.baseline != 0) est.proportion = est.value / est.baseline;
  return est;
}

GridResult evppi_grid(const SampleTable& table, const std::vector<InputGroup>& groups,
                      const std::vector<std::string>& outputs,
                      const EvppiOptions& options) {
  GridResult grid;
  grid.groups = groups;
  grid.outputs = outputs;
  grid.cells.resize(groups.size());
  for (std::size_t r = 0; r < groups.size(); ++r) {
    grid.cells[r].resize(outputs.size());
    for (std::size_t c = 0; c < outputs.size(); ++c) {
      GridCell& cell = grid.cells[r][c];
      try {
        cell.estimate = evppi(table, groups[r].columns,
                              LossSpec::scalar_quadratic(outputs[c]), options);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  }
  return grid;
}

void write_grid_csv(const GridResult& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "input_group";
  for (const auto& o : grid.outputs) out << ',' << o;
  out << '\n';
  for (std::size_t r = 0; r < grid.groups.size(); ++r) {
    out << grid.groups[r].name;
    for (std::size_t c = 0; c < grid.outputs.size(); ++c) {
      out << ',';
      if (grid.cells[r][c].estimate) {
        out << format_double(grid.cells[r][c].estimate->proportion);
      } else {
        out << "failed";
      }
    }
    out << '\n';
  }
}

VoiEstimate evsi(const SampleTable& table_with_statistics,
                 const std::vector<std::string>& statistic_names, const LossSpec& loss,
                 const EvppiOptions& options) {
  return evppi(table_with_statistics, statistic_names, loss, options);
}

std::vector<CurvePoint> evsi_curve(const DesignSpec& design_template,
                                   const std::vector<long>& n_grid,
                                   const SampleTable& table, const LossSpec& loss,
                                   const EvppiOptions& options) {
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("evsi_curve: n grid must be strictly increasing");
    }
  }
  std::vector<CurvePoint> curve;
  for (long n : n_grid) {
    CurvePoint pt;
    pt.n = n;
    try {
      DesignSpec d = design_template;
      d.n = n;
      const SampleTable stats = simulate_statistics(d, table);
      const SampleTable joined = table.with_columns(stats);
      pt.estimate = evsi(joined, stats.names(), loss, options);
      pt.remaining = pt.estimate.baseline - pt.estimate.value;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    curve.push_back(std::move(pt));
  }
  return curve;
}

void write_curve_csv(const std::vector<CurvePoint>& curve,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "n,evsi,remaining_variance,se\n";
  for (const auto& pt : curve) {
    out << pt.n << ',';
    if (pt.error.empty()) {
      out << format_double(pt.estimate.value) << ',' << format_double(pt.remaining)
          << ',' << format_double(pt.estimate.se);
    } else {
      out << "failed,failed,failed";
    }
    out << '\n';
  }
}

EnbsResult enbs(const std::vector<CurvePoint>& curve, double fixed_cost,
                double per_unit_cost) {
  EnbsResult res;
  double best_net = -std::numeric_limits<double>::infinity();
  for (const auto& pt : curve) {
    if (!pt.error.empty()) continue;
    EnbsRow row;
    row.n = pt.n;
    row.value = pt.estimate.value;
    row.cost = fixed_cost + per_unit_cost * static_cast<double>(pt.n);
    row.net = row.value - row.cost;
    res.rows.push_back(row);
    if (row.net > best_net) {
      best_net = row.net;
      res.optimal_n = row.n;
    }
  }
  if (res.rows.empty() || best_net < 0) {
    res.optimal_n = 0;
    res.do_not_sample = true;
  }
  return res;
}

void write_enbs_csv(const EnbsResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "n,evsi,cost,net_benefit\n";
  for (const auto& r : result.rows) {
    out << r.n << ',' << format_double(r.value) << ',' << format_double(r.cost) << ','
        << format_double(r.net) << '\n';
  }
  out << "# optimal_n," << result.optimal_n
      << (result.do_not_sample ? ",do_not_sample" : ",sample") << '\n';
}

}  // namespace voisyn
