#include "voisyn/designs.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace voisyn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 row_rng(std::uint64_t seed, Eigen::Index row, int kind) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ static_cast<std::uint64_t>(row));
  k = splitmix64(k ^ static_cast<std::uint64_t>(kind) << 32);
  return std::mt19937_64(k);
}

long long draw_binomial(std::mt19937_64& rng, long long n, double p) {
  if (n <= 0) return 0;
  p = std::clamp(p, 0.0, 1.0);
  std::binomial_distribution<long long> dist(n, p);
  return dist(rng);
}

double odds(double p) { return p / (1.0 - p); }

void require_column(const SampleTable& t, const std::string& name) {
  if (!t.has(name)) {
    throw std::invalid_argument("simulate_statistics: missing parameter column '" +
                                name + "'");
  }
}

}  // namespace

std::string DesignSpec::statistic_name() const {
  switch (kind) {
    case Kind::GumAnonAddOn: return "T_gumanon";
    case Kind::GmshsAddOn: return "T_gmshs";
    case Kind::BinomialOn: return "T_" + parameter;
  }
  return "T";
}

DesignSpec DesignSpec::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  DesignSpec d;
  const std::string kind = j.at("kind");
  if (kind == "gumanon") {
    d.kind = Kind::GumAnonAddOn;
  } else if (kind == "gmshs") {
    d.kind = Kind::GmshsAddOn;
  } else if (kind == "binomial") {
    d.kind = Kind::BinomialOn;
    d.parameter = j.at("parameter");
  } else {
    throw std::invalid_argument("unknown design kind '" + kind + "'");
  }
  d.n = j.at("n");
  d.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("fixed_split")) d.fixed_split = j["fixed_split"].get<double>();
  if (d.n < 0) throw std::invalid_argument("design: n must be nonnegative");
  return d;
}

SampleTable simulate_statistics(const DesignSpec& design, const SampleTable& table) {
  if (design.n < 0) throw std::invalid_argument("simulate_statistics: n < 0");
  const Eigen::Index K = table.rows();
  Eigen::MatrixXd col(K, 1);

  if (design.n == 0) {
    // Prior-flat placeholder: a constant statistic carries no information.
    col.setConstant(0.5);
    return SampleTable({design.statistic_name()}, std::move(col));
  }

  const int kind_id = static_cast<int>(design.kind);
  switch (design.kind) {
    case DesignSpec::Kind::GumAnonAddOn: {
      require_column(table, "pi_GA");
      const Eigen::VectorXd pi_ga = table.col("pi_GA");
      for (Eigen::Index i = 0; i < K; ++i) {
        auto rng = row_rng(design.seed, i, kind_id);
        const long long y = draw_binomial(rng, design.n, pi_ga[i]);
        col(i, 0) = static_cast<double>(y) / static_cast<double>(design.n);
      }
      break;
    }
    case DesignSpec::Kind::GmshsAddOn: {
      require_column(table, "p_GM_G");
      require_column(table, "p_GM_N");
      Eigen::VectorXd q;
      if (design.fixed_split) {
        q = Eigen::VectorXd::Constant(K, *design.fixed_split);
      } else {
        require_column(table, "rho_G");
        require_column(table, "rho_N");
        const Eigen::VectorXd rho_g = table.col("rho_G");
        const Eigen::VectorXd rho_n = table.col("rho_N");
        q = rho_g.array() / (rho_g.array() + rho_n.array());
      }
      const Eigen::VectorXd pg = table.col("p_GM_G");
      const Eigen::VectorXd pn = table.col("p_GM_N");
      for (Eigen::Index i = 0; i < K; ++i) {
        auto rng = row_rng(design.seed, i, kind_id);
        const long long n_g = draw_binomial(rng, design.n, q[i]);
        const long long y_g = draw_binomial(rng, n_g, pg[i]);
        const long long y_n = draw_binomial(rng, design.n - n_g, pn[i]);
        // Jeffreys-smoothed odds-ratio estimator; the +1 denominators keep it
        // finite even when one group is empty.
        const double ph_g = (static_cast<double>(y_g) + 0.5) /
                            (static_cast<double>(n_g) + 1.0);
        const double ph_n = (static_cast<double>(y_n) + 0.5) /
                            (static_cast<double>(design.n - n_g) + 1.0);
        col(i, 0) = odds(ph_n) / odds(ph_g);
      }
      break;
    }
    case DesignSpec::Kind::BinomialOn: {
      require_column(table, design.parameter);
      const Eigen::VectorXd p = table.col(design.parameter);
      for (Eigen::Index i = 0; i < K; ++i) {
        auto rng = row_rng(design.seed, i, kind_id);
        const long long y = draw_binomial(rng, design.n, p[i]);
        col(i, 0) = static_cast<double>(y) / static_cast<double>(design.n);
      }
      break;
    }
  }
  return SampleTable({design.statistic_name()}, std::move(col));
}

}  // namespace voisyn
