#include <cmath>
#include <random>

#include "doctest.h"
#include "voisyn/designs.hpp"
#include "voisyn/samples.hpp"

using namespace voisyn;

namespace {

double odds(double p) { return p / (1.0 - p); }

SampleTable constant_table(const std::vector<std::string>& names,
                           const std::vector<double>& values, int K) {
  Eigen::MatrixXd m(K, static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < values.size(); ++j) {
    m.col(static_cast<Eigen::Index>(j)).setConstant(values[j]);
  }
  return SampleTable(names, std::move(m));
}

}  // namespace

TEST_CASE("a zero-size study yields a constant placeholder statistic") {
  SampleTable t = constant_table({"pi_GA"}, {0.1}, 50);
  DesignSpec d;
  d.kind = DesignSpec::Kind::GumAnonAddOn;
  d.n = 0;
  SampleTable s = simulate_statistics(d, t);
  REQUIRE(s.rows() == 50);
  CHECK(s.names() == std::vector<std::string>{"T_gumanon"});
  CHECK((s.col("T_gumanon").array() == 0.5).all());
}

TEST_CASE("clinic-survey prevalence statistic is the empirical fraction") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.02, 0.12);
  const int K = 20000;
  Eigen::MatrixXd m(K, 1);
  for (int i = 0; i < K; ++i) m(i, 0) = u(rng);
  SampleTable t({"pi_GA"}, std::move(m));

  DesignSpec d;
  d.kind = DesignSpec::Kind::GumAnonAddOn;
  d.n = 50;
  d.seed = 7;
  SampleTable s = simulate_statistics(d, t);
  const Eigen::VectorXd T = s.col("T_gumanon");
  const Eigen::VectorXd pi = t.col("pi_GA");

  // Each entry is a multiple of 1/n inside [0, 1].
  for (int i = 0; i < K; ++i) {
    CHECK(T[i] >= 0.0);
    CHECK(T[i] <= 1.0);
    const double scaled = T[i] * 50.0;
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
  }

  // Tower property: E(T) = E(pi_GA); per-row differences are mean-zero.
  const Eigen::VectorXd diff = T - pi;
  const double se = std::sqrt(sample_variance(diff) / K);
  CHECK(std::abs(diff.mean()) < 3.0 * se);
}

TEST_CASE("a huge clinic survey pins the statistic to the prevalence") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.02, 0.12);
  const int K = 1000;
  Eigen::MatrixXd m(K, 1);
  for (int i = 0; i < K; ++i) m(i, 0) = u(rng);
  SampleTable t({"pi_GA"}, std::move(m));

  DesignSpec d;
  d.kind = DesignSpec::Kind::GumAnonAddOn;
  d.n = 1000000;
  d.seed = 8;
  SampleTable s = simulate_statistics(d, t);
  int close = 0;
  for (int i = 0; i < K; ++i) {
    if (std::abs(s.col("T_gumanon")[i] - t.col("pi_GA")[i]) < 0.002) ++close;
  }
  CHECK(close >= 990);
}

TEST_CASE("school-survey odds ratio at concentrated counts hits 1.0948") {
  // With n = 10^6 and the observed per-group rates (20/493 and 20/452) the
  // smoothed odds-ratio estimator concentrates on the population value,
  // which equals the hand-computed observed-data statistic
  // odds(20.5/453)/odds(20.5/494) ~ 1.0948.
  const double hand = odds(20.5 / 453.0) / odds(20.5 / 494.0);
  CHECK(hand == doctest::Approx(1.0948).epsilon(1e-3));

  const int K = 500;
  SampleTable t = constant_table({"p_GM_G", "p_GM_N"},
                                 {20.0 / 493.0, 20.0 / 452.0}, K);
  DesignSpec d;
  d.kind = DesignSpec::Kind::GmshsAddOn;
  d.n = 1000000;
  d.seed = 9;
  d.fixed_split = 493.0 / 945.0;
  SampleTable s = simulate_statistics(d, t);
  const double population = odds(20.0 / 452.0) / odds(20.0 / 493.0);
  CHECK(s.col("T_gmshs").mean() == doctest::Approx(population).epsilon(0.005));
  CHECK(population == doctest::Approx(hand).epsilon(2e-3));
}

TEST_CASE("school-survey statistic stays positive and finite at boundaries") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int K = 5000;
  Eigen::MatrixXd m(K, 4);
  for (int i = 0; i < K; ++i) {
    m(i, 0) = u(rng);          // p_GM_G, including values near 0 and 1
    m(i, 1) = u(rng);          // p_GM_N
    m(i, 2) = u(rng) + 1e-12;  // rho_G
    m(i, 3) = u(rng) + 1e-12;  // rho_N
  }
  SampleTable t({"p_GM_G", "p_GM_N", "rho_G", "rho_N"}, std::move(m));
  DesignSpec d;
  d.kind = DesignSpec::Kind::GmshsAddOn;
  d.n = 5;  // small n makes empty groups common; smoothing must absorb them
  d.seed = 10;
  SampleTable s = simulate_statistics(d, t);
  for (int i = 0; i < K; ++i) {
    CHECK(std::isfinite(s.col("T_gmshs")[i]));
    CHECK(s.col("T_gmshs")[i] > 0.0);
  }
}

TEST_CASE("a degenerate split exercises the empty-group smoothing") {
  // Everyone lands in the first group and tests positive; the second group
  // is empty, so its smoothed rate is 0.5/1 and the ratio is fully determined.
  const int n = 945;
  SampleTable t = constant_table({"p_GM_G", "p_GM_N"}, {1.0, 0.5}, 3);
  DesignSpec d;
  d.kind = DesignSpec::Kind::GmshsAddOn;
  d.n = n;
  d.seed = 11;
  d.fixed_split = 1.0;
  SampleTable s = simulate_statistics(d, t);
  const double expect = odds(0.5 / 1.0) / odds((n + 0.5) / (n + 1.0));
  for (int i = 0; i < 3; ++i) {
    CHECK(s.col("T_gmshs")[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("the generic binomial design reads any probability column") {
  const int K = 40000;
  SampleTable t = constant_table({"pibar_N"}, {0.3}, K);
  DesignSpec d;
  d.kind = DesignSpec::Kind::BinomialOn;
  d.parameter = "pibar_N";
  d.n = 10;
  d.seed = 12;
  SampleTable s = simulate_statistics(d, t);
  CHECK(s.names() == std::vector<std::string>{"T_pibar_N"});
  const Eigen::VectorXd T = s.col("T_pibar_N");
  const double se = std::sqrt(0.3 * 0.7 / 10.0 / K);
  CHECK(std::abs(T.mean() - 0.3) < 4.0 * se);
}

TEST_CASE("identical seeds reproduce the statistic bit for bit") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.01, 0.2);
  const int K = 2000;
  Eigen::MatrixXd m(K, 1);
  for (int i = 0; i < K; ++i) m(i, 0) = u(rng);
  SampleTable t({"pi_GA"}, std::move(m));
  DesignSpec d;
  d.kind = DesignSpec::Kind::GumAnonAddOn;
  d.n = 100;
  d.seed = 13;
  SampleTable a = simulate_statistics(d, t);
  SampleTable b = simulate_statistics(d, t);
  CHECK(a.draws() == b.draws());
  d.seed = 14;
  SampleTable c = simulate_statistics(d, t);
  CHECK(a.draws() != c.draws());
}

TEST_CASE("missing parameter columns are reported by name") {
  SampleTable t = constant_table({"other"}, {0.5}, 20);
  DesignSpec d;
  d.kind = DesignSpec::Kind::GumAnonAddOn;
  d.n = 10;
  CHECK_THROWS_WITH_AS(simulate_statistics(d, t), doctest::Contains("pi_GA"),
                       std::invalid_argument);
  d.kind = DesignSpec::Kind::GmshsAddOn;
  CHECK_THROWS_WITH_AS(simulate_statistics(d, t), doctest::Contains("p_GM_G"),
                       std::invalid_argument);
  d.kind = DesignSpec::Kind::BinomialOn;
  d.parameter = "pibar_G";
  CHECK_THROWS_WITH_AS(simulate_statistics(d, t), doctest::Contains("pibar_G"),
                       std::invalid_argument);
}

TEST_CASE("designs parse from their JSON form") {
  DesignSpec d = DesignSpec::from_json(R"({"kind":"gmshs","n":1000,"seed":7})");
  CHECK(d.kind == DesignSpec::Kind::GmshsAddOn);
  CHECK(d.n == 1000);
  CHECK(d.seed == 7);
  CHECK_FALSE(d.fixed_split.has_value());

  d = DesignSpec::from_json(
      R"({"kind":"gmshs","n":10,"fixed_split":0.52169312169312165})");
  REQUIRE(d.fixed_split.has_value());
  CHECK(*d.fixed_split == doctest::Approx(493.0 / 945.0));

  d = DesignSpec::from_json(R"({"kind":"binomial","parameter":"pi_GA","n":5})");
  CHECK(d.kind == DesignSpec::Kind::BinomialOn);
  CHECK(d.parameter == "pi_GA");

  CHECK_THROWS(DesignSpec::from_json(R"({"kind":"census","n":10})"));
  CHECK_THROWS(DesignSpec::from_json(R"({"kind":"gumanon","n":-1})"));
  CHECK_THROWS(DesignSpec::from_json(R"({"kind":"binomial","n":10})"));
}
