#include <doctest.h>

#include <cmath>
#include <vector>

#include "rdabc/errors.hpp"
#include "rdabc/gmm.hpp"
#include "rdabc/rng.hpp"
#include "rdabc/stats.hpp"

using namespace rdabc;

namespace {

GaussianMixture standard_normal_2d() {
  return GaussianMixture({GaussianComponent(1.0, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2))});
}

// Naive density oracle: plain sum of weight * N(x; mean, cov) using explicit
// inverses, no log-space tricks.  Valid at moderate scales only.
double naive_density(const GaussianMixture& m, const Eigen::VectorXd& x) {
  double total = 0.0;
  for (const auto& c : m.components()) {
    const Eigen::MatrixXd inv = c.covariance().inverse();
    const double det = c.covariance().determinant();
    const Eigen::VectorXd d = x - c.mean();
    const double quad = d.dot(inv * d);
    const double norm = std::pow(2.0 * M_PI, -0.5 * x.size()) / std::sqrt(det);
    total += c.weight() * norm * std::exp(-0.5 * quad);
  }
  return total;
}

}  // namespace

TEST_CASE("single-component log density at the origin") {
  const auto m = standard_normal_2d();
  CHECK(m.log_density(Eigen::VectorXd::Zero(2)) == doctest::Approx(-std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("far-separated component dominates half the density") {
  Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(1), mu2 = Eigen::VectorXd::Constant(1, 50.0);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(1, 1);
  GaussianMixture m({GaussianComponent(0.5, mu1, eye), GaussianComponent(0.5, mu2, eye)});
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  const double expected = std::log(0.5) + norm_log_pdf(0.0);
  CHECK(m.log_density(x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log density matches naive summation on a random 3-component mixture") {
  Rng rng(5);
  std::vector<GaussianComponent> comps;
  std::vector<double> weights{0.2, 0.5, 0.3};
  for (int l = 0; l < 3; ++l) {
    Eigen::VectorXd mean(2);
    mean << rng.uniform(-2, 2), rng.uniform(-2, 2);
    Eigen::MatrixXd a(2, 2);
    a << rng.uniform(0.5, 1.5), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.5, 1.5);
    Eigen::MatrixXd cov = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(2, 2);
    comps.emplace_back(weights[static_cast<std::size_t>(l)], mean, cov);
  }
  GaussianMixture m(std::move(comps));
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd x(2);
    x << rng.uniform(-4, 4), rng.uniform(-4, 4);
    const double direct = naive_density(m, x);
    CHECK(std::exp(m.log_density(x)) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("mixture construction validates weights and dimensions") {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(GaussianMixture({GaussianComponent(0.5, Eigen::VectorXd::Zero(2), eye)}), ContractError);
  CHECK_THROWS_AS(GaussianComponent(1.0, Eigen::VectorXd::Zero(2), -eye), FitRejectedError);
  GaussianMixture ok({GaussianComponent(1.0, Eigen::VectorXd::Zero(2), eye)});
  Eigen::VectorXd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(ok.log_density(wrong), ContractError);
}

TEST_CASE("fit_gmm with L=1 reproduces sample moments plus ridge") {
  Rng rng(11);
  Eigen::MatrixXd data(5000, 2);
  Eigen::VectorXd mu(2);
  mu << 1.0, -2.0;
  Eigen::MatrixXd chol(2, 2);
  chol << 1.0, 0.0, 0.6, 0.8;
  for (int i = 0; i < data.rows(); ++i) {
    data.row(i) = (mu + chol * rng.normal_vector(2)).transpose();
  }
  GmmFitConfig cfg;
  cfg.seed = 99;
  GmmFitReport rep;
  GaussianMixture m = fit_gmm(data, 1, cfg, &rep);

  const Eigen::VectorXd sample_mean = data.colwise().mean();
  Eigen::MatrixXd sample_cov = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < data.rows(); ++i) {
    const Eigen::VectorXd d = data.row(i).transpose() - sample_mean;
    sample_cov += d * d.transpose();
  }
  sample_cov /= static_cast<double>(data.rows());

  // L=1 EM has a closed form: mean = sample mean, covariance = MLE + ridge.
  CHECK((m.components()[0].mean() - sample_mean).norm() < 1e-8);
  const Eigen::MatrixXd expected = sample_cov + rep.ridge_used * Eigen::MatrixXd::Identity(2, 2);
  CHECK((m.components()[0].covariance() - expected).norm() < 1e-8);

  // And the sample moments sit close to the generator.
  const double se = 1.0 / std::sqrt(5000.0);
  CHECK(std::abs(sample_mean[0] - 1.0) < 3 * se);
  Eigen::MatrixXd truth = chol * chol.transpose();
  CHECK((m.components()[0].covariance() - truth).norm() / truth.norm() < 0.10);

  CHECK(rep.converged);
  CHECK(rep.iterations <= 2);  // one effective step
}

TEST_CASE("EM log-likelihood trajectory is non-decreasing") {
  Rng rng(21);
  Eigen::MatrixXd data(600, 2);
  for (int i = 0; i < data.rows(); ++i) {
    const double side = (i % 2 == 0) ? -2.0 : 2.0;
    data(i, 0) = side + rng.normal();
    data(i, 1) = 0.5 * side + rng.normal();
  }
  GmmFitConfig cfg;
  cfg.seed = 4;
  cfg.restarts = 3;
  GmmFitReport rep;
  fit_gmm(data, 3, cfg, &rep);
  REQUIRE(rep.loglik_trajectory.size() >= 2);
  for (std::size_t i = 1; i < rep.loglik_trajectory.size(); ++i) {
    CHECK(rep.loglik_trajectory[i] >= rep.loglik_trajectory[i - 1] - 1e-9);
  }
}

TEST_CASE("fit_gmm rejects degenerate inputs by name") {
  Eigen::MatrixXd data = Eigen::MatrixXd::Random(50, 2);
  data.col(1).setConstant(3.0);
  GmmFitConfig cfg;
  CHECK_THROWS_WITH_AS(fit_gmm(data, 1, cfg), doctest::Contains("column 1"), FitRejectedError);

  Eigen::MatrixXd tiny = Eigen::MatrixXd::Random(5, 2);
  CHECK_THROWS_AS(fit_gmm(tiny, 2, cfg), InsufficientDataError);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Random(50, 2);
  bad(3, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_gmm(bad, 1, cfg), FitRejectedError);
}

TEST_CASE("select_gmm picks the true component count on separated data") {
  Rng rng(31);
  Eigen::MatrixXd data(1200, 1);
  for (int i = 0; i < data.rows(); ++i) {
    data(i, 0) = ((i % 2 == 0) ? -5.0 : 5.0) + rng.normal();
  }
  GmmFitConfig cfg;
  cfg.seed = 8;
  cfg.restarts = 2;
  GmmSelection sel = select_gmm(data, {1, 2, 3}, cfg);
  CHECK(sel.selected_components == 2);
  CHECK(sel.table.size() == 3);

  GmmSelection single = select_gmm(data, {1}, cfg);
  CHECK(single.selected_components == 1);
}

TEST_CASE("conditioning a correlated bivariate normal gives the textbook answer") {
  const double rho = 0.65;
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, rho, rho, 1.0;
  GaussianMixture m({GaussianComponent(1.0, Eigen::VectorXd::Zero(2), cov)});
  for (double b : {-1.5, 0.0, 2.0}) {
    GaussianMixture cond = gmm_condition(m, {1}, Eigen::VectorXd::Constant(1, b));
    REQUIRE(cond.component_count() == 1);
    CHECK(cond.components()[0].weight() == doctest::Approx(1.0));
    CHECK(cond.components()[0].mean()[0] == doctest::Approx(rho * b).epsilon(1e-12));
    CHECK(cond.components()[0].covariance()(0, 0) == doctest::Approx(1.0 - rho * rho).epsilon(1e-12));
  }
}

TEST_CASE("conditional density equals joint over marginal") {
  Rng rng(77);
  std::vector<GaussianComponent> comps;
  Eigen::VectorXd m1(3), m2(3);
  m1 << 0.0, 1.0, -1.0;
  m2 << 2.0, -1.0, 0.5;
  Eigen::MatrixXd a1(3, 3), a2(3, 3);
  a1 << 1.0, 0.2, 0.0, 0.2, 0.8, 0.1, 0.0, 0.1, 1.2;
  a2 << 0.7, -0.1, 0.2, -0.1, 1.1, 0.0, 0.2, 0.0, 0.9;
  comps.emplace_back(0.4, m1, a1 * a1.transpose());
  comps.emplace_back(0.6, m2, a2 * a2.transpose());
  GaussianMixture joint(std::move(comps));

  const std::vector<int> b_idx{1, 2};
  GmmConditioner conditioner(joint, b_idx);
  GaussianMixture marginal = gmm_marginal(joint, b_idx);

  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd x(3);
    x << rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3);
    Eigen::VectorXd a(1), b(2);
    a << x[0];
    b << x[1], x[2];
    const double lhs = conditioner.conditional_log_density(a, b);
    const double rhs = joint.log_density(x) - marginal.log_density(b);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    // Materialized conditional mixture agrees with the fused path.
    CHECK(conditioner.condition(b).log_density(a) == doctest::Approx(lhs).epsilon(1e-10));
  }
}

TEST_CASE("conditional weights normalize and are scale invariant") {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd mu1(2), mu2(2);
  mu1 << 0.0, 0.0;
  mu2 << 1.0, 2.0;
  GaussianMixture m({GaussianComponent(0.25, mu1, cov), GaussianComponent(0.75, mu2, cov)});
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd b(1);
    b << rng.uniform(-4, 4);
    GaussianMixture cond = gmm_condition(m, {1}, b);
    double total = 0.0;
    for (const auto& c : cond.components()) total += c.weight();
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // Oracle: w_l phi(b; mean_b, var_b) normalized; scaling all w_l by 7
    // before normalizing must not change the result.
    const double phi1 = norm_pdf(b[0] - 0.0);
    const double phi2 = norm_pdf(b[0] - 2.0);
    const double raw1 = 0.25 * phi1, raw2 = 0.75 * phi2;
    const double expected1 = raw1 / (raw1 + raw2);
    const double scaled1 = (7.0 * raw1) / (7.0 * raw1 + 7.0 * raw2);
    CHECK(expected1 == doctest::Approx(scaled1).epsilon(1e-15));
    CHECK(cond.components()[0].weight() == doctest::Approx(expected1).epsilon(1e-10));
  }
}

TEST_CASE("sampling is reproducible and has the right moments") {
  const auto m = standard_normal_2d();
  Rng r1(19), r2(19);
  Eigen::MatrixXd s1 = gmm_sample(m, 100, r1);
  Eigen::MatrixXd s2 = gmm_sample(m, 100, r2);
  CHECK((s1 - s2).norm() == 0.0);

  Rng r3(5);
  Eigen::MatrixXd big = gmm_sample(m, 100000, r3);
  CHECK(std::abs(big.col(0).mean()) < 0.02);
  CHECK(std::abs(big.col(1).mean()) < 0.02);
}

TEST_CASE("sampling a near-degenerate weight draws from the surviving component") {
  Eigen::VectorXd far = Eigen::VectorXd::Constant(1, 100.0);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(1, 1);
  GaussianMixture m({GaussianComponent(1e-14, far, eye), GaussianComponent(1.0 - 1e-14, Eigen::VectorXd::Zero(1), eye)});
  Rng rng(2);
  Eigen::MatrixXd draws = gmm_sample(m, 2000, rng);
  CHECK(draws.cwiseAbs().maxCoeff() < 10.0);
}

TEST_CASE("sample then refit recovers component means") {
  Eigen::VectorXd muA = Eigen::VectorXd::Constant(2, -3.0);
  Eigen::VectorXd muB = Eigen::VectorXd::Constant(2, 3.0);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  GaussianMixture truth({GaussianComponent(0.5, muA, eye), GaussianComponent(0.5, muB, eye)});
  Rng rng(101);
  Eigen::MatrixXd draws = truth.sample(4000, rng);
  GmmFitConfig cfg;
  cfg.seed = 6;
  GaussianMixture fitted = fit_gmm(draws, 2, cfg);
  // 3 Monte Carlo standard errors per coordinate: se = sigma / sqrt(n_l).
  const double se3 = 3.0 / std::sqrt(2000.0);
  std::vector<Eigen::VectorXd> fitted_means{fitted.components()[0].mean(), fitted.components()[1].mean()};
  std::sort(fitted_means.begin(), fitted_means.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  CHECK((fitted_means[0] - muA).cwiseAbs().maxCoeff() < 3.5 * se3);
  CHECK((fitted_means[1] - muB).cwiseAbs().maxCoeff() < 3.5 * se3);
}
