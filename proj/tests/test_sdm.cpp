#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "fpsens/etdm.hpp"
#include "fpsens/sdm.hpp"
#include "oracles/quadrature.hpp"

using namespace fpsens;

namespace {

MatrixXd planar_coefficients() {
  MatrixXd a(4, 2);
  a << -2, 1, -1, 3, 6, 7, 2, -1;
  return a;
}

// a(θ) = θ a0, so ∂a/∂θ = a0.
HyperplaneMap toy(double theta, double flip = 1.0) {
  const MatrixXd a = planar_coefficients();
  return HyperplaneMap(flip * theta * a, {"theta"}, {flip * a});
}

const Thresholds kPlanar{{12.0, 18.0, 36.0, 10.0}, false};

bool within(double est, double ref, double cov, double k = 3.0) {
  return std::abs(est - ref) <= k * std::abs(cov * est);
}

}  // namespace

TEST(SdmSampling, PointsLieOnHyperplane) {
  const auto grid = make_grid(0.02, 10.0);
  auto basis = std::make_shared<const ExcitationBasis>(
      spectral_basis(white_noise_spectrum(5.5e-4, 0.0, 25.0 * std::numbers::pi, 500), grid));
  const ExplicitResponseMap map(basis, build_impulse_series(build_sdof(4.0 * std::numbers::pi, 0.05), grid, {}));
  const Thresholds th{{0.016}, true};
  const ComponentTable t(map.norms(), th);
  Rng rng = make_stream(9, 0);
  for (Index i : {3, 100, 499}) {
    for (Sign s : {Sign::plus, Sign::minus}) {
      const auto& rec = t.record({0, i, s});
      const VectorXd u = unit_vector(map, rec);
      for (int j = 0; j < 20; ++j) {
        const VectorXd x = sample_on_hyperplane(u, rec.beta, rng);
        ASSERT_LE(std::abs(component_g(map, rec, x)), 1e-10 * rec.threshold);
      }
    }
  }
}

TEST(SdmIndicator, PlanarPoints) {
  const auto map = toy(1.0);
  auto ws = map.make_workspace();
  const SignedComponentId c4{3, 0, Sign::plus};
  EXPECT_EQ(indicator(map, kPlanar, (VectorXd(2) << 4, -2).finished(), c4, ws), 1);
  // Component 3 has g = -14 here.
  EXPECT_EQ(indicator(map, kPlanar, (VectorXd(2) << 6, 2).finished(), c4, ws), 0);
}

TEST(Sdm, ToyMatchesQuadrature) {
  for (double theta : {1.0, 4.0}) {
    const auto map = toy(theta);
    const ComponentTable t(map.norms(), kPlanar);
    SdmConfig cfg;
    cfg.tol = 0.01;
    cfg.n_max = 400000;
    const auto est = sdm_estimate(map, t, kPlanar, cfg);
    ASSERT_TRUE(est.all_converged()) << theta;
    const double ref = oracle::union_probability_derivative(oracle::planar_halfplanes(), theta);
    EXPECT_TRUE(within(est.mean[0], ref, est.cov[0])) << theta << " " << est.mean[0] << " vs " << ref;
    EXPECT_EQ(est.history_mean.size(), est.n);
    EXPECT_EQ(est.names[0], "theta");
  }
}

TEST(Sdm, UniformAndImportancePmfAgree) {
  const auto map = toy(4.0);
  const ComponentTable t(map.norms(), kPlanar);
  SdmConfig cfg;
  cfg.tol = 0.02;
  cfg.n_max = 400000;
  const auto a = sdm_estimate(map, t, kPlanar, importance_pmf(t), cfg);
  const auto b = sdm_estimate(map, t, kPlanar, uniform_pmf(t), cfg);
  ASSERT_TRUE(a.all_converged());
  ASSERT_TRUE(b.all_converged());
  const double se = std::hypot(a.cov[0] * a.mean[0], b.cov[0] * b.mean[0]);
  EXPECT_LE(std::abs(a.mean[0] - b.mean[0]), 3.0 * se);
}

TEST(Sdm, MirroredMapGivesSameDerivative) {
  const Thresholds sym{{12.0, 18.0, 36.0, 10.0}, true};
  const auto m1 = toy(4.0), m2 = toy(4.0, -1.0);
  const ComponentTable t1(m1.norms(), sym), t2(m2.norms(), sym);
  SdmConfig cfg;
  cfg.tol = 0.02;
  cfg.n_max = 400000;
  const auto a = sdm_estimate(m1, t1, sym, cfg);
  const auto b = sdm_estimate(m2, t2, sym, cfg);
  // Negating x maps one problem onto the other; the ± slots trade places so
  // the draws differ and only the distributions match.
  ASSERT_TRUE(a.all_converged() && b.all_converged());
  const double se = std::hypot(a.cov[0] * a.mean[0], b.cov[0] * b.mean[0]);
  EXPECT_LE(std::abs(a.mean[0] - b.mean[0]), 3.0 * se);
}

TEST(Sdm, ZeroDerivativeIsNotConverged) {
  const MatrixXd a = planar_coefficients();
  const HyperplaneMap map(a, {"flat"}, {MatrixXd::Zero(4, 2)});
  const ComponentTable t(map.norms(), kPlanar);
  SdmConfig cfg;
  cfg.n_max = 200;
  const auto est = sdm_estimate(map, t, kPlanar, cfg);
  EXPECT_EQ(est.mean[0], 0.0);
  EXPECT_TRUE(std::isnan(est.cov[0]));
  EXPECT_FALSE(est.converged[0]);
  EXPECT_EQ(est.n, 200u);
}

TEST(Sdm, WorkerCountAndSeedDeterminism) {
  const auto map = toy(4.0);
  const ComponentTable t(map.norms(), kPlanar);
  SdmConfig cfg;
  cfg.seed = 123;
  cfg.tol = 0.05;
  const auto a = sdm_estimate(map, t, kPlanar, cfg);
  cfg.workers = 4;
  const auto b = sdm_estimate(map, t, kPlanar, cfg);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.history_cov, b.history_cov);
  cfg.seed = 124;
  const auto c = sdm_estimate(map, t, kPlanar, cfg);
  EXPECT_NE(a.mean, c.mean);
}

TEST(Sdm, RejectsBadConfig) {
  const auto map = toy(1.0);
  const ComponentTable t(map.norms(), kPlanar);
  SdmConfig cfg;
  cfg.tol = 0.0;
  EXPECT_THROW(sdm_estimate(map, t, kPlanar, cfg), std::invalid_argument);
  cfg = {};
  cfg.n_max = 5;
  EXPECT_THROW(sdm_estimate(map, t, kPlanar, cfg), std::invalid_argument);
  const HyperplaneMap bare(planar_coefficients());
  EXPECT_THROW(sdm_estimate(bare, t, kPlanar, SdmConfig{}), std::invalid_argument);
}

// Fixed-N runs over many seeds: the pooled mean must bracket the quadrature value.
TEST(Sdm, UnbiasedOverSeeds) {
  const auto map = toy(4.0);
  const ComponentTable t(map.norms(), kPlanar);
  const double ref = oracle::union_probability_derivative(oracle::planar_halfplanes(), 4.0);
  RunningMoments pooled;
  for (std::uint64_t s = 0; s < 100; ++s) {
    SdmConfig cfg;
    cfg.seed = s;
    cfg.n_max = 200;
    cfg.early_stop = false;
    const auto est = sdm_estimate(map, t, kPlanar, cfg);
    ASSERT_EQ(est.n, 200u);
    pooled.add(est.mean[0]);
  }
  const double se = std::sqrt(pooled.sample_variance() / 100.0);
  EXPECT_LE(std::abs(pooled.mean() - ref), 3.0 * se) << pooled.mean() << " vs " << ref;
}

TEST(Sdm, Example1DerivativesAreNegative) {
  const auto grid = make_grid(0.02, 20.0);
  auto basis = std::make_shared<const ExcitationBasis>(
      spectral_basis(white_noise_spectrum(5.5e-4, 0.0, 25.0 * std::numbers::pi, 500), grid));
  const ExplicitResponseMap map(
      basis, build_impulse_series(build_sdof(4.0 * std::numbers::pi, 0.05), grid, {"omega_n", "zeta_n"}));
  const Thresholds th{{0.016}, true};
  const ComponentTable t(map.norms(), th);
  SdmConfig cfg;
  cfg.seed = 5;
  const auto est = sdm_estimate(map, t, th, cfg);
  ASSERT_TRUE(est.all_converged());
  // Stiffer or more damped oscillator, smaller response.
  EXPECT_LT(est.mean[0], 0.0);
  EXPECT_LT(est.mean[1], 0.0);
  EXPECT_EQ(est.history_mean.size(), 2 * est.n);
}
