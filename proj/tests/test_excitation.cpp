#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "fpsens/excitation.hpp"
#include "fpsens/random.hpp"

using namespace fpsens;
using std::numbers::pi;

namespace {

ExcitationBasis example1_basis(double T = 20.0) {
  return spectral_basis(white_noise_spectrum(5.5e-4, 0.0, 25.0 * pi, 500), make_grid(0.02, T));
}

}  // namespace

TEST(Grid, StepCountAndTimes) {
  const auto g = make_grid(0.02, 20.0);
  EXPECT_EQ(g.n, 1000);
  EXPECT_DOUBLE_EQ(g.time(0), 0.02);
  EXPECT_NEAR(g.time(999), 20.0, 1e-12);
  EXPECT_EQ(make_grid(0.02, 30.0).n, 1500);
  EXPECT_THROW(make_grid(0.03, 1.0), std::invalid_argument);
  EXPECT_THROW(make_grid(0.0, 1.0), std::invalid_argument);
}

TEST(SpectralBasis, Example1Dimension) {
  const auto b = example1_basis();
  EXPECT_EQ(b.dim(), 1000);
  EXPECT_EQ(b.steps(), 1000);
}

TEST(SpectralBasis, WhiteNoiseRowNormsAreConstant) {
  const auto b = example1_basis();
  // 2 S (ω_max - ω_min) = 2 · 5.5e-4 · 25π
  const double expect = 2.0 * 5.5e-4 * 25.0 * pi;
  EXPECT_NEAR(expect, 0.08639, 1e-5);
  for (Index i = 0; i < b.steps(); ++i) ASSERT_NEAR(b.psi().row(i).squaredNorm(), expect, 1e-12);
}

TEST(SpectralBasis, SingleInterval) {
  const auto g = make_grid(0.1, 1.0);
  const auto b = spectral_basis(white_noise_spectrum(2.0, 1.0, 3.0, 1), g);
  ASSERT_EQ(b.dim(), 2);
  const double amp = std::sqrt(2.0 * 2.0 * 2.0), w = 2.0;
  for (Index i = 0; i < g.n; ++i) {
    EXPECT_NEAR(b.psi()(i, 0), amp * std::cos(w * g.time(i)), 1e-14);
    EXPECT_NEAR(b.psi()(i, 1), amp * std::sin(w * g.time(i)), 1e-14);
  }
}

TEST(SpectralBasis, Errors) {
  const auto g = make_grid(0.02, 1.0);
  EXPECT_THROW(spectral_basis(white_noise_spectrum(1.0, 0.0, 200.0, 10), g), std::invalid_argument);
  SpectrumModel neg{[](double, double) { return -1.0; }, 0.0, 10.0, 4};
  EXPECT_THROW(spectral_basis(neg, g), std::invalid_argument);
  EXPECT_THROW(white_noise_spectrum(0.0, 0.0, 1.0, 1), std::invalid_argument);
  const auto s = white_noise_spectrum(5.5e-4, 0.0, 1.0, 1);
  EXPECT_EQ(s.density(3.0, 7.0), 5.5e-4);
}

TEST(SpectralBasis, SampledVarianceMatchesRowNorms) {
  const auto b = example1_basis(4.0);
  Rng rng = make_stream(2024, 0);
  const int draws = 10000;
  MatrixXd x(b.dim(), draws);
  for (int j = 0; j < draws; ++j) x.col(j) = standard_normal_vector(rng, b.dim());
  const MatrixXd f = b.psi() * x;
  for (Index i = 0; i < b.steps(); i += 10) {
    const double var = f.row(i).squaredNorm() / draws;
    EXPECT_NEAR(var / b.psi().row(i).squaredNorm(), 1.0, 0.05) << i;
  }
}

TEST(OrthogonalBasis, ScaledIdentity) {
  const auto g = make_grid(1.0, 5.0);
  const CorrelationModel c{[](double, double tau) { return tau == 0.0 ? 4.0 : 0.0; }};
  const auto b = orthogonal_basis(c, g);
  EXPECT_EQ(b.dim(), 5);
  const MatrixXd gram = b.psi() * b.psi().transpose();
  EXPECT_TRUE(gram.isApprox(4.0 * MatrixXd::Identity(5, 5), 1e-12));
  // Columns of a scaled identity up to sign and permutation.
  EXPECT_TRUE((b.psi().cwiseAbs().colwise().sum().array() - 2.0).abs().maxCoeff() < 1e-12);
}

TEST(OrthogonalBasis, RankOne) {
  const auto g = make_grid(1.0, 2.0);
  const CorrelationModel c{[](double, double) { return 3.0; }};
  const auto b = orthogonal_basis(c, g);
  ASSERT_EQ(b.dim(), 1);
  EXPECT_NEAR(b.psi().squaredNorm(), 6.0, 1e-12);
}

TEST(OrthogonalBasis, RejectsIndefiniteCovariance) {
  const auto g = make_grid(1.0, 2.0);
  const CorrelationModel c{[](double, double tau) { return tau == 0.0 ? 1.0 : 2.0; }};
  EXPECT_THROW(orthogonal_basis(c, g), std::invalid_argument);
}

TEST(OrthogonalBasis, ModulatedCovarianceReconstruction) {
  ModulatedCorrelationParams p;
  p.t_a = 2.0, p.t_b = 4.0, p.t_c = 6.0;
  const auto g = make_grid(0.02, 6.0);
  const auto corr = modulated_correlation(p);
  const auto b = orthogonal_basis(corr, g, 1e-12);
  EXPECT_LE(b.dim(), g.n);
  const MatrixXd sigma = covariance_matrix(corr, g);
  const MatrixXd err = b.psi() * b.psi().transpose() - sigma;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  EXPECT_LE(err.cwiseAbs().maxCoeff(), 1e-12 * lmax * g.n);
  EXPECT_LT(err.cwiseAbs().maxCoeff() / sigma.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ModulatedCorrelation, Envelope) {
  ModulatedCorrelationParams p;
  EXPECT_DOUBLE_EQ(modulation(p, p.t_a / 2), 0.25);
  EXPECT_DOUBLE_EQ(modulation(p, 8.0), 1.0);
  EXPECT_DOUBLE_EQ(modulation(p, 14.0), 1.0);
  EXPECT_DOUBLE_EQ(modulation(p, 20.0), 1.0);
  EXPECT_NEAR(modulation(p, p.t_b + 1.0 / p.lambda), std::exp(-1.0), 1e-15);
  EXPECT_EQ(modulation(p, -0.1), 0.0);
  EXPECT_EQ(modulation(p, 30.1), 0.0);
}

TEST(ModulatedCorrelation, StationaryPart) {
  ModulatedCorrelationParams p;
  EXPECT_NEAR(p.omega_d(), 11.2, 1e-12);
  const double mu1 = 14.0 * (1 + 4 * 0.36) / 0.6;
  EXPECT_NEAR(p.mu1(), mu1, 1e-12);
  // R0(0) = (π S0 / 2) μ1 = 0.894307 for S0 = 0.01, ω_g = 14, ζ_g = 0.6.
  EXPECT_NEAR(stationary_correlation(p, 0.0), 0.894306708721895, 1e-12);
  EXPECT_NEAR(stationary_correlation(p, 0.3), stationary_correlation(p, -0.3), 1e-15);
  const auto corr = modulated_correlation(p);
  EXPECT_NEAR(corr.correlation(10.0, 0.0), stationary_correlation(p, 0.0), 1e-15);
  EXPECT_NEAR(corr.correlation(4.0, 0.5), 0.25 * modulation(p, 4.5) * stationary_correlation(p, 0.5), 1e-15);
}

TEST(ModulatedCorrelation, Validation) {
  ModulatedCorrelationParams p;
  p.t_b = 5.0;  // t_a > t_b
  EXPECT_THROW(modulated_correlation(p), std::invalid_argument);
  p = {};
  p.zeta_g = 1.0;
  EXPECT_THROW(modulated_correlation(p), std::invalid_argument);
}
