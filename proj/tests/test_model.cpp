#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "fpsens/model.hpp"

using namespace fpsens;

namespace {

ShearBuildingSpec example2_frame() {
  ShearBuildingSpec s;
  s.masses.assign(20, 3.0e3);
  s.stiffnesses.assign(20, 3.0e7);
  s.rayleigh = RayleighSpec{1, 20, 0.05};
  s.dampers.assign(20, {3.0e6, 2.5e6});
  s.brace_cos = 0.8;
  return s;
}

}  // namespace

TEST(Sdof, MatricesFromFrequencyAndDamping) {
  const auto m = build_sdof(4.0 * std::numbers::pi, 0.05);
  EXPECT_EQ(m.dof_count(), 1);
  EXPECT_NEAR(m.stiffness()(0, 0), 157.91, 0.01);
  EXPECT_NEAR(m.damping()(0, 0), 1.2566, 1e-4);
  EXPECT_EQ(m.mass()(0, 0), 1.0);
  EXPECT_EQ(m.orientation()[0], -1.0);
  ASSERT_EQ(m.observers().size(), 1u);
}

TEST(Sdof, ParameterDerivatives) {
  const auto a = build_sdof(1.0, 0.5);
  EXPECT_DOUBLE_EQ(a.damping()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(a.parameter("zeta_n").dC(0, 0), 2.0);
  const auto b = build_sdof(2.0, 0.1);
  EXPECT_DOUBLE_EQ(b.parameter("omega_n").dK(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(b.parameter("omega_n").dC(0, 0), 0.2);
  EXPECT_THROW(b.parameter("mass"), std::invalid_argument);
}

TEST(Sdof, RejectsBadInputs) {
  EXPECT_THROW(build_sdof(0.0, 0.05), std::invalid_argument);
  EXPECT_THROW(build_sdof(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(build_sdof(1.0, 1.0), std::invalid_argument);
}

TEST(ShearBuilding, TwoStoryPattern) {
  ShearBuildingSpec s;
  s.masses = {1.0, 1.0};
  s.stiffnesses = {1.0, 1.0};
  const auto m = build_shear_building(s);
  MatrixXd k(2, 2);
  k << 2, -1, -1, 1;
  EXPECT_TRUE(m.stiffness().isApprox(k));
  EXPECT_TRUE(m.parameters().empty());
  ASSERT_EQ(m.observers().size(), 2u);
  EXPECT_EQ(m.observers()[1].disp_row, (RowVectorXd(2) << -1, 1).finished());
  EXPECT_TRUE(m.orientation().isApprox(-VectorXd::Ones(2)));
}

TEST(ShearBuilding, SingleStoryWithoutDamper) {
  ShearBuildingSpec s;
  s.masses = {2.0};
  s.stiffnesses = {5.0};
  const auto m = build_shear_building(s);
  EXPECT_EQ(m.stiffness()(0, 0), 5.0);
  EXPECT_EQ(m.find_parameter("k_ve_1"), nullptr);
}

TEST(ShearBuilding, DamperIncrementAndBindings) {
  const auto spec = example2_frame();
  const auto m = build_shear_building(spec);
  EXPECT_EQ(m.parameters().size(), 40u);
  EXPECT_EQ(m.parameters().front().name, "k_ve_1");
  EXPECT_EQ(m.parameters()[20].name, "c_ve_1");

  auto bare = spec;
  bare.dampers.clear();
  const auto b = build_shear_building(bare);
  const MatrixXd dk = m.stiffness() - b.stiffness();
  // Story 1 only touches (0,0); interior stories a 2x2 block.
  EXPECT_NEAR(dk(0, 0), 2 * 1.92e6, 1e-6);
  EXPECT_NEAR(dk(0, 1), -1.92e6, 1e-6);
  EXPECT_NEAR(dk(19, 19), 1.92e6, 1e-6);
  EXPECT_NEAR(m.parameter("k_ve_1").dK(0, 0), 0.64, 1e-15);
  EXPECT_NEAR(m.parameter("k_ve_3").dK(1, 2), -0.64, 1e-15);
  EXPECT_TRUE(m.parameter("k_ve_3").dC.isZero(0));
  EXPECT_NEAR(m.parameter("c_ve_2").dC(1, 1), 0.64, 1e-15);
  EXPECT_TRUE(m.parameter("c_ve_2").dK.isZero(0));
  // Stiffness stays symmetric tridiagonal.
  EXPECT_TRUE(m.stiffness().isApprox(m.stiffness().transpose()));
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 20; ++j)
      if (std::abs(i - j) > 1) EXPECT_EQ(m.stiffness()(i, j), 0.0);
}

TEST(ShearBuilding, AddingOneDamperChangesOnlyItsBlock) {
  ShearBuildingSpec s;
  s.masses = {1.0, 1.0, 1.0};
  s.stiffnesses = {10.0, 10.0, 10.0};
  s.dampers = {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
  s.brace_cos = 0.5;
  const auto a = build_shear_building(s);
  s.dampers[2].k_ve = 3.0;
  const auto b = build_shear_building(s);
  const MatrixXd d = b.stiffness() - a.stiffness();
  MatrixXd expect = MatrixXd::Zero(3, 3);
  expect.block(1, 1, 2, 2) << 0.5, -0.5, -0.5, 0.5;
  EXPECT_TRUE(d.isApprox(expect, 1e-14));
}

TEST(ShearBuilding, ErrorsOnMismatchAndBadValues) {
  ShearBuildingSpec s;
  s.masses = {1.0, 1.0};
  s.stiffnesses = {1.0};
  EXPECT_THROW(build_shear_building(s), std::invalid_argument);
  s.stiffnesses = {1.0, 1.0};
  s.masses = {1.0, -1.0};
  EXPECT_THROW(build_shear_building(s), std::invalid_argument);
  s.masses = {1.0, 1.0};
  s.dampers = {{1.0, 1.0}};
  EXPECT_THROW(build_shear_building(s), std::invalid_argument);
  s.dampers.clear();
  s.brace_cos = 0.0;
  EXPECT_THROW(build_shear_building(s), std::invalid_argument);
}

TEST(SystemModelValidation, RejectsNonSpdMassAndDuplicates) {
  const MatrixXd z = MatrixXd::Zero(1, 1);
  const ResponseObserver u{"u", RowVectorXd::Ones(1), RowVectorXd::Zero(1), RowVectorXd::Zero(1)};
  EXPECT_THROW(SystemModel(-MatrixXd::Ones(1, 1), z, MatrixXd::Ones(1, 1), VectorXd::Ones(1), {}, {u}),
               std::invalid_argument);
  const ParameterBinding p{"a", z, z, z, VectorXd::Zero(1), 1.0};
  EXPECT_THROW(SystemModel(MatrixXd::Ones(1, 1), z, MatrixXd::Ones(1, 1), VectorXd::Ones(1), {p, p}, {u}),
               std::invalid_argument);
  const ResponseObserver dead{"dead", RowVectorXd::Zero(1), RowVectorXd::Zero(1), RowVectorXd::Zero(1)};
  EXPECT_THROW(SystemModel(MatrixXd::Ones(1, 1), z, MatrixXd::Ones(1, 1), VectorXd::Ones(1), {}, {dead}),
               std::invalid_argument);
  MatrixXd k(2, 2);
  k << 1, 2, 2, 1;  // indefinite
  const ResponseObserver u2{"u", RowVectorXd::Ones(2), RowVectorXd::Zero(2), RowVectorXd::Zero(2)};
  EXPECT_THROW(SystemModel(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2), k, VectorXd::Ones(2), {}, {u2}),
               std::invalid_argument);
}

TEST(Rayleigh, TwoFrequencyFit) {
  const auto r = rayleigh_from_frequencies(1.0, 3.0, 0.05);
  EXPECT_NEAR(r.a0, 0.075, 1e-15);
  EXPECT_NEAR(r.a1, 0.025, 1e-15);
  EXPECT_THROW(rayleigh_from_frequencies(2.0, 2.0, 0.05), std::runtime_error);
}

TEST(Rayleigh, RepeatedModalFrequenciesAreSingular) {
  const MatrixXd m = MatrixXd::Identity(2, 2);
  const MatrixXd k = 4.0 * MatrixXd::Identity(2, 2);
  EXPECT_THROW(rayleigh_coefficients(m, k, {1, 2, 0.05}), std::runtime_error);
  EXPECT_THROW(rayleigh_coefficients(m, k, {2, 2, 0.05}), std::invalid_argument);
}

TEST(Rayleigh, Example2BareFrame) {
  auto spec = example2_frame();
  MatrixXd mass = MatrixXd::Zero(20, 20), k = MatrixXd::Zero(20, 20);
  for (Index s = 0; s < 20; ++s) {
    mass(s, s) = 3.0e3;
    k += 3.0e7 * story_pattern(20, s);
  }
  const VectorXd w = modal_frequencies(mass, k);
  const auto r = rayleigh_coefficients(mass, k, *spec.rayleigh);
  EXPECT_NEAR(rayleigh_damping_ratio(r, w[0]), 0.05, 1e-14);
  EXPECT_NEAR(rayleigh_damping_ratio(r, w[19]), 0.05, 1e-14);
  for (Index i = 1; i < 19; ++i) {
    const double z = rayleigh_damping_ratio(r, w[i]);
    EXPECT_GT(z, 0.0);
    EXPECT_LT(z, 0.1);
  }
  // Damping of the assembled model is Rayleigh(bare) + cos² c_ve patterns.
  spec.dampers.assign(20, {3.0e6, 2.5e6});
  const auto m = build_shear_building(spec);
  MatrixXd c = r.a0 * mass + r.a1 * k;
  for (Index s = 0; s < 20; ++s) c += 0.64 * 2.5e6 * story_pattern(20, s);
  EXPECT_TRUE(m.damping().isApprox(c, 1e-13));
}

// dM, dC, dK, dL against central differences of the assembled matrices.
TEST(ParameterBindings, MatchFiniteDifferencesOfAssembly) {
  std::vector<ModelSpec> specs{SdofSpec{4.0 * std::numbers::pi, 0.05}, example2_frame()};
  for (const auto& spec : specs) {
    const auto model = build_model(spec);
    for (const auto& p : model.parameters()) {
      const double v = parameter_value(spec, p.name);
      const double h = 1e-6 * v;
      const auto up = build_model(with_parameter(spec, p.name, v + h));
      const auto dn = build_model(with_parameter(spec, p.name, v - h));
      auto check = [&](const MatrixXd& plus, const MatrixXd& minus, const MatrixXd& exact, const char* what) {
        const MatrixXd fd = (plus - minus) / (2 * h);
        const double scale = std::max(exact.norm(), 1e-300);
        EXPECT_LT((fd - exact).norm() / scale, 1e-6) << p.name << " " << what;
      };
      check(up.stiffness(), dn.stiffness(), p.dK, "K");
      check(up.damping(), dn.damping(), p.dC, "C");
      EXPECT_TRUE(((up.mass() - dn.mass()) / (2 * h)).isZero(1e-12));
      EXPECT_TRUE(p.dM.isZero(0));
      EXPECT_TRUE(((up.orientation() - dn.orientation()) / (2 * h) - p.dL).isZero(1e-12));
    }
  }
}

TEST(ParameterBindings, SpecAccessors) {
  ModelSpec spec = example2_frame();
  EXPECT_DOUBLE_EQ(parameter_value(spec, "c_ve_7"), 2.5e6);
  auto changed = with_parameter(spec, "k_ve_20", 1.0);
  EXPECT_DOUBLE_EQ(parameter_value(changed, "k_ve_20"), 1.0);
  EXPECT_THROW(parameter_value(spec, "k_ve_21"), std::invalid_argument);
  EXPECT_THROW(parameter_value(spec, "k_ve_"), std::invalid_argument);
  EXPECT_THROW(parameter_value(SdofSpec{}, "k_ve_1"), std::invalid_argument);
}
