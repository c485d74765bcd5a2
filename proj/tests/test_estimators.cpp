#include <gtest/gtest.h>

#include <random>

#include "nvdnp/estimators.hpp"
#include "nvdnp/laser_model.hpp"

using namespace nvdnp;

TEST(ThermalPolarization, FrozenReferenceValue) {
  // h * (10.7084 MHz/T * 6 T) / (2k * 297 K), evaluated independently with
  // extended-precision arithmetic and frozen here.
  EXPECT_NEAR(thermal_polarization(6.0, 297.0), 5.19113278048837e-6, 1e-17);
  EXPECT_THROW(thermal_polarization(0.0, 297.0), InvalidArgument);
  EXPECT_THROW(thermal_polarization(6.0, -1.0), InvalidArgument);
}

TEST(EstimatePolarization, HeadlineRatioGivesThePublishedPercentage) {
  EnhancementInputs in;
  in.s_hyper = 217.7;
  in.s_thermal = 1.0;
  EXPECT_NEAR(estimate_polarization(in), 1.13010960631232e-3, 1e-14);
  // The published rounded figure is 0.113%.
  EXPECT_NEAR(estimate_polarization(in) / 1.13e-3, 1.0, 5e-3);
}

TEST(EstimatePolarization, UnitRatioIsTheThermalValueAndZeroIsRejected) {
  EnhancementInputs in;
  in.s_hyper = 3.5;
  in.s_thermal = 3.5;
  EXPECT_DOUBLE_EQ(estimate_polarization(in), thermal_polarization(6.0, 297.0));
  in.s_thermal = 0.0;
  EXPECT_THROW(estimate_polarization(in), InvalidArgument);
}

TEST(EnhancementFactor, FrozenBracketsOverLaserTemperature) {
  EnhancementInputs in;
  in.s_hyper = 217.7;
  in.s_thermal = 1.0;
  in.t_l = 360.0;
  EXPECT_NEAR(enhancement_factor(in), 89958.6776859504, 1e-6);
  in.t_l = 400.0;
  EXPECT_NEAR(enhancement_factor(in), 99954.0863177227, 1e-6);
  in.b_em = 0.0;
  EXPECT_THROW(enhancement_factor(in), InvalidArgument);
  in.b_em = 0.0176;
  in.t_r = 0.0;
  EXPECT_THROW(enhancement_factor(in), InvalidArgument);
}

TEST(Estimators, ExactHomogeneityInTheSignalIntegrals) {
  std::mt19937 rng(411u);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  EnhancementInputs in;
  in.s_hyper = 7.3;
  in.s_thermal = 2.1;
  double p0 = estimate_polarization(in), e0 = enhancement_factor(in);
  for (int i = 0; i < 50; ++i) {
    double k = scale(rng);
    EnhancementInputs up = in;
    up.s_hyper *= k;
    EXPECT_DOUBLE_EQ(estimate_polarization(up), k * p0);
    EXPECT_DOUBLE_EQ(enhancement_factor(up), k * e0);
    EnhancementInputs dn = in;
    dn.s_thermal *= k;
    EXPECT_NEAR(estimate_polarization(dn), p0 / k, 1e-15 * p0 / k + 1e-20);
    EXPECT_NEAR(enhancement_factor(dn), e0 / k, 1e-12 * e0 / k);
  }
}

TEST(EnhancementFactor, LinearInEachRatio) {
  EnhancementInputs in;
  in.s_hyper = 5.0;
  in.s_thermal = 2.0;
  double e0 = enhancement_factor(in);
  EnhancementInputs b = in;
  b.b_sm *= 2;
  EXPECT_DOUBLE_EQ(enhancement_factor(b), 2 * e0);
  EnhancementInputs t = in;
  t.t_l *= 2;
  EXPECT_DOUBLE_EQ(enhancement_factor(t), 2 * e0);
}

TEST(TemperatureFromZfs, ExactLinearAnchorAndOperatingPoint) {
  // A 7.4 MHz drop in D is exactly +100 K.
  double t = temperature_from_zfs(2.3626e9, 3.3626e9, 2.870e9, 297.0);
  EXPECT_DOUBLE_EQ(t, 397.0);
  // The measured transition pair gives the heated operating temperature.
  EXPECT_NEAR(temperature_from_zfs(2.370262e9, 3.356738e9), 384.837837837838, 1e-9);
  EXPECT_DOUBLE_EQ(temperature_from_zfs(2.87e9, 2.87e9 + 2, 2.87e9 + 1, 297.0), 297.0);
  EXPECT_THROW(temperature_from_zfs(3.36e9, 2.37e9), InvalidArgument);
  EXPECT_THROW(temperature_from_zfs(-1.0, 2.37e9), InvalidArgument);
}

TEST(TemperatureFromZfs, LinearInTheSplittingOffset) {
  for (double dd : {-10e6, -1e6, 0.0, 2e6}) {
    double t = temperature_from_zfs(2.87e9 + dd - 0.5e9, 2.87e9 + dd + 0.5e9, 2.87e9, 297.0);
    EXPECT_NEAR(t - 297.0, dd / nv_zfs_slope, 1e-9);
  }
}

TEST(LaserModel, CurveValuesAndEdgeCases) {
  LaserModelParams p;
  p.alpha = 3.4;
  p.beta = 2.0;
  p.c = 5.0;
  EXPECT_DOUBLE_EQ(laser_hyper_polarization(p, 0.0), 0.0);
  // alpha*sigma = 102 K of heating at 30 mW/mm^2: denominator 402.
  EXPECT_NEAR(laser_thermal_polarization(p, 30.0), 5.0 / 402.0, 1e-15);
  EXPECT_NEAR(laser_hyper_polarization(p, 30.0), 2.0 * 30.0 * 5.0 / 402.0, 1e-12);
  EXPECT_THROW(laser_hyper_polarization(p, -1.0), InvalidArgument);
  p.alpha = 0.0;
  EXPECT_THROW(laser_hyper_polarization(p, 1.0), InvalidArgument);
}

TEST(LaserModel, CompositeCurveIsStrictlyIncreasingForRandomParameters) {
  // The product beta*sigma*c/(T0+alpha*sigma) has derivative
  // T0*beta*c/(T0+alpha*sigma)^2 > 0, so heating alone never produces a
  // rollover. Checked on random positive parameter draws.
  std::mt19937 rng(2026u);
  std::uniform_real_distribution<double> logp(-3.0, 3.0);
  std::vector<double> densities;
  for (int i = 1; i <= 200; ++i) densities.push_back(0.5 * i);
  for (int draw = 0; draw < 200; ++draw) {
    LaserModelParams p;
    p.alpha = std::pow(10.0, logp(rng));
    p.beta = std::pow(10.0, logp(rng));
    p.c = std::pow(10.0, logp(rng));
    auto curve = laser_composite_curve(p, densities);
    for (size_t i = 1; i < curve.size(); ++i)
      ASSERT_GT(curve[i].p_hyper, curve[i - 1].p_hyper)
          << "draw " << draw << " at density " << curve[i].density;
  }
}
