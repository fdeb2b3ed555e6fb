#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "radwave/dyadic.hpp"
#include "radwave/models.hpp"

using namespace radwave;

TEST(Bump, SupportPositivityAndUnity) {
  const auto phi = make_bump();
  EXPECT_EQ(phi(3.0), 0.0);
  EXPECT_EQ(phi(0.5), 0.0);
  EXPECT_EQ(phi(2.0), 0.0);
  EXPECT_GT(phi(1.0), 0.0);
  for (double r = 0.51; r < 1.99; r += 0.01) EXPECT_GT(phi(r), 0.0) << r;
  // At r = 1 only j in {-1, 0, 1} can contribute; summing a wide window agrees.
  double brute = 0.0;
  for (int j = -40; j <= 40; ++j) brute += phi(std::ldexp(1.0, j));
  EXPECT_NEAR(phi(1.0) + phi(0.5) + phi(2.0), 1.0, 1e-15);
  EXPECT_NEAR(brute, 1.0, 1e-15);
}

TEST(PhiJ, SupportAndScaling) {
  EXPECT_EQ(phi_j(0, 3.0), 0.0);
  EXPECT_GT(phi_j(-1, 3.0), 0.0);
  EXPECT_EQ(phi_j(-1, 3.0), lp_bump(1.5));
  for (int j = -20; j <= 20; ++j) EXPECT_EQ(phi_j(j, std::ldexp(1.0, -j)), lp_bump(1.0));
  EXPECT_THROW(phi_j(0, 0.0), std::invalid_argument);
  EXPECT_THROW(phi_j(0, -1.0), std::invalid_argument);
}

TEST(PhiJ, SupportExactAndDilationCovariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lg(-25.0, 25.0);
  for (int k = 0; k < 20000; ++k) {
    const double r = std::exp2(lg(rng));
    for (int j = -20; j <= 20; ++j) {
      const double v = phi_j(j, r);
      if (r <= std::exp2(-j - 1) || r >= std::exp2(-j + 1)) EXPECT_EQ(v, 0.0);
      EXPECT_EQ(v, phi_j(0, std::ldexp(r, j)));
    }
  }
}

TEST(PartitionSum, Examples) {
  EXPECT_NEAR(partition_sum(0.7), 1.0, 1e-12);
  EXPECT_NEAR(partition_sum(std::exp2(20)), 1.0, 1e-12);
  EXPECT_NEAR(partition_sum(std::exp2(-20)), 1.0, 1e-12);
  EXPECT_NEAR(partition_sum(0.7, -5, 5), 1.0, 1e-12);
}

TEST(PartitionSum, LogSpacedProperty) {
  for (int k = 0; k < 200; ++k) {
    const double r = std::exp2(-20.0 + 40.0 * k / 199.0);
    EXPECT_LE(std::abs(partition_sum(r, -25, 25) - 1.0), 1e-12) << r;
  }
}

TEST(PartitionSum, WindowTooSmall) {
  EXPECT_THROW(partition_sum(0.7, 3, 10), WindowTooSmall);
  EXPECT_THROW(partition_sum(0.7, -10, -1), WindowTooSmall);
  EXPECT_THROW(partition_sum(-1.0), std::invalid_argument);
}

TEST(ShortRange, ZeroAndHomogeneity) {
  const Sampler zero = [](double, double) { return cplx{}; };
  auto rep = short_range_norm(zero, 0.5, {.delta_a = 1e-9});
  EXPECT_EQ(rep.value, 0.0);
  EXPECT_TRUE(rep.satisfied);
  EXPECT_TRUE(rep.warnings.empty());

  const Sampler a = [](double, double r) { return cplx(0.0, std::pow(1.0 + r, -2.0)); };
  const double base = short_range_norm(a, 0.5).value;
  for (double c : {0.0, 0.5, 3.0}) {
    const Sampler ca = [&](double t, double r) { return c * a(t, r); };
    EXPECT_NEAR(short_range_norm(ca, 0.5).value, c * base, 1e-14 * base);
  }
}

TEST(ShortRange, IndicatorMatchesBruteForce) {
  const Sampler ind = [](double, double r) { return cplx(0.0, (r >= 1.0 && r <= 2.0) ? 1.0 : 0.0); };
  ShortRangeOptions o;
  o.j_min = -3;
  o.j_max = 3;
  o.r_samples_per_shell = 1025;
  const double got = short_range_norm(ind, 1.0, o).value;
  const double want = oracle::dyadic_sum([](double r) { return (r >= 1.0 && r <= 2.0) ? 1.0 : 0.0; }, 1.0, -3, 3);
  EXPECT_NEAR(got, want, 1e-6);
  EXPECT_NEAR(got, std::sqrt(2.0) + 2.0 * std::sqrt(5.0), 1e-6);
}

TEST(ShortRange, Subadditive) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(-2, 2), pw(1.6, 4), c(0.2, 5);
  for (int k = 0; k < 20; ++k) {
    const double l1 = lam(rng), p1 = pw(rng), l2 = lam(rng), r0 = c(rng);
    const Sampler A = [=](double, double r) { return cplx(0, l1 * std::pow(1 + r, -p1)); };
    const Sampler B = [=](double, double r) { return cplx(0, l2 * poly_bump((r - r0) / 0.4)); };
    const Sampler AB = [=](double t, double r) { return A(t, r) + B(t, r); };
    EXPECT_LE(short_range_norm(AB, 0.5).value,
              short_range_norm(A, 0.5).value + short_range_norm(B, 0.5).value + 1e-14);
  }
}

TEST(ShortRange, InversePowerTailsDecay) {
  const Sampler a = [](double, double r) { return cplx(0.0, std::pow(1.0 + r, -2.5)); };
  const auto rep = short_range_norm(a, 0.5);
  EXPECT_TRUE(rep.warnings.empty());
  // Geometric decay in both directions: 2^{-(p-1-eps)} per step for large r, 2^{-1} for small r.
  const auto term = [&](int j) { return rep.per_j[j - rep.per_j.front().first].second; };
  for (int j = -18; j <= -10; ++j) EXPECT_NEAR(term(j - 1) / term(j), std::exp2(-(2.5 - 1.0 - 0.5)), 0.05);
  for (int j = 10; j <= 30; ++j) EXPECT_NEAR(term(j + 1) / term(j), 0.5, 0.01);
  double sum = 0.0;
  for (const auto& [j, t] : rep.per_j) {
    EXPECT_GE(t, 0.0);
    sum += t;
  }
  EXPECT_DOUBLE_EQ(sum, rep.value);
}

TEST(ShortRange, WarnsOnTruncatedWindow) {
  const Sampler a = [](double, double r) { return cplx(0.0, std::pow(1.0 + r, -2.0)); };
  ShortRangeOptions o;
  o.j_min = -2;
  o.j_max = 2;
  EXPECT_FALSE(short_range_norm(a, 0.5, o).warnings.empty());
}

TEST(ShortRange, UniformInTime) {
  const Sampler a = [](double t, double r) { return cplx(0.0, std::cos(t) * std::pow(1.0 + r, -2.0)); };
  ShortRangeOptions only_zero;
  ShortRangeOptions only_half_pi;
  only_half_pi.t_samples = {M_PI / 2};
  ShortRangeOptions both;
  both.t_samples = {0.0, M_PI / 2, M_PI};
  EXPECT_NEAR(short_range_norm(a, 0.5, only_half_pi).value, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(short_range_norm(a, 0.5, both).value, short_range_norm(a, 0.5, only_zero).value);
}
