#include <gtest/gtest.h>

#include <cmath>

#include "ipt/bounds.hpp"
#include "ipt/errors.hpp"

using namespace ipt;

namespace {

BoundInputs inputs(std::size_t n, std::size_t m, double cs_gap, double c_d, double floor_gap = 0.25) {
  BoundInputs b;
  b.n = n;
  b.m = m;
  b.q0 = 0.0;
  b.c_s = cs_gap;
  b.c_d = c_d;
  b.q_floor = floor_gap;
  b.lipschitz = 1.0;
  return b;
}

}  // namespace

TEST(FaBound, Examples) {
  const auto v = fa_bound(inputs(25, 3, 0.1, 0.1));
  EXPECT_NEAR(v.raw, std::pow(26.0, 3) * std::exp(-2.625), 1e-9);
  EXPECT_NEAR(v.raw, 1.27e3, 5.0);
  EXPECT_EQ(v.clamped, 1.0);
  EXPECT_NEAR(fa_bound(inputs(25, 3, -0.3, 0.0)).raw, std::pow(26.0, 3), 1e-8);
  EXPECT_EQ(fa_bound(inputs(25, 3, 0.1, 1e6)).raw, 0.0);
  // Only the gap c_s - q0 matters.
  auto shifted = inputs(25, 3, 0.1, 0.1);
  shifted.q0 = -0.4;
  shifted.c_s = -0.3;
  EXPECT_NEAR(fa_bound(shifted).raw, fa_bound(inputs(25, 3, 0.1, 0.1)).raw, 1e-9);
}

TEST(MdBound, Examples) {
  auto b = inputs(25, 3, 0.1, 0.0025);
  const double expect = 17576.0 * std::exp(-25.0 * std::pow(0.15 / std::sqrt(2.0) - 0.05, 2));
  EXPECT_NEAR(md_bound(b).raw, expect, 1e-9);
  EXPECT_NEAR(std::pow(0.15 / std::sqrt(2.0) - 0.05, 2) * 25, 0.0786, 1e-4);

  auto plain = inputs(40, 3, 0.0, 0.0);
  EXPECT_NEAR(md_bound(plain).raw, std::pow(41.0, 3) * std::exp(-40 * 0.25 * 0.25 / 2), 1e-9);

  EXPECT_THROW(md_bound(inputs(25, 3, 0.2, 0.01)), PreconditionViolation);
  EXPECT_THROW(md_bound(inputs(25, 3, 0.25, 0.0)), PreconditionViolation);
}

TEST(TcdBounds, Examples) {
  // Small n with a large alphabet drives nu below zero.
  const auto small = tcd_bounds(inputs(5, 50, 0.05, 0.001));
  EXPECT_TRUE(small.vacuous);
  EXPECT_LT(small.nu, 0.0);

  BoundInputs b = inputs(79, 11, 1.0, 0.1, 4.0);
  b.lipschitz = 5.0;
  b.n_alpha = 200;
  const auto r = tcd_bounds(b);
  const double pen = 11.0 * std::log(82.0 / 2.0) / 80.0;
  EXPECT_NEAR(r.nu, 0.05 + 1.0 / (4 * 25.0) - pen, 1e-12);
  EXPECT_NEAR(r.eta, std::pow(3.0 / 10.0 - std::sqrt(0.05), 2) - pen, 1e-12);
  EXPECT_EQ(r.epochs, 5u);

  BoundInputs one = inputs(399, 3, 0.5, 0.05, 2.0);
  one.n_alpha = 200;
  const auto single = tcd_bounds(one);
  EXPECT_EQ(single.epochs, 1u);
  EXPECT_FALSE(single.vacuous);
  EXPECT_NEAR(single.fa_window.raw, std::exp(-single.nu * 399), 1e-15);
}

TEST(WaldRoot, Examples) {
  const auto a = Alphabet::make({-1.0, 0.0, 1.0});
  EXPECT_NEAR(wald_root(Pmf(a, {0.5, 0.2, 0.3}), QFunction::mean(a)), std::log(5.0 / 3.0), 1e-12);
  EXPECT_THROW(wald_root(Pmf::uniform(a), QFunction::mean(a)), InvalidArgument);
  const auto b = Alphabet::make({-1.0, 1.0});
  EXPECT_NEAR(wald_root(Pmf(b, {0.75, 0.25}), QFunction::mean(b)), std::log(3.0), 1e-12);
  EXPECT_THROW(wald_root(Pmf(a, {0.5, 0.5, 0.0}), QFunction::mean(a)), InvalidArgument);
  // Offset 0.125 on uniform: root of (e^{-v} + 1 + e^{v}) / 3 = e^{0.125 v}.
  const double v = wald_root(Pmf::uniform(a), QFunction::mean(a, 0.125));
  EXPECT_NEAR((std::exp(-v) + 1 + std::exp(v)) / 3, std::exp(0.125 * v), 1e-12);
}

TEST(ArlBound, DirectFormula) {
  BoundInputs b;
  b.m = 3;
  b.lipschitz = 1.0;
  b.q0 = -0.2;
  b.q_floor = 0.25;
  b.rho = 1.0;
  b.c_d = 0.2;
  b.c_s = 20.0;
  const double v = 0.510826;
  const auto r = arl_bound(b, v);
  const double span = 2 * 20.0 / 0.25;
  const double first = 8.0 * std::exp(-0.4 * 20.0);
  const double second = std::pow(span + 1, 3) * std::exp(-span * 0.2) /
                        (1 - std::pow(span + 1, 3 * 0.25 / (2 * 20.0)) * std::exp(-0.2));
  EXPECT_NEAR(r.value / (std::exp(v * 20.0) / (first + second)), 1.0, 1e-12);
  EXPECT_GT(r.value, 0.0);
  EXPECT_NEAR(r.asymptote, std::exp((v + 0.4) * 20.0), 1e-6 * r.asymptote);

  double last_gap = INFINITY;
  for (double c : {20.0, 40.0, 80.0}) {
    b.c_s = c;
    const auto x = arl_bound(b, v);
    const double gap = std::abs(std::log(x.value) - std::log(x.asymptote)) / std::log(x.asymptote);
    EXPECT_LT(gap, last_gap);
    last_gap = gap;
  }

  b.c_d = 0.01;
  EXPECT_THROW(arl_bound(b, v), PreconditionViolation);
  b.c_d = 0.2;
  b.c_s = 0.5;  // geometric ratio above one
  EXPECT_THROW(arl_bound(b, v), PreconditionViolation);
  const auto a = Alphabet::make({-1.0, 0.0, 1.0});
  b.c_s = 20.0;
  EXPECT_THROW(arl_bound(b, v, QFunction::variance(a)), Unsupported);
}

TEST(WaddBound, Examples) {
  EXPECT_EQ(wadd_bound(10.0, 0.25), 80.0);
  EXPECT_EQ(wadd_bound(0.0, 0.25), 0.0);
  EXPECT_THROW(wadd_bound(1.0, 0.0), InvalidArgument);
  EXPECT_NEAR(lorden_wadd(std::exp(1.0), 2.0, 1.0, -1.0, 1.0), 0.5, 1e-15);
  EXPECT_THROW(lorden_wadd(1.0, 2.0, 1.0, -1.0, 1.0), InvalidArgument);
}

TEST(LordenWadd, RecombinesArlAndWadd) {
  // With gamma at the ARL asymptote, ln gamma = (v* + 2|q0|/L^2) c_s and the
  // Lorden delay equals the WADD bound 2 c_s / q_floor.
  const double v = 0.510826, q0 = -0.2, qf = 0.25, c = 20.0;
  const double gamma = std::exp((v + 2 * 0.2) * c);
  EXPECT_NEAR(lorden_wadd(gamma, v, qf, q0, 1.0), wadd_bound(c, qf), 1e-9);
}
