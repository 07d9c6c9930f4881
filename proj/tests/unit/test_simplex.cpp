#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ipt/errors.hpp"
#include "ipt/random.hpp"
#include "ipt/simplex.hpp"

using namespace ipt;

namespace {

AlphabetPtr ternary() { return Alphabet::make({-1.0, 0.0, 1.0}); }
AlphabetPtr binary() { return Alphabet::make({0.0, 1.0}); }

// Direct sum, kept separate from the library's implementation.
double kl_oracle(const std::vector<double>& f, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    if (g[i] == 0.0) return INFINITY;
    s += f[i] * std::log(f[i] / g[i]);
  }
  return s;
}

std::vector<double> random_probs(Engine& rng, std::size_t m) {
  std::vector<double> g(m);
  double total = 0.0;
  for (auto& x : g) total += (x = -std::log(1.0 - uniform01(rng)));
  for (auto& x : g) x /= total;
  return g;
}

}  // namespace

TEST(Alphabet, RejectsBadLetters) {
  EXPECT_THROW(Alphabet({1.0}), InvalidArgument);
  EXPECT_THROW(Alphabet({0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(Alphabet({1.0, 0.0}), InvalidArgument);
  EXPECT_THROW(Alphabet({0.0, INFINITY}), InvalidArgument);
  EXPECT_EQ(Alphabet::integer_range(-5, 5)->size(), 11u);
}

TEST(Pmf, ValidatesWithoutRenormalizing) {
  EXPECT_NO_THROW(Pmf(ternary(), {0.2, 0.3, 0.5}));
  EXPECT_THROW(Pmf(ternary(), {0.2, 0.3, 0.5 + 1e-9}), InvalidArgument);
  EXPECT_THROW(Pmf(ternary(), {-0.1, 0.6, 0.5}), InvalidArgument);
  EXPECT_THROW(Pmf(ternary(), {0.5, 0.5}), InvalidArgument);
}

TEST(KlDivergence, Examples) {
  const auto a = ternary();
  EXPECT_EQ(kl_divergence(Pmf::uniform(a), Pmf::uniform(a)), 0.0);
  EXPECT_NEAR(kl_divergence(Pmf(binary(), {0.5, 0.5}), Pmf(binary(), {0.25, 0.75})), 0.5 * std::log(4.0 / 3.0),
              1e-15);
  EXPECT_NEAR(0.5 * std::log(4.0 / 3.0), 0.143841, 1e-6);
  EXPECT_NEAR(kl_divergence(Pmf(binary(), {1.0, 0.0}), Pmf(binary(), {0.5, 0.5})), std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isinf(kl_divergence(Pmf(binary(), {0.5, 0.5}), Pmf(binary(), {1.0, 0.0}))));
}

TEST(KlDivergence, AlphabetMismatch) {
  EXPECT_THROW(kl_divergence(Pmf::uniform(binary()), Pmf::uniform(ternary())), InvalidArgument);
  EXPECT_THROW(l1_distance(Pmf::uniform(binary()), Pmf::uniform(Alphabet::make({0.0, 2.0}))), InvalidArgument);
}

TEST(L1Distance, Examples) {
  EXPECT_EQ(l1_distance(Pmf::uniform(ternary()), Pmf::uniform(ternary())), 0.0);
  EXPECT_DOUBLE_EQ(l1_distance(Pmf(binary(), {0.5, 0.5}), Pmf(binary(), {0.25, 0.75})), 0.5);
  EXPECT_DOUBLE_EQ(l1_distance(Pmf(binary(), {1.0, 0.0}), Pmf(binary(), {0.0, 1.0})), 2.0);
}

TEST(EmpiricalPmf, Examples) {
  const auto a = ternary();
  const std::vector<double> xs{-1.0, 0.0, 0.0, 1.0};
  const Pmf f = empirical_pmf(xs, a).to_pmf();
  EXPECT_EQ(f, Pmf(a, {0.25, 0.5, 0.25}));
  const std::vector<double> same(7, -1.0);
  EXPECT_EQ(empirical_pmf(same, a).to_pmf(), Pmf::point_mass(a, 0));
  const std::vector<double> bad{0.0, 2.0};
  EXPECT_THROW(empirical_pmf(bad, a), DataError);
  EXPECT_THROW(empirical_pmf(std::vector<double>{}, a), InvalidArgument);
}

TEST(EmpiricalPmf, ThousandSampleDrawIsClose) {
  // Probability of an l1 deviation above 0.15 is below 0.01 at n = 1000; a
  // fixed seed keeps the check deterministic.
  const auto a = ternary();
  const Pmf f0(a, {0.2, 0.3, 0.5});
  Engine rng(11);
  int far = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> xs;
    AliasSampler s(f0.probs());
    for (int i = 0; i < 1000; ++i) xs.push_back((*a)[s(rng)]);
    far += l1_distance(empirical_pmf(xs, a).to_pmf(), f0) > 0.15;
  }
  EXPECT_LE(far, 1);
}

TEST(EmpiricalPmf, LatticeEntries) {
  const auto a = Alphabet::integer_range(0, 4);
  Engine rng(3);
  for (int n : {1, 7, 25, 80}) {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(static_cast<double>(rng() % 5));
    const auto e = empirical_pmf(xs, a);
    const Pmf f = e.to_pmf();
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_NEAR(f[i] * n, std::round(f[i] * n), 1e-12);
      EXPECT_NEAR(f[i], static_cast<double>(e.counts()[i]) / n, 1e-15);
    }
  }
}

TEST(QFunction, MeanExamples) {
  const auto a = ternary();
  const auto q = QFunction::mean(a);
  EXPECT_EQ(q(Pmf::uniform(a)), 0.0);
  EXPECT_NEAR(q(Pmf(a, {0.21624, 0.31752, 0.46624})), 0.25, 1e-12);
  EXPECT_NEAR(QFunction::mean(a, 0.125)(Pmf::uniform(a)), -0.125, 1e-15);
}

TEST(QFunction, VarianceExample) {
  const auto a = ternary();
  const auto q = QFunction::variance(a, 0.5);
  EXPECT_NEAR(q(Pmf(a, {0.25, 0.5, 0.25})), 0.0, 1e-15);
  EXPECT_NEAR(q.raw(Pmf(a, {0.5, 0.0, 0.5}).probs()), 1.0, 1e-15);
}

TEST(QFunction, LlrAtF1IsKl) {
  const auto a = ternary();
  const Pmf f0(a, {0.5, 0.3, 0.2});
  const Pmf f1(a, {0.2, 0.3, 0.5});
  const auto q = QFunction::log_likelihood_ratio(f0, f1);
  EXPECT_NEAR(q(f1), kl_oracle({0.2, 0.3, 0.5}, {0.5, 0.3, 0.2}), 1e-15);
  // I(f||f0) - I(f||f1) for an arbitrary f.
  const std::vector<double> f{0.1, 0.6, 0.3};
  EXPECT_NEAR(q(Pmf(a, f)), kl_oracle(f, {0.5, 0.3, 0.2}) - kl_oracle(f, {0.2, 0.3, 0.5}), 1e-15);
  EXPECT_THROW(QFunction::log_likelihood_ratio(Pmf(a, {0.5, 0.5, 0.0}), f1), InvalidArgument);
}

TEST(Lipschitz, MeanExamples) {
  EXPECT_EQ(lipschitz_constant(QKind::kMean, *ternary()), 1.0);
  EXPECT_EQ(lipschitz_constant(QKind::kMean, *binary()), 0.5);
  for (double c : {-3.0, 0.5, 17.0}) {
    EXPECT_DOUBLE_EQ(lipschitz_constant(QKind::kMean, Alphabet({c - 1, c, c + 1})), 1.0);
  }
  EXPECT_EQ(QFunction::mean(ternary()).with_lipschitz(2.5).lipschitz(), 2.5);
}

TEST(Lipschitz, VarianceCoversSimplexGrid) {
  // Gradient half-span maximized over a 0.01 simplex grid; the computed
  // constant must not be smaller.
  for (const auto& letters : {std::vector<double>{-1, 0, 1}, std::vector<double>{0, 1, 3}, std::vector<double>{-2, 0.5, 4}}) {
    const Alphabet a(letters);
    double grid = 0.0;
    for (int i = 0; i <= 100; ++i) {
      for (int j = 0; i + j <= 100; ++j) {
        const double p[3] = {i / 100.0, j / 100.0, (100 - i - j) / 100.0};
        double mu = 0.0;
        for (int k = 0; k < 3; ++k) mu += p[k] * letters[k];
        double hi = -INFINITY, lo = INFINITY;
        for (double x : letters) {
          hi = std::max(hi, x * x - 2 * mu * x);
          lo = std::min(lo, x * x - 2 * mu * x);
        }
        grid = std::max(grid, (hi - lo) / 2);
      }
    }
    EXPECT_GE(lipschitz_constant(QKind::kVariance, a), grid - 1e-12);
  }
}

TEST(Properties, NonNegativityPinskerLipschitzAffinity) {
  Engine rng(2024);
  const auto a = Alphabet::make({-2.0, -0.5, 0.0, 1.0, 3.0});
  const Pmf f0(a, random_probs(rng, 5));
  const Pmf f1(a, random_probs(rng, 5));
  const QFunction qs[] = {QFunction::mean(a, 0.3), QFunction::variance(a, 1.0), QFunction::log_likelihood_ratio(f0, f1)};
  for (int t = 0; t < 1000; ++t) {
    const Pmf f(a, random_probs(rng, 5));
    const Pmf g(a, random_probs(rng, 5));
    const double kl = kl_divergence(f, g);
    const double l1 = l1_distance(f, g);
    EXPECT_GE(kl, 0.0);
    EXPECT_GE(kl, l1 * l1 / 2.0 - 1e-12);
    for (const auto& q : qs) EXPECT_LE(std::abs(q(f) - q(g)), q.lipschitz() * l1 + 1e-9);
    const double lam = uniform01(rng);
    std::vector<double> mix(5);
    for (std::size_t i = 0; i < 5; ++i) mix[i] = lam * f[i] + (1 - lam) * g[i];
    EXPECT_NEAR(qs[2](mix), lam * qs[2](f) + (1 - lam) * qs[2](g), 1e-12);
  }
  EXPECT_EQ(kl_divergence(f0, f0), 0.0);
}
