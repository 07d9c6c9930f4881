#include "ipt/random.hpp"

#include <cmath>
#include <numbers>

#include "ipt/errors.hpp"

namespace ipt {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coordinates) noexcept {
  std::uint64_t state = master;
  std::uint64_t h = splitmix64(state);
  for (std::uint64_t c : coordinates) {
    state = h ^ c;
    h = splitmix64(state);
  }
  return h;
}

double uniform01(Engine& rng) noexcept { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(Engine& rng) noexcept {
  // Box-Muller; 1 - u keeps the logarithm finite.
  const double u = 1.0 - uniform01(rng);
  const double v = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

double gamma_variate(Engine& rng, double shape) {
  if (!(shape > 0.0)) throw InvalidArgument("gamma shape must be positive");
  if (shape == 1.0) return -std::log(1.0 - uniform01(rng));
  if (shape < 1.0) {
    const double u = 1.0 - uniform01(rng);
    return gamma_variate(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

AliasSampler::AliasSampler(std::span<const double> probs) : prob_(probs.size()), alias_(probs.size()) {
  const std::size_t m = probs.size();
  if (m == 0) throw InvalidArgument("alias table needs a non-empty pmf");
  std::vector<double> scaled(m);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < m; ++i) {
    scaled[i] = probs[i] * static_cast<double>(m);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::uint32_t i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  // Leftovers here only differ from 1 by rounding.
  for (std::uint32_t i : small) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
}

std::uint32_t AliasSampler::operator()(Engine& rng) const noexcept {
  const double u = uniform01(rng) * static_cast<double>(prob_.size());
  auto i = static_cast<std::uint32_t>(u);
  if (i >= prob_.size()) i = static_cast<std::uint32_t>(prob_.size() - 1);
  return (u - i) < prob_[i] ? i : alias_[i];
}

void AliasSampler::fill(Engine& rng, std::size_t count, std::vector<std::uint32_t>& out) const {
  out.reserve(out.size() + count);
  for (std::size_t i = 0; i < count; ++i) out.push_back((*this)(rng));
}

Pmf dirichlet(Engine& rng, const AlphabetPtr& alphabet, double alpha) {
  std::vector<double> g(alphabet->size());
  for (double& x : g) x = gamma_variate(rng, alpha);
  return Pmf::from_weights(alphabet, std::move(g));
}

}  // namespace ipt
