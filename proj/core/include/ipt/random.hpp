#pragma once

// Seeding and sampling helpers. All randomness flows from a master seed
// through splitmix64 so that every trial owns an independent, reproducible
// std::mt19937_64 stream.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "ipt/simplex.hpp"

namespace ipt {

using Engine = std::mt19937_64;

/// One splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Order-sensitive hash of a master seed and stream coordinates.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coordinates) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Engine& rng) noexcept;
double standard_normal(Engine& rng) noexcept;
/// Gamma(shape, 1) by Marsaglia-Tsang.
double gamma_variate(Engine& rng, double shape);

/// Vose alias table: O(1) draws of letter indices from a pmf.
class AliasSampler {
 public:
  explicit AliasSampler(std::span<const double> probs);

  std::uint32_t operator()(Engine& rng) const noexcept;
  std::size_t size() const noexcept { return prob_.size(); }

  /// Appends `count` draws to `out`.
  void fill(Engine& rng, std::size_t count, std::vector<std::uint32_t>& out) const;

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

/// Dirichlet(alpha, ..., alpha) draw over the alphabet.
Pmf dirichlet(Engine& rng, const AlphabetPtr& alphabet, double alpha = 1.0);

}  // namespace ipt
