#pragma once

// Finite alphabets, probability mass functions over them, empirical counts,
// information measures and the q-function statistic family.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace ipt {

/// Probability vectors must sum to one within this absolute tolerance.
inline constexpr double kPmfTolerance = 1e-12;

/// Ordered set of distinct, finite, real-valued letters a_1 < ... < a_m, m >= 2.
class Alphabet {
 public:
  explicit Alphabet(std::vector<double> letters);

  static std::shared_ptr<const Alphabet> make(std::vector<double> letters);
  /// Consecutive integers lo, lo+1, ..., hi.
  static std::shared_ptr<const Alphabet> integer_range(int lo, int hi);

  std::size_t size() const noexcept { return letters_.size(); }
  double operator[](std::size_t i) const noexcept { return letters_[i]; }
  std::span<const double> letters() const noexcept { return letters_; }
  double front() const noexcept { return letters_.front(); }
  double back() const noexcept { return letters_.back(); }

  /// Index of an exact letter match.
  std::optional<std::size_t> find(double letter) const noexcept;
  /// Like find() but throws DataError for out-of-alphabet values.
  std::size_t index_of(double letter) const;

  bool operator==(const Alphabet& other) const = default;

 private:
  std::vector<double> letters_;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

bool same_alphabet(const AlphabetPtr& a, const AlphabetPtr& b) noexcept;

/// A point of the probability simplex over an alphabet.
class Pmf {
 public:
  /// Validates non-negativity and |sum - 1| <= kPmfTolerance; never renormalizes.
  Pmf(AlphabetPtr alphabet, std::vector<double> probs);

  static Pmf uniform(AlphabetPtr alphabet);
  static Pmf point_mass(AlphabetPtr alphabet, std::size_t index);
  /// Normalizes non-negative weights (at least one positive) into a Pmf.
  static Pmf from_weights(AlphabetPtr alphabet, std::vector<double> weights);

  const Alphabet& alphabet() const noexcept { return *alphabet_; }
  const AlphabetPtr& alphabet_ptr() const noexcept { return alphabet_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }
  std::size_t size() const noexcept { return probs_.size(); }

  double mean() const noexcept;
  double variance() const noexcept;

  bool operator==(const Pmf& other) const;

 private:
  AlphabetPtr alphabet_;
  std::vector<double> probs_;
};

/// Letter tallies of a finite sample; the induced pmf lives on the 1/n lattice.
class EmpiricalPmf {
 public:
  EmpiricalPmf(AlphabetPtr alphabet, std::vector<std::uint64_t> counts);

  const Alphabet& alphabet() const noexcept { return *alphabet_; }
  const AlphabetPtr& alphabet_ptr() const noexcept { return alphabet_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t n() const noexcept { return n_; }
  Pmf to_pmf() const;

 private:
  AlphabetPtr alphabet_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

EmpiricalPmf empirical_pmf(std::span<const double> samples, AlphabetPtr alphabet);

/// I(f||g) in nats. 0 ln 0 = 0; +infinity when f puts mass where g has none.
double kl_divergence(const Pmf& f, const Pmf& g);
double kl_divergence(std::span<const double> f, std::span<const double> g);

double l1_distance(const Pmf& f, const Pmf& g);
double l1_distance(std::span<const double> f, std::span<const double> g);

enum class QKind { kMean, kVariance, kLogLikelihoodRatio };

const char* to_string(QKind kind) noexcept;

/// Quasiconcave statistic over the simplex.
///
/// Values are centered: q(f) = raw(f) - offset, where raw is the mean, the
/// variance, or sum_a f(a) ln(f1(a)/f0(a)). Thresholds stay in raw units at
/// the configuration level and are shifted by offset() internally, so that
/// q(f0) < 0 < q_floor holds for the centered statistic.
class QFunction {
 public:
  static QFunction mean(AlphabetPtr alphabet, double offset = 0.0);
  static QFunction variance(AlphabetPtr alphabet, double offset = 0.0);
  /// Requires f0 and f1 strictly positive on a shared alphabet.
  static QFunction log_likelihood_ratio(const Pmf& f0, const Pmf& f1);

  QKind kind() const noexcept { return kind_; }
  const Alphabet& alphabet() const noexcept { return *alphabet_; }
  const AlphabetPtr& alphabet_ptr() const noexcept { return alphabet_; }
  double offset() const noexcept { return offset_; }

  /// Centered value.
  double operator()(std::span<const double> probs) const;
  double operator()(const Pmf& f) const;
  /// Uncentered value.
  double raw(std::span<const double> probs) const;

  /// True for the kinds whose raw value is sum_a f(a) w(a).
  bool is_linear() const noexcept { return kind_ != QKind::kVariance; }
  /// Per-letter weights w(a) of a linear q (letters for Mean, log-ratios for LLR).
  std::span<const double> weights() const noexcept { return weights_; }

  /// l1 Lipschitz constant; the user override when one was set.
  double lipschitz() const noexcept { return lipschitz_; }
  QFunction with_lipschitz(double lipschitz) const;
  QFunction with_offset(double offset) const;

  /// sup_f q(f) and inf_f q(f) over the whole simplex (centered).
  double supremum() const noexcept;
  double infimum() const noexcept;

 private:
  QFunction(QKind kind, AlphabetPtr alphabet, double offset, std::vector<double> weights);

  QKind kind_;
  AlphabetPtr alphabet_;
  double offset_ = 0.0;
  std::vector<double> weights_;
  double lipschitz_ = 0.0;
};

/// Computed Lipschitz constant for q's kind over the given alphabet.
double lipschitz_constant(QKind kind, const Alphabet& alphabet,
                          std::span<const double> llr_weights = {});

}  // namespace ipt
