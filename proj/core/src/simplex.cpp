#include "ipt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "ipt/errors.hpp"

namespace ipt {

namespace {

void require_same(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) {
    throw InvalidArgument("pmfs are over different alphabets");
  }
}

void require_same(const Pmf& f, const Pmf& g) {
  if (!same_alphabet(f.alphabet_ptr(), g.alphabet_ptr())) {
    throw InvalidArgument("pmfs are over different alphabets");
  }
}

double dot(std::span<const double> f, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * w[i];
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Alphabet

Alphabet::Alphabet(std::vector<double> letters) : letters_(std::move(letters)) {
  if (letters_.size() < 2) {
    throw InvalidArgument("alphabet needs at least two letters");
  }
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (!std::isfinite(letters_[i])) throw InvalidArgument("alphabet letters must be finite");
    if (i > 0 && !(letters_[i - 1] < letters_[i])) {
      throw InvalidArgument("alphabet letters must be strictly increasing");
    }
  }
}

std::shared_ptr<const Alphabet> Alphabet::make(std::vector<double> letters) {
  return std::make_shared<const Alphabet>(std::move(letters));
}

std::shared_ptr<const Alphabet> Alphabet::integer_range(int lo, int hi) {
  std::vector<double> letters;
  for (int a = lo; a <= hi; ++a) letters.push_back(a);
  return make(std::move(letters));
}

std::optional<std::size_t> Alphabet::find(double letter) const noexcept {
  auto it = std::lower_bound(letters_.begin(), letters_.end(), letter);
  if (it == letters_.end() || *it != letter) return std::nullopt;
  return static_cast<std::size_t>(it - letters_.begin());
}

std::size_t Alphabet::index_of(double letter) const {
  if (auto i = find(letter)) return *i;
  std::ostringstream os;
  os << "sample " << letter << " is not in the alphabet";
  throw DataError(os.str());
}

bool same_alphabet(const AlphabetPtr& a, const AlphabetPtr& b) noexcept {
  return a == b || (a && b && *a == *b);
}

// ---------------------------------------------------------------------------
// Pmf

Pmf::Pmf(AlphabetPtr alphabet, std::vector<double> probs)
    : alphabet_(std::move(alphabet)), probs_(std::move(probs)) {
  if (!alphabet_) throw InvalidArgument("pmf needs an alphabet");
  if (probs_.size() != alphabet_->size()) {
    throw InvalidArgument("pmf length does not match alphabet size");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("pmf entries must lie in [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > kPmfTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "pmf does not sum to one (sum = " << total << ")";
    throw InvalidArgument(os.str());
  }
}

Pmf Pmf::uniform(AlphabetPtr alphabet) {
  const std::size_t m = alphabet->size();
  return from_weights(std::move(alphabet), std::vector<double>(m, 1.0));
}

Pmf Pmf::point_mass(AlphabetPtr alphabet, std::size_t index) {
  std::vector<double> p(alphabet->size(), 0.0);
  p.at(index) = 1.0;
  return Pmf(std::move(alphabet), std::move(p));
}

Pmf Pmf::from_weights(AlphabetPtr alphabet, std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("weights must not all be zero");
  for (double& w : weights) w /= total;
  return Pmf(std::move(alphabet), std::move(weights));
}

double Pmf::mean() const noexcept { return dot(probs_, alphabet_->letters()); }

double Pmf::variance() const noexcept {
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double a = (*alphabet_)[i];
    m1 += probs_[i] * a;
    m2 += probs_[i] * a * a;
  }
  return m2 - m1 * m1;
}

bool Pmf::operator==(const Pmf& other) const {
  return same_alphabet(alphabet_, other.alphabet_) && probs_ == other.probs_;
}

// ---------------------------------------------------------------------------
// EmpiricalPmf

EmpiricalPmf::EmpiricalPmf(AlphabetPtr alphabet, std::vector<std::uint64_t> counts)
    : alphabet_(std::move(alphabet)), counts_(std::move(counts)) {
  if (!alphabet_ || counts_.size() != alphabet_->size()) {
    throw InvalidArgument("count vector does not match alphabet size");
  }
  n_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  if (n_ == 0) throw InvalidArgument("empirical pmf needs at least one sample");
}

Pmf EmpiricalPmf::to_pmf() const {
  std::vector<double> p(counts_.size());
  const double n = static_cast<double>(n_);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(counts_[i]) / n;
  return Pmf::from_weights(alphabet_, std::move(p));
}

EmpiricalPmf empirical_pmf(std::span<const double> samples, AlphabetPtr alphabet) {
  if (samples.empty()) throw InvalidArgument("empirical pmf needs at least one sample");
  std::vector<std::uint64_t> counts(alphabet->size(), 0);
  for (double x : samples) ++counts[alphabet->index_of(x)];
  return EmpiricalPmf(std::move(alphabet), std::move(counts));
}

// ---------------------------------------------------------------------------
// Information measures

double kl_divergence(std::span<const double> f, std::span<const double> g) {
  require_same(f, g);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] <= 0.0) continue;
    if (g[i] <= 0.0) return std::numeric_limits<double>::infinity();
    s += f[i] * std::log(f[i] / g[i]);
  }
  // Rounding can leave tiny negatives when f == g.
  return std::max(s, 0.0);
}

double kl_divergence(const Pmf& f, const Pmf& g) {
  require_same(f, g);
  return kl_divergence(f.probs(), g.probs());
}

double l1_distance(std::span<const double> f, std::span<const double> g) {
  require_same(f, g);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i] - g[i]);
  return s;
}

double l1_distance(const Pmf& f, const Pmf& g) {
  require_same(f, g);
  return l1_distance(f.probs(), g.probs());
}

// ---------------------------------------------------------------------------
// QFunction

const char* to_string(QKind kind) noexcept {
  switch (kind) {
    case QKind::kMean: return "mean";
    case QKind::kVariance: return "variance";
    case QKind::kLogLikelihoodRatio: return "llr";
  }
  return "unknown";
}

double lipschitz_constant(QKind kind, const Alphabet& alphabet, std::span<const double> llr_weights) {
  // |q(f) - q(g)| <= (max_a grad_a - min_a grad_a)/2 * |f - g|_1 because f - g
  // sums to zero, so the gradient may be shifted to its midrange.
  switch (kind) {
    case QKind::kMean:
      return (alphabet.back() - alphabet.front()) / 2.0;
    case QKind::kVariance: {
      // grad_a = a^2 - 2 mu a depends on f only through mu in [a_1, a_m]; the
      // gradient span is convex in mu, so its maximum sits at an endpoint.
      auto span_at = [&](double mu) {
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (double a : alphabet.letters()) {
          const double g = a * a - 2.0 * mu * a;
          hi = std::max(hi, g);
          lo = std::min(lo, g);
        }
        return hi - lo;
      };
      return std::max(span_at(alphabet.front()), span_at(alphabet.back())) / 2.0;
    }
    case QKind::kLogLikelihoodRatio: {
      if (llr_weights.size() != alphabet.size()) {
        throw InvalidArgument("llr weights do not match alphabet");
      }
      auto [lo, hi] = std::minmax_element(llr_weights.begin(), llr_weights.end());
      return (*hi - *lo) / 2.0;
    }
  }
  return 0.0;
}

QFunction::QFunction(QKind kind, AlphabetPtr alphabet, double offset, std::vector<double> weights)
    : kind_(kind), alphabet_(std::move(alphabet)), offset_(offset), weights_(std::move(weights)) {
  if (!std::isfinite(offset_)) throw InvalidArgument("q offset must be finite");
  lipschitz_ = lipschitz_constant(kind_, *alphabet_, weights_);
}

QFunction QFunction::mean(AlphabetPtr alphabet, double offset) {
  std::vector<double> w(alphabet->letters().begin(), alphabet->letters().end());
  return QFunction(QKind::kMean, std::move(alphabet), offset, std::move(w));
}

QFunction QFunction::variance(AlphabetPtr alphabet, double offset) {
  return QFunction(QKind::kVariance, std::move(alphabet), offset, {});
}

QFunction QFunction::log_likelihood_ratio(const Pmf& f0, const Pmf& f1) {
  require_same(f0, f1);
  std::vector<double> w(f0.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(f0[i] > 0.0) || !(f1[i] > 0.0)) {
      throw InvalidArgument("log-likelihood-ratio q needs strictly positive f0 and f1");
    }
    w[i] = std::log(f1[i] / f0[i]);
  }
  return QFunction(QKind::kLogLikelihoodRatio, f0.alphabet_ptr(), 0.0, std::move(w));
}

double QFunction::raw(std::span<const double> probs) const {
  if (probs.size() != alphabet_->size()) throw InvalidArgument("pmf is over a different alphabet");
  if (kind_ != QKind::kVariance) return dot(probs, weights_);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double a = (*alphabet_)[i];
    m1 += probs[i] * a;
    m2 += probs[i] * a * a;
  }
  return m2 - m1 * m1;
}

double QFunction::operator()(std::span<const double> probs) const { return raw(probs) - offset_; }

double QFunction::operator()(const Pmf& f) const {
  if (!same_alphabet(f.alphabet_ptr(), alphabet_)) {
    throw InvalidArgument("pmf is over a different alphabet than q");
  }
  return (*this)(f.probs());
}

QFunction QFunction::with_lipschitz(double lipschitz) const {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw InvalidArgument("Lipschitz constant must be positive and finite");
  }
  QFunction q = *this;
  q.lipschitz_ = lipschitz;
  return q;
}

QFunction QFunction::with_offset(double offset) const {
  if (!std::isfinite(offset)) throw InvalidArgument("q offset must be finite");
  QFunction q = *this;
  q.offset_ = offset;
  return q;
}

double QFunction::supremum() const noexcept {
  switch (kind_) {
    case QKind::kVariance: {
      const double span = alphabet_->back() - alphabet_->front();
      return span * span / 4.0 - offset_;
    }
    default:
      return *std::max_element(weights_.begin(), weights_.end()) - offset_;
  }
}

double QFunction::infimum() const noexcept {
  switch (kind_) {
    case QKind::kVariance: return -offset_;
    default: return *std::min_element(weights_.begin(), weights_.end()) - offset_;
  }
}

}  // namespace ipt
