#include "ipt/window.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ipt/errors.hpp"

namespace ipt {

std::vector<std::uint32_t> to_indices(std::span<const double> letters, const Alphabet& alphabet) {
  std::vector<std::uint32_t> out;
  out.reserve(letters.size());
  for (double x : letters) out.push_back(static_cast<std::uint32_t>(alphabet.index_of(x)));
  return out;
}

double q_raw_from_counts(const QFunction& q, std::span<const std::uint32_t> counts) {
  if (counts.size() != q.alphabet().size()) throw InvalidArgument("count vector does not match alphabet");
  double n = 0.0, s1 = 0.0, s2 = 0.0;
  const auto w = q.is_linear() ? q.weights() : q.alphabet().letters();
  for (std::size_t a = 0; a < counts.size(); ++a) {
    const double c = counts[a];
    n += c;
    s1 += c * w[a];
    s2 += c * w[a] * w[a];
  }
  if (n == 0.0) return 0.0;
  const double mean = s1 / n;
  return q.is_linear() ? mean : s2 / n - mean * mean;
}

SlidingWindow::SlidingWindow(const QFunction& q, std::size_t n)
    : linear_(q.is_linear()), ring_(n, 0), counts_(q.alphabet().size(), 0), xlogx_(n + 1, 0.0) {
  if (n == 0) throw InvalidArgument("window size must be at least 1");
  if (linear_) {
    weights_.assign(q.weights().begin(), q.weights().end());
  } else {
    weights_.assign(q.alphabet().letters().begin(), q.alphabet().letters().end());
  }
  for (std::size_t c = 1; c <= n; ++c) xlogx_[c] = static_cast<double>(c) * std::log(static_cast<double>(c));
}

void SlidingWindow::push(std::uint32_t letter) {
  if (letter >= counts_.size()) throw InvalidArgument("letter index outside the alphabet");
  const bool with_ref = !log_ref_.empty();
  if (full()) {
    const std::uint32_t old = ring_[head_];
    const std::uint32_t c = counts_[old]--;
    sum_clogc_ += xlogx_[c - 1] - xlogx_[c];
    sum_w_ -= weights_[old];
    sum_w2_ -= weights_[old] * weights_[old];
    if (with_ref) {
      if (std::isinf(log_ref_[old])) {
        --excluded_;
      } else {
        sum_clogref_ -= log_ref_[old];
      }
    }
  } else {
    ++size_;
  }
  ring_[head_] = letter;
  head_ = (head_ + 1) % ring_.size();
  const std::uint32_t c = counts_[letter]++;
  sum_clogc_ += xlogx_[c + 1] - xlogx_[c];
  sum_w_ += weights_[letter];
  sum_w2_ += weights_[letter] * weights_[letter];
  if (with_ref) {
    if (std::isinf(log_ref_[letter])) {
      ++excluded_;
    } else {
      sum_clogref_ += log_ref_[letter];
    }
  }
  // Periodic exact recomputation keeps rounding drift bounded.
  if (++pushes_since_refresh_ >= ring_.size()) refresh();
}

void SlidingWindow::clear() {
  head_ = size_ = pushes_since_refresh_ = 0;
  std::fill(counts_.begin(), counts_.end(), 0u);
  sum_w_ = sum_w2_ = sum_clogc_ = sum_clogref_ = 0.0;
  excluded_ = 0;
}

void SlidingWindow::refresh() {
  pushes_since_refresh_ = 0;
  sum_w_ = sum_w2_ = sum_clogc_ = sum_clogref_ = 0.0;
  excluded_ = 0;
  for (std::size_t a = 0; a < counts_.size(); ++a) {
    const std::uint32_t c = counts_[a];
    if (c == 0) continue;
    const double cd = c;
    sum_w_ += cd * weights_[a];
    sum_w2_ += cd * weights_[a] * weights_[a];
    sum_clogc_ += xlogx_[c];
    if (!log_ref_.empty()) {
      if (std::isinf(log_ref_[a])) {
        excluded_ += c;
      } else {
        sum_clogref_ += cd * log_ref_[a];
      }
    }
  }
}

double SlidingWindow::q_raw() const noexcept {
  if (size_ == 0) return 0.0;
  const double n = static_cast<double>(size_);
  const double mean = sum_w_ / n;
  if (linear_) return mean;
  return sum_w2_ / n - mean * mean;
}

void SlidingWindow::fill_pmf(std::vector<double>& out) const {
  out.resize(counts_.size());
  const double n = static_cast<double>(size_);
  for (std::size_t a = 0; a < counts_.size(); ++a) out[a] = static_cast<double>(counts_[a]) / n;
}

void SlidingWindow::set_reference(std::span<const double> ref) {
  if (ref.size() != counts_.size()) throw InvalidArgument("reference pmf does not match alphabet");
  log_ref_.resize(ref.size());
  for (std::size_t a = 0; a < ref.size(); ++a) {
    log_ref_[a] = ref[a] > 0.0 ? std::log(ref[a]) : -std::numeric_limits<double>::infinity();
  }
  refresh();
}

double SlidingWindow::kl_to_reference() const noexcept {
  if (excluded_ > 0) return std::numeric_limits<double>::infinity();
  if (size_ == 0) return 0.0;
  const double n = static_cast<double>(size_);
  return std::max(0.0, (sum_clogc_ - sum_clogref_) / n - std::log(n));
}

}  // namespace ipt
