#pragma once

// Rolling letter counts with O(1) updates of the window statistic and of the
// KL divergence from the window's empirical pmf to a fixed reference.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ipt/simplex.hpp"

namespace ipt {

/// Alphabet indices of a letter stream; throws DataError on unknown letters.
std::vector<std::uint32_t> to_indices(std::span<const double> letters, const Alphabet& alphabet);

/// Uncentered q of the empirical pmf with these letter counts. Weighted sums
/// are formed before dividing by n, so integer letters give exact values.
double q_raw_from_counts(const QFunction& q, std::span<const std::uint32_t> counts);

class SlidingWindow {
 public:
  SlidingWindow(const QFunction& q, std::size_t n);

  /// Appends a letter index, evicting the oldest sample once n are held.
  void push(std::uint32_t letter);
  void clear();

  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return ring_.size(); }
  bool full() const noexcept { return size_ == ring_.size(); }
  std::span<const std::uint32_t> counts() const noexcept { return counts_; }

  /// Uncentered q of the held samples' empirical pmf.
  double q_raw() const noexcept;
  void fill_pmf(std::vector<double>& out) const;

  /// Sets the pmf that kl_to_reference() compares against.
  void set_reference(std::span<const double> ref);
  /// I(f_hat || ref), +infinity if the window holds a letter ref excludes.
  double kl_to_reference() const noexcept;

 private:
  void refresh();

  bool linear_;
  std::vector<double> weights_;  // w(a) for linear q, letters otherwise
  std::vector<std::uint32_t> ring_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::size_t pushes_since_refresh_ = 0;
  std::vector<std::uint32_t> counts_;
  double sum_w_ = 0.0;
  double sum_w2_ = 0.0;
  // c ln c for c = 0..n, so the entropy term updates in O(1).
  std::vector<double> xlogx_;
  double sum_clogc_ = 0.0;
  std::vector<double> log_ref_;
  double sum_clogref_ = 0.0;
  std::size_t excluded_ = 0;
};

}  // namespace ipt
