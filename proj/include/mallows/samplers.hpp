#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "mallows/permutation.hpp"

namespace mallows {

/// All randomness flows through an explicitly seeded generator; there is no
/// global RNG. A single Rng instance must not be shared across threads.
using Rng = std::mt19937_64;

/// Uniform double in [0,1) from one 64-bit draw; identical across platforms.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Truncated geometric on {0,...,support-1}: P(i) = q^i (1-q)/(1-q^support)
/// with q = e^{-theta}. Exact inverse-CDF sampling from a single uniform.
int sample_truncated_geometric(double theta, int support, Rng& rng);

/// Geometric on {0,1,...} with success probability 1 - e^{-theta}.
int sample_geometric(double theta, Rng& rng);

double truncated_geometric_pmf(double theta, int support, int i);

/// Exact draw from the Mallows phi model around `center` (no MCMC): stagewise
/// truncated geometrics decoded through the inversion table.
Permutation sample_mallows_phi(int n, double theta, const Permutation& center, Rng& rng);

/// Generalized Mallows: one dispersion per stage, thetas.size() == n-1.
Permutation sample_gm(int n, std::span<const double> thetas, const Permutation& center,
                      Rng& rng);

/// Top-t draw from the infinite generalized Mallows model: s_j ~ Geo(1-e^{-theta_j}),
/// selections resolved against `center` over all positive integers.
/// Returns the observed item prefix (a top-t ranking).
std::vector<int> sample_igm_top_t(std::span<const double> thetas, const CentralOrder& center,
                                  Rng& rng);

/// Finitely parameterized distribution on the positive integers: either an
/// explicit finite support {1,...,m} or a geometric law.
class RowDistribution {
 public:
  /// P(k) = (1-q) q^{k-1} on {1,2,...} with q = e^{-theta}.
  static RowDistribution geometric(double theta);
  /// probs[k-1] = P(k); must be nonnegative and sum to 1.
  static RowDistribution from_probs(std::vector<double> probs);

  double prob(int k) const;
  /// P(X <= k)
  double cumulative(int k) const;
  int sample(Rng& rng) const;
  bool is_geometric() const { return geometric_; }
  double first_prob() const { return prob(1); }

 private:
  RowDistribution() = default;
  bool geometric_ = false;
  double q_ = 0.0;            // geometric case
  std::vector<double> probs_; // explicit case
  std::vector<double> cdf_;
};

/// Raised when an infinite-permutation stream hits its position cap.
class StreamCapExceeded : public std::runtime_error {
 public:
  explicit StreamCapExceeded(std::size_t cap)
      : std::runtime_error("p-shifted stream exceeded its cap of " + std::to_string(cap) +
                           " positions") {}
};

/// Extendable stream over the word of a P-shifted permutation of the positive
/// integers: X_i ~ row_i, Pi_i = psi(X_i) with psi the increasing bijection
/// onto the still-unused integers.
class PShiftedStream {
 public:
  PShiftedStream(RowDistribution row, Rng& rng, std::size_t cap = 1'000'000);
  /// Per-index rows; indices past the vector reuse the last row.
  PShiftedStream(std::vector<RowDistribution> rows, Rng& rng, std::size_t cap = 1'000'000);

  /// Next value Pi_i; also records X_i - 1 as the stage discordance.
  int next();
  std::size_t position() const { return emitted_; }
  const std::vector<int>& discordances() const { return discordances_; }
  std::vector<int> take(std::size_t m);

 private:
  const RowDistribution& row_at(std::size_t i) const;

  std::vector<RowDistribution> rows_;
  Rng* rng_;
  std::size_t cap_;
  std::size_t emitted_ = 0;
  std::vector<int> discordances_;
  // Fenwick over candidate values, 1 = still unused; grows by doubling.
  std::vector<int> tree_;
  std::vector<char> used_;
  int capacity_ = 0;
  int used_count_ = 0;
  void grow(int min_capacity);
  int select_unused(int k);
  void mark_used(int value);
};

/// Convenience wrapper: first m values of a homogeneous p-shifted permutation.
std::vector<int> sample_p_shifted(const RowDistribution& row, std::size_t m, Rng& rng,
                                  std::size_t cap = 1'000'000);

}  // namespace mallows
