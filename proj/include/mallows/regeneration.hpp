#pragma once

#include <cstdint>
#include <vector>

#include "mallows/samplers.hpp"

namespace mallows {

/// Q-Pochhammer (a;q)_inf = prod_{k>=0} (1 - a q^k), truncated once the
/// geometric tail bound drops below tol; relative error <= tol.
double q_pochhammer(double a, double q, double tol = 1e-12);

/// Expected renewal component length of the single-parameter infinite model:
/// E L = 1 / (e^{-theta}; e^{-theta})_inf. Strictly decreasing, ->1 as
/// theta -> inf.
double expected_component_length(double theta, double tol = 1e-12);

struct ComponentLengthPgf {
  std::vector<double> u;      // u_n = prod_{i<=n} P(X <= i), n = 1..n_max
  std::vector<double> prob;   // P(L = n), n = 1..n_max, by series inversion
  double mean() const;        // sum n P(L=n) over the computed range
  double mass() const;        // sum P(L=n)
};

/// Coefficients of the component-length generating function
/// F(z) = 1 - 1/(1 + sum u_n z^n) via power-series division.
ComponentLengthPgf component_length_pgf_coeffs(const RowDistribution& p, int n_max = 200);

struct RenewalSummary {
  std::vector<std::int64_t> length_histogram;  // index n-1 counts components of length n
  std::int64_t n_components = 0;
  std::int64_t positions_consumed = 0;
  double empirical_mean = 0.0;
  double expected_length = 0.0;  // analytic target for the sampled theta
};

/// Raised when the stream cap is hit before the requested component count;
/// carries whatever was accumulated so far.
class RenewalCapExceeded : public std::runtime_error {
 public:
  RenewalCapExceeded(std::size_t cap, RenewalSummary partial)
      : std::runtime_error("renewal stream hit its cap of " + std::to_string(cap) +
                           " positions before completing"),
        partial_(std::move(partial)) {}
  const RenewalSummary& partial() const { return partial_; }

 private:
  RenewalSummary partial_;
};

/// Streams a single-parameter infinite permutation, splits it at its
/// splitting times and accumulates component lengths until n_components
/// complete components are observed. The trailing incomplete component is
/// discarded.
RenewalSummary renewal_monte_carlo(double theta, std::int64_t n_components, Rng& rng,
                                   std::size_t cap = 1'000'000);

}  // namespace mallows
