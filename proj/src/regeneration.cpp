#include "mallows/regeneration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mallows {

double q_pochhammer(double a, double q, double tol) {
  if (!(std::abs(a) < 1.0)) throw std::invalid_argument("|a| must be < 1");
  if (q < 0.0 || q >= 1.0) throw std::invalid_argument("q must lie in [0,1)");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (a == 0.0) return 1.0;
  // Stop once a q^k < tol (1-q): the remaining log-terms are bounded by a
  // geometric series with ratio q, so the truncated relative error is <= tol.
  double log_prod = 0.0;
  double term = a;
  while (std::abs(term) >= tol * (1.0 - q)) {
    log_prod += std::log1p(-term);
    term *= q;
    if (term == 0.0) break;
  }
  return std::exp(log_prod);
}

double expected_component_length(double theta, double tol) {
  if (!(theta > 0)) throw std::invalid_argument("theta must be > 0");
  const double q = std::exp(-theta);
  return 1.0 / q_pochhammer(q, q, tol);
}

double ComponentLengthPgf::mean() const {
  double m = 0.0, comp = 0.0;
  for (std::size_t n = 0; n < prob.size(); ++n) {
    const double term = static_cast<double>(n + 1) * prob[n] - comp;
    const double next = m + term;
    comp = (next - m) - term;
    m = next;
  }
  return m;
}

double ComponentLengthPgf::mass() const {
  double m = 0.0, comp = 0.0;
  for (double p : prob) {
    const double term = p - comp;
    const double next = m + term;
    comp = (next - m) - term;
    m = next;
  }
  return m;
}

ComponentLengthPgf component_length_pgf_coeffs(const RowDistribution& p, int n_max) {
  if (!(p.first_prob() > 0)) throw std::invalid_argument("row distribution needs p_1 > 0");
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  ComponentLengthPgf out;
  out.u.resize(n_max);
  double u = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    u *= p.cumulative(n);
    out.u[n - 1] = u;
  }
  // F = U/(1+U) with U(z) = sum u_n z^n: coefficients c_n of F satisfy
  // c_n = u_n - sum_{k=1}^{n-1} c_k u_{n-k}; Kahan-guarded accumulation.
  out.prob.resize(n_max);
  for (int n = 1; n <= n_max; ++n) {
    double acc = out.u[n - 1], comp = 0.0;
    for (int k = 1; k < n; ++k) {
      const double term = -out.prob[k - 1] * out.u[n - k - 1] - comp;
      const double next = acc + term;
      comp = (next - acc) - term;
      acc = next;
    }
    out.prob[n - 1] = acc;
  }
  return out;
}

RenewalSummary renewal_monte_carlo(double theta, std::int64_t n_components, Rng& rng,
                                   std::size_t cap) {
  if (!(theta > 0)) throw std::invalid_argument("theta must be > 0");
  if (n_components < 1) throw std::invalid_argument("need at least one component");
  RenewalSummary summary;
  summary.expected_length = expected_component_length(theta);
  PShiftedStream stream(RowDistribution::geometric(theta), rng, cap);
  std::int64_t total_length = 0;
  int running_max = 0;
  int component_start = 0;  // 0-based position of the current component
  int pos = 0;
  while (summary.n_components < n_components) {
    int value;
    try {
      value = stream.next();
    } catch (const StreamCapExceeded&) {
      summary.positions_consumed = static_cast<std::int64_t>(stream.position());
      throw RenewalCapExceeded(cap, summary);
    }
    running_max = std::max(running_max, value);
    ++pos;
    if (running_max == pos) {
      const int len = pos - component_start;
      if (static_cast<std::size_t>(len) > summary.length_histogram.size())
        summary.length_histogram.resize(len, 0);
      summary.length_histogram[len - 1] += 1;
      summary.n_components += 1;
      total_length += len;
      component_start = pos;
    }
  }
  summary.positions_consumed = static_cast<std::int64_t>(stream.position());
  summary.empirical_mean =
      static_cast<double>(total_length) / static_cast<double>(summary.n_components);
  return summary;
}

}  // namespace mallows
