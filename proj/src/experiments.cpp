#include "mallows/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "mallows/fit.hpp"
#include "mallows/model_selection.hpp"
#include "mallows/permutation.hpp"
#include "mallows/regeneration.hpp"
#include "mallows/samplers.hpp"

namespace mallows {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(base ^ splitmix64(a ^ splitmix64(b)));
}

// Deterministic replicate fan-out: results land in slot r regardless of the
// thread interleaving.
template <typename Fn>
void parallel_replicates(int replicates, Fn&& fn, int threads = 0) {
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, replicates);
  if (workers <= 1) {
    for (int r = 0; r < replicates; ++r) fn(r);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= replicates) return;
        fn(r);
      }
    });
  }
  for (auto& t : pool) t.join();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double harmonic(int n) {
  double h = 0.0;
  for (int i = 1; i <= n; ++i) h += 1.0 / i;
  return h;
}

double log_binom(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// P(Bin(N, p) >= k)
double binom_tail_ge(int N, double p, int k) {
  if (k <= 0) return 1.0;
  if (k > N) return 0.0;
  double tail = 0.0;
  for (int i = k; i <= N; ++i)
    tail += std::exp(log_binom(N, i) + i * std::log(p) + (N - i) * std::log1p(-p));
  return tail;
}

double theorem_upper_bound(int n, double theta, int N) {
  return (n - harmonic(n)) * std::tgamma(n + 1.0) *
         std::pow(std::cosh(theta / 2.0), -static_cast<double>(N));
}

double theorem_lower_bound(double theta, int N) {
  return 1.0 / (-std::expm1(-theta)) * std::sqrt(2.0 / (M_PI * N)) *
         std::pow(std::cosh(theta / 2.0), -static_cast<double>(N));
}

// All permutation words of S_n in lexicographic order.
std::vector<std::vector<int>> all_words(int n) {
  std::vector<int> w(n);
  std::iota(w.begin(), w.end(), 1);
  std::vector<std::vector<int>> words;
  do {
    words.push_back(w);
  } while (std::next_permutation(w.begin(), w.end()));
  return words;
}

// Lexicographic rank of a word among all words of its size.
int lehmer_index(const std::vector<int>& word) {
  const int n = static_cast<int>(word.size());
  int idx = 0;
  int fact = 1;
  for (int k = 2; k < n; ++k) fact *= k;  // (n-1)!
  for (int i = 0; i < n - 1; ++i) {
    int smaller = 0;
    for (int j = i + 1; j < n; ++j)
      if (word[j] < word[i]) ++smaller;
    idx += smaller * fact;
    if (n - 1 - i > 0) fact /= std::max(1, n - 1 - i);
  }
  return idx;
}

// D[i][j] = inv(word_i ∘ word_j^{-1})
std::vector<std::vector<int>> distance_matrix(const std::vector<std::vector<int>>& words) {
  const std::size_t m = words.size();
  std::vector<Permutation> perms;
  perms.reserve(m);
  for (const auto& w : words) perms.push_back(Permutation::from_word(w));
  std::vector<std::vector<int>> d(m, std::vector<int>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      d[i][j] = static_cast<int>(kendall_tau(perms[i], perms[j]));
  return d;
}

struct ExactConsensus {
  int argmin_index = 0;    // lexicographically-first minimizer
  long long min_objective = 0;
  long long identity_objective = 0;
  bool unique_identity = false;  // identity is the unique minimizer
};

// Candidates scanned in lex order, so a strict comparison keeps the
// lexicographically smallest minimizer. `sample` holds word indices with
// repetition.
ExactConsensus exact_consensus_samples(const std::vector<int>& sample,
                                       const std::vector<std::vector<int>>& dist) {
  const int m = static_cast<int>(dist.size());
  ExactConsensus out;
  long long best = std::numeric_limits<long long>::max();
  long long best_other = std::numeric_limits<long long>::max();  // best over c != 0
  for (int c = 0; c < m; ++c) {
    long long obj = 0;
    for (int i : sample) obj += dist[i][c];
    if (c == 0)
      out.identity_objective = obj;
    else
      best_other = std::min(best_other, obj);
    if (obj < best) {
      best = obj;
      out.argmin_index = c;
    }
  }
  out.min_objective = best;
  out.unique_identity = out.identity_objective < best_other;
  return out;
}

// counts[i] = multiplicity of word i (used by the tiny exact oracles).
ExactConsensus exact_consensus_counts(const std::vector<int>& counts,
                                      const std::vector<std::vector<int>>& dist) {
  std::vector<int> sample;
  for (int i = 0; i < static_cast<int>(counts.size()); ++i)
    for (int k = 0; k < counts[i]; ++k) sample.push_back(i);
  return exact_consensus_samples(sample, dist);
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                   static_cast<double>(xs.size()));
}

}  // namespace

bool ExperimentReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

void ExperimentReport::add_param(const std::string& key, const std::string& value) {
  params.emplace_back(key, value);
}

CheckResult& ExperimentReport::add_check(std::string name, double measured,
                                         const std::string& relation, double reference,
                                         double tolerance) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.reference = reference;
  c.relation = relation;
  c.tolerance = tolerance;
  if (relation == "<=")
    c.pass = measured <= reference + tolerance;
  else if (relation == ">=")
    c.pass = measured >= reference - tolerance;
  else if (relation == "within")
    c.pass = std::abs(measured - reference) <= tolerance;
  else if (relation == "==")
    c.pass = measured == reference;
  else
    throw std::invalid_argument("unknown relation " + relation);
  checks.push_back(std::move(c));
  return checks.back();
}

void print_report(std::ostream& out, const ExperimentReport& report) {
  out << "== " << report.id << " ==\n";
  for (const auto& [k, v] : report.params) out << "   " << k << " = " << v << "\n";
  for (const auto& c : report.checks) {
    out << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << ": "
        << format_double(c.measured) << " " << c.relation << " "
        << format_double(c.reference);
    if (c.tolerance > 0) out << " (tol " << format_double(c.tolerance) << ")";
    out << "\n";
  }
  out << "  runtime: " << format_double(report.runtime_seconds) << " s\n";
}

void write_reports_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  out << "experiment,kind,name,value,reference,relation,tolerance,pass\n";
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.params)
      out << r.id << ",param," << k << "," << v << ",,,,\n";
    for (const auto& c : r.checks)
      out << r.id << ",check," << c.name << "," << format_double(c.measured) << ","
          << format_double(c.reference) << "," << c.relation << ","
          << format_double(c.tolerance) << "," << (c.pass ? "1" : "0") << "\n";
    out << r.id << ",param,runtime_seconds," << format_double(r.runtime_seconds)
        << ",,,,\n";
  }
}

double chi2_critical_99(int df) {
  // Frozen 0.99 quantiles for the dfs exercised by the suites.
  static const std::map<int, double> table = {
      {1, 6.634897},  {2, 9.210340},   {5, 15.086272},  {9, 21.665994},
      {10, 23.209251}, {11, 24.724970}, {23, 41.638398}, {119, 157.799541}};
  if (auto it = table.find(df); it != table.end()) return it->second;
  // Wilson-Hilferty approximation elsewhere.
  const double z = 2.3263478740;
  const double a = 2.0 / (9.0 * df);
  const double c = 1.0 - a + z * std::sqrt(a);
  return df * c * c * c;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

ExperimentReport verify_bijection_suite(const BijectionSuiteOptions& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "bijection-suite";
  report.add_param("max_n", std::to_string(options.max_n));
  long long checked = 0;
  long long roundtrip_failures = 0;
  long long sum_failures = 0;
  for (int n = 1; n <= options.max_n; ++n) {
    std::vector<int> w(n);
    std::iota(w.begin(), w.end(), 1);
    do {
      Permutation p = Permutation::from_word(w);
      InversionTable s = inversion_table(p);
      if (decode_inversion_table(s, n) != p) ++roundtrip_failures;
      long long sum = std::accumulate(s.begin(), s.end(), 0LL);
      if (sum != inversions(p)) ++sum_failures;
      ++checked;
    } while (std::next_permutation(w.begin(), w.end()));
  }
  report.add_param("permutations_checked", std::to_string(checked));
  report.add_check("roundtrip_failures", static_cast<double>(roundtrip_failures), "==", 0.0);
  report.add_check("inversion_sum_failures", static_cast<double>(sum_failures), "==", 0.0);
  report.runtime_seconds = timer.seconds();
  return report;
}

ExperimentReport verify_sampler_exactness(const SamplerExactnessOptions& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "sampler-exactness";
  report.add_param("n", std::to_string(options.n));
  report.add_param("draws", std::to_string(options.draws));
  const auto words = all_words(options.n);
  const int cells = static_cast<int>(words.size());
  const Permutation center = Permutation::identity(options.n);
  for (double theta : options.thetas) {
    // exact probabilities by enumeration
    std::vector<double> probs(cells);
    double z = 0.0;
    for (int i = 0; i < cells; ++i) {
      probs[i] = std::exp(-theta * static_cast<double>(
                              inversions(std::span<const int>(words[i]))));
      z += probs[i];
    }
    for (double& p : probs) p /= z;
    std::vector<std::int64_t> counts(cells, 0);
    Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(theta * 1e6)));
    for (std::int64_t d = 0; d < options.draws; ++d) {
      Permutation p = sample_mallows_phi(options.n, theta, center, rng);
      counts[lehmer_index(p.word())] += 1;
    }
    double stat = 0.0;
    for (int i = 0; i < cells; ++i) {
      const double expected = probs[i] * static_cast<double>(options.draws);
      const double diff = static_cast<double>(counts[i]) - expected;
      stat += diff * diff / expected;
    }
    const double critical = chi2_critical_99(cells - 1);
    report.add_check("chi2_theta=" + format_double(theta), stat, "<=", critical);
  }
  report.runtime_seconds = timer.seconds();
  return report;
}

ExperimentReport verify_g_oracle(const GOracleOptions& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "g-oracle";
  report.add_param("max_n", std::to_string(options.max_n));
  double worst = 0.0;
  for (int n = 2; n <= options.max_n; ++n) {
    const auto words = all_words(n);
    std::vector<int> invs(words.size());
    for (std::size_t i = 0; i < words.size(); ++i)
      invs[i] = static_cast<int>(inversions(std::span<const int>(words[i])));
    for (int qi = 1; qi <= 9; ++qi) {
      const double q = qi / 10.0;
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < words.size(); ++i) {
        const double w = std::pow(q, invs[i]);
        num += invs[i] * w;
        den += w;
      }
      const double oracle = num / den;
      const double val = mean_inversions_g(q, n);
      worst = std::max(worst, std::abs(val - oracle) / oracle);
      // f(q) doubles as a q-factorial cross-check
      const double f = q_factorial(q, n);
      worst = std::max(worst, std::abs(f - den) / den);
    }
  }
  report.add_check("max_relative_error", worst, "<=", options.rel_tol);
  report.runtime_seconds = timer.seconds();
  return report;
}

ExperimentReport verify_mle_inverse_identity() {
  Timer timer;
  ExperimentReport report;
  report.id = "mle-inverse-identity";
  for (int n : {5, 8}) {
    for (double theta : {0.1, 1.0, 5.0}) {
      const double mean = mean_inversions_g(std::exp(-theta), n);
      const ThetaFit fit = fit_theta_from_mean(mean, n);
      report.add_check("recover_n" + std::to_string(n) + "_theta" + format_double(theta),
                       fit.theta, "within", theta, 1e-8);
    }
  }
  report.runtime_seconds = timer.seconds();
  return report;
}

ExperimentReport verify_bias_direction(const BiasOptions& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "bias-direction";
  report.add_param("replicates", std::to_string(options.replicates));
  const int R = options.replicates;
  long long samplewise_violations = 0;
  long long order_violations = 0;
  std::uint64_t cell = 0;
  for (int n : options.ns) {
    const auto words = all_words(n);
    const auto dist = distance_matrix(words);
    for (double theta : options.thetas) {
      for (int N : options.sample_sizes) {
        ++cell;
        std::vector<double> theta_known(R), theta_unknown(R);
        std::vector<std::int64_t> violations(R, 0), order_bad(R, 0);
        parallel_replicates(R, [&](int r) {
          Rng rng(mix_seed(options.seed, cell, static_cast<std::uint64_t>(r)));
          std::vector<int> sample;
          sample.reserve(N);
          long long total_inv = 0;
          const Permutation id = Permutation::identity(n);
          for (int i = 0; i < N; ++i) {
            Permutation p = sample_mallows_phi(n, theta, id, rng);
            const int idx = lehmer_index(p.word());
            sample.push_back(idx);
            total_inv += dist[idx][0];
          }
          const auto consensus = exact_consensus_samples(sample, dist);
          if (consensus.min_objective > consensus.identity_objective)
            violations[r] += 1;
          const double mean_known = static_cast<double>(total_inv) / N;
          const double mean_unknown =
              static_cast<double>(consensus.min_objective) / N;
          theta_known[r] = fit_theta_from_mean(mean_known, n).theta;
          theta_unknown[r] = fit_theta_from_mean(mean_unknown, n).theta;
          if (theta_unknown[r] < theta_known[r] - 1e-12) order_bad[r] += 1;
        });
        for (int r = 0; r < R; ++r) {
          samplewise_violations += violations[r];
          order_violations += order_bad[r];
        }
        const std::string tag = "n" + std::to_string(n) + "_theta" + format_double(theta) +
                                "_N" + std::to_string(N);
        const double zk = (mean_of(theta_known) - theta) / stderr_of(theta_known);
        const double zu = (mean_of(theta_unknown) - theta) / stderr_of(theta_unknown);
        report.add_check("z_known_" + tag, zk, ">=", options.min_z);
        report.add_check("z_unknown_" + tag, zu, ">=", options.min_z);
      }
    }
  }
  // single-parameter top-t model: same bias direction
  cell = 1000;
  for (int t : options.ns) {
    for (double theta : options.thetas) {
      for (int N : options.sample_sizes) {
        ++cell;
        std::vector<double> theta_hat(R);
        parallel_replicates(R, [&](int r) {
          Rng rng(mix_seed(options.seed, cell, static_cast<std::uint64_t>(r)));
          long long total = 0;
          for (int i = 0; i < N * t; ++i) total += sample_geometric(theta, rng);
          const double sbar = static_cast<double>(total) / (N * t);
          theta_hat[r] = sbar > 0 ? std::log1p(1.0 / sbar) : kThetaMax;
        });
        const std::string tag = "t" + std::to_string(t) + "_theta" + format_double(theta) +
                                "_N" + std::to_string(N);
        const double z = (mean_of(theta_hat) - theta) / stderr_of(theta_hat);
        report.add_check("z_igm_" + tag, z, ">=", options.min_z);
      }
    }
  }
  report.add_check("samplewise_inequality_violations",
                   static_cast<double>(samplewise_violations), "==", 0.0);
  report.add_check("theta_order_violations", static_cast<double>(order_violations), "==",
                   0.0);
  report.runtime_seconds = timer.seconds();
  return report;
}

double exact_center_error_small(int n, double theta, int N) {
  if (n < 2 || N < 1) throw std::invalid_argument("need n >= 2 and N >= 1");
  if (n == 2) {
    // error iff strictly more than N/2 observations are the swapped ranking;
    // ties keep the identity (lexicographic rule)
    const double p = 1.0 / (1.0 + std::exp(theta));
    return binom_tail_ge(N, p, N / 2 + 1);
  }
  if (n != 3 || N > 8)
    throw std::invalid_argument("exact oracle covers n=2 (any N) and n=3 with N <= 8");
  const auto words = all_words(3);
  const auto dist = distance_matrix(words);
  std::vector<double> probs(words.size());
  double z = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    probs[i] = std::exp(-theta * dist[i][0]);
    z += probs[i];
  }
  for (double& p : probs) p /= z;
  // enumerate count profiles of the 6 rankings with multinomial weights
  double error = 0.0;
  std::vector<int> counts(6, 0);
  const double logfactN = std::lgamma(N + 1.0);
  auto recurse = [&](auto&& self, int cell, int remaining) -> void {
    if (cell == 5) {
      counts[5] = remaining;
      double logw = logfactN;
      for (int i = 0; i < 6; ++i)
        logw += counts[i] * std::log(probs[i]) - std::lgamma(counts[i] + 1.0);
      const auto consensus = exact_consensus_counts(counts, dist);
      if (consensus.argmin_index != 0) error += std::exp(logw);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[cell] = c;
      self(self, cell + 1, remaining - c);
    }
  };
  recurse(recurse, 0, N);
  return error;
}

ExperimentReport verify_center_error_rate(const CenterRateOptions& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "center-error-rate";
  const int R = options.replicates;
  report.add_param("replicates", std::to_string(R));
  std::uint64_t cell = 0;
  for (int n : options.ns) {
    const auto words = all_words(n);
    const auto dist = distance_matrix(words);
    for (double theta : options.thetas) {
      const int n_max = *std::max_element(options.sample_sizes.begin(),
                                          options.sample_sizes.end());
      for (int N : options.sample_sizes) {
        ++cell;
        std::vector<std::int64_t> err(R, 0), ambiguous(R, 0);
        parallel_replicates(R, [&](int r) {
          Rng rng(mix_seed(options.seed, cell, static_cast<std::uint64_t>(r)));
          std::vector<int> sample;
          sample.reserve(N);
          const Permutation id = Permutation::identity(n);
          for (int i = 0; i < N; ++i)
            sample.push_back(lehmer_index(sample_mallows_phi(n, theta, id, rng).word()));
          const auto consensus = exact_consensus_samples(sample, dist);
          if (consensus.argmin_index != 0) err[r] = 1;
          if (!consensus.unique_identity) ambiguous[r] = 1;
        });
        const double p_err =
            static_cast<double>(std::accumulate(err.begin(), err.end(), 0LL)) / R;
        const double p_amb =
            static_cast<double>(std::accumulate(ambiguous.begin(), ambiguous.end(), 0LL)) /
            R;
        const double se_err = std::sqrt(std::max(p_err * (1 - p_err), 1e-12) / R);
        const std::string tag = "n" + std::to_string(n) + "_theta" + format_double(theta) +
                                "_N" + std::to_string(N);
        report.add_param("p_err_" + tag, format_double(p_err));
        const double ub = theorem_upper_bound(n, theta, N);
        report.add_check("upper_bound_" + tag, p_err, "<=", ub, 3.0 * se_err);
        if (n == 2) {
          const double exact = exact_center_error_small(2, theta, N);
          const double se = std::sqrt(std::max(exact * (1 - exact), 1e-12) / R);
          report.add_check("binomial_oracle_" + tag, p_err, "within", exact, 3.0 * se);
        }
        if (N == n_max) {
          // The asymptotic lower bound brackets the event "the truth is not
          // the unique minimizer"; its exact binomial witness
          // P(#{pi_i(1)>pi_i(2)} >= N/2) is checked sharply and the Monte
          // Carlo rate for consistency.
          const double lb = theorem_lower_bound(theta, N);
          const double p12 = 1.0 / (1.0 + std::exp(theta));
          const double witness = binom_tail_ge(N, p12, (N + 1) / 2);
          report.add_check("lower_bound_witness_" + tag, witness, ">=", 0.5 * lb);
          const double se_amb =
              std::max(std::sqrt(std::max(p_amb * (1 - p_amb), 0.0) / R), 3.0 / R);
          report.add_check("lower_bound_mc_" + tag, p_amb + 3.0 * se_amb, ">=", 0.5 * lb);
          report.add_param("p_ambiguous_" + tag, format_double(p_amb));
        }
      }
    }
  }
  report.runtime_seconds = timer.seconds();
  return report;
}

ExperimentReport verify_renewal_two_route(const RenewalTwoRouteOptions& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "renewal-two-route";
  report.add_param("mc_components", std::to_string(options.mc_components));
  for (double theta : options.thetas) {
    const double el = expected_component_length(theta);
    const std::string tag = "theta" + format_double(theta);
    // series route, extended until the distribution mass is exhausted
    int n_max = 200;
    ComponentLengthPgf pgf;
    for (;;) {
      pgf = component_length_pgf_coeffs(RowDistribution::geometric(theta), n_max);
      if (pgf.mass() >= 1.0 - 1e-9 || n_max >= 12800) break;
      n_max *= 2;
    }
    report.add_param("series_n_max_" + tag, std::to_string(n_max));
    report.add_check("series_vs_pochhammer_" + tag, std::abs(pgf.mean() - el) / el, "<=",
                     options.rel_tol);
    double min_prob = 0.0, mass = pgf.mass();
    for (double p : pgf.prob) min_prob = std::min(min_prob, p);
    report.add_check("series_nonnegative_" + tag, min_prob, ">=", -1e-12);
    report.add_check("series_mass_" + tag, mass, "<=", 1.0 + 1e-9);
    // Monte Carlo route
    Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(theta * 1e6)));
    RenewalSummary mc = renewal_monte_carlo(theta, options.mc_components, rng,
                                            static_cast<std::size_t>(64) * 1'000'000);
    double second = 0.0;
    for (std::size_t i = 0; i < pgf.prob.size(); ++i)
      second += static_cast<double>(i + 1) * (i + 1) * pgf.prob[i];
    const double sd = std::sqrt(std::max(second - el * el, 0.0));
    const double se = sd / std::sqrt(static_cast<double>(options.mc_components));
    report.add_check("mc_mean_" + tag, mc.empirical_mean, "within", el, 3.0 * se);
  }
  report.add_check("value_at_theta1", expected_component_length(1.0), "within", 1.98244113,
                   1e-3);
  // component-length chi-square and i.i.d. correlation at theta = 1
  {
    const double theta = 1.0;
    ComponentLengthPgf pgf = component_length_pgf_coeffs(RowDistribution::geometric(theta),
                                                         400);
    Rng rng(mix_seed(options.seed, 99));
    PShiftedStream stream(RowDistribution::geometric(theta), rng,
                          static_cast<std::size_t>(64) * 1'000'000);
    const int M = 20'000;
    std::vector<int> lengths;
    lengths.reserve(M);
    int running_max = 0, pos = 0, start = 0;
    while (static_cast<int>(lengths.size()) < M) {
      running_max = std::max(running_max, stream.next());
      ++pos;
      if (running_max == pos) {
        lengths.push_back(pos - start);
        start = pos;
      }
    }
    const int bins = 10;
    std::vector<double> expected(bins + 1, 0.0);
    for (int i = 0; i < bins; ++i) expected[i] = pgf.prob[i] * M;
    double tail_mass = 1.0;
    for (int i = 0; i < bins; ++i) tail_mass -= pgf.prob[i];
    expected[bins] = tail_mass * M;
    std::vector<std::int64_t> observed(bins + 1, 0);
    for (int len : lengths) observed[std::min(len - 1, bins)] += 1;
    double stat = 0.0;
    for (int i = 0; i <= bins; ++i) {
      const double diff = observed[i] - expected[i];
      stat += diff * diff / expected[i];
    }
    report.add_check("component_length_chi2_theta1", stat, "<=", chi2_critical_99(bins));
    double mx = 0, my = 0;
    for (int i = 0; i + 1 < M; ++i) {
      mx += lengths[i];
      my += lengths[i + 1];
    }
    mx /= M - 1;
    my /= M - 1;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i + 1 < M; ++i) {
      sxy += (lengths[i] - mx) * (lengths[i + 1] - my);
      sxx += (lengths[i] - mx) * (lengths[i] - mx);
      syy += (lengths[i + 1] - my) * (lengths[i + 1] - my);
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    report.add_check("successive_length_corr_theta1", std::abs(corr), "<=",
                     3.0 / std::sqrt(static_cast<double>(M)));
  }
  report.runtime_seconds = timer.seconds();
  return report;
}

namespace {

RankingDataset sample_igm_dataset(const std::vector<double>& thetas, int N, Rng& rng) {
  std::vector<std::vector<int>> lists;
  lists.reserve(N);
  CentralOrder id;
  for (int i = 0; i < N; ++i)
    lists.push_back(sample_igm_top_t(thetas, id, rng));
  return dataset_from_rankings(std::move(lists));
}

bool center_prefix_is_identity(const std::vector<int>& ranked, int upto) {
  if (static_cast<int>(ranked.size()) < upto) return false;
  for (int i = 0; i < upto; ++i)
    if (ranked[i] != i + 1) return false;
  return true;
}

}  // namespace

ExperimentReport verify_table1_selection(const Table1Options& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "table1-selection";
  report.add_param("replicates", std::to_string(options.replicates));
  report.add_param("sample_size", std::to_string(options.sample_size));
  const int R = options.replicates;
  const int t_max = static_cast<int>(options.thetas.size());
  std::vector<int> chosen(R, 0);
  std::vector<double> theta1(R, 0.0), theta2(R, 0.0);
  std::vector<std::int64_t> center_ok(R, 0), theta2_defined(R, 0);
  parallel_replicates(R, [&](int r) {
    Rng rng(mix_seed(options.seed, 1, static_cast<std::uint64_t>(r)));
    RankingDataset data = sample_igm_dataset(options.thetas, options.sample_size, rng);
    SelectTOptions sopt;
    sopt.lambda = options.lambda;
    sopt.center.mode = CenterMode::heuristic;
    SelectionTrace trace = select_t(data, sopt);
    chosen[r] = trace.chosen_t;
    ModelFitOptions fopt;
    fopt.center.mode = CenterMode::heuristic;
    FittedModel model = fit_model(data, ModelKind::igm_top_t, trace.chosen_t, fopt);
    theta1[r] = model.thetas.empty() ? 0.0 : model.thetas[0];
    if (model.thetas.size() >= 2) {
      theta2[r] = model.thetas[1];
      theta2_defined[r] = 1;
    }
    if (center_prefix_is_identity(model.center_ranked, t_max)) center_ok[r] = 1;
  });
  std::map<int, int> histogram;
  for (int t : chosen) histogram[t] += 1;
  std::ostringstream hist;
  for (auto [t, c] : histogram) hist << "t=" << t << ":" << c << " ";
  report.add_param("selection_histogram", hist.str());
  const double share23 =
      static_cast<double>(histogram[2] + histogram[3]) / static_cast<double>(R);
  int mode_t = 0, mode_count = -1;
  for (auto [t, c] : histogram)
    if (c > mode_count) {
      mode_t = t;
      mode_count = c;
    }
  report.add_check("share_t2_or_t3", share23, ">=", 0.90);
  report.add_check("mode_is_t2", mode_t, "==", 2.0);

  std::vector<double> t1v(theta1.begin(), theta1.end());
  report.add_check("theta1_mean", mean_of(t1v), "within", 1.00, 0.02);
  std::vector<double> t2v;
  for (int r = 0; r < R; ++r)
    if (theta2_defined[r]) t2v.push_back(theta2[r]);
  report.add_param("theta2_defined", std::to_string(t2v.size()));
  report.add_check("theta2_mean", t2v.empty() ? 0.0 : mean_of(t2v), "within", 0.90, 0.02);
  const auto [t1min, t1max] = std::minmax_element(t1v.begin(), t1v.end());
  report.add_param("theta1_range",
                   "[" + format_double(*t1min) + "," + format_double(*t1max) + "]");
  const double center_rate =
      static_cast<double>(std::accumulate(center_ok.begin(), center_ok.end(), 0LL)) / R;
  report.add_check("center_top6_recovery", center_rate, ">=", 0.95);
  report.runtime_seconds = timer.seconds();
  return report;
}

ExperimentReport verify_table2_accuracy(const Table2Options& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "table2-accuracy-tmax" + std::to_string(options.t_max);
  report.add_param("t_max", std::to_string(options.t_max));
  report.add_param("replicates", std::to_string(options.replicates));
  std::vector<double> thetas(options.t_max);
  for (int j = 0; j < options.t_max; ++j) thetas[j] = 1.0 - 0.025 * j;
  const int R = options.replicates;
  const int n_methods = static_cast<int>(options.fixed_sizes.size()) + 1;
  std::vector<std::vector<std::int64_t>> ok(n_methods, std::vector<std::int64_t>(R, 0));
  std::vector<std::vector<double>> secs(n_methods, std::vector<double>(R, 0.0));
  std::vector<int> chosen(R, 0);
  parallel_replicates(R, [&](int r) {
    Rng rng(mix_seed(options.seed, 2, static_cast<std::uint64_t>(r)));
    RankingDataset data = sample_igm_dataset(thetas, options.sample_size, rng);
    ModelFitOptions fopt;
    fopt.center.mode = CenterMode::heuristic;
    for (int m = 0; m < static_cast<int>(options.fixed_sizes.size()); ++m) {
      Timer fit_timer;
      FittedModel model =
          fit_model(data, ModelKind::igm_top_t, options.fixed_sizes[m], fopt);
      secs[m][r] = fit_timer.seconds();
      ok[m][r] = center_prefix_is_identity(model.center_ranked, options.t_max) ? 1 : 0;
    }
    Timer alg_timer;
    SelectTOptions sopt;
    sopt.lambda = options.lambda;
    sopt.center.mode = CenterMode::heuristic;
    SelectionTrace trace = select_t(data, sopt);
    FittedModel model = fit_model(data, ModelKind::igm_top_t, trace.chosen_t, fopt);
    const int last = n_methods - 1;
    secs[last][r] = alg_timer.seconds();
    ok[last][r] = center_prefix_is_identity(model.center_ranked, options.t_max) ? 1 : 0;
    chosen[r] = trace.chosen_t;
  });
  for (int m = 0; m < n_methods; ++m) {
    const std::string label =
        m + 1 < n_methods ? "igm_t" + std::to_string(options.fixed_sizes[m]) : "auto";
    const double acc =
        static_cast<double>(std::accumulate(ok[m].begin(), ok[m].end(), 0LL)) / R;
    report.add_param("accuracy_" + label, format_double(acc));
    report.add_param("avg_fit_seconds_" + label,
                     format_double(mean_of(secs[m])));  // reported, never asserted
  }
  std::map<int, int> histogram;
  for (int t : chosen) histogram[t] += 1;
  std::ostringstream hist;
  for (auto [t, c] : histogram) hist << "t=" << t << ":" << c << " ";
  report.add_param("selection_histogram", hist.str());
  const double acc_auto =
      static_cast<double>(std::accumulate(ok[n_methods - 1].begin(), ok[n_methods - 1].end(),
                                          0LL)) /
      R;
  report.add_check("auto_accuracy", acc_auto, ">=", 0.90);
  report.runtime_seconds = timer.seconds();
  return report;
}

int target_rank(const std::vector<int>& center_ranked, int target) {
  for (std::size_t i = 0; i < center_ranked.size(); ++i)
    if (center_ranked[i] == target) return static_cast<int>(i) + 1;
  return static_cast<int>(center_ranked.size()) + 1;
}

ExperimentReport verify_homepage_synthetic(const HomepageSyntheticOptions& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "homepage-synthetic";
  report.add_param("queries", std::to_string(options.queries));
  auto run_batch = [&](std::vector<int>& ranks, std::vector<int>& ts) {
    ranks.assign(options.queries, 0);
    ts.assign(options.queries, 0);
    parallel_replicates(
        options.queries,
        [&](int q) {
          Rng rng(mix_seed(options.seed, 3, static_cast<std::uint64_t>(q)));
          // per-query truth: a shuffled universe and a mid-range dispersion
          const int universe = 32 + static_cast<int>(rng() % 9);
          std::vector<int> truth(universe);
          std::iota(truth.begin(), truth.end(), 1);
          std::shuffle(truth.begin(), truth.end(), rng);
          const int target = truth[0];
          const double theta = 0.3 + 1.2 * uniform01(rng);
          const int n_experts = 5 + static_cast<int>(rng() % (options.max_experts - 4));
          CentralOrder center(truth);
          std::vector<std::vector<int>> lists;
          lists.reserve(n_experts);
          for (int e = 0; e < n_experts; ++e) {
            const int len = 1 + static_cast<int>(rng() % options.max_len);
            std::vector<double> thetas(len, theta);
            lists.push_back(sample_igm_top_t(thetas, center, rng));
          }
          RankingDataset data = dataset_from_rankings(std::move(lists));
          SelectTOptions sopt;
          sopt.lambda = options.lambda;
          sopt.center.mode = CenterMode::heuristic;
          SelectionTrace trace = select_t(data, sopt);
          ts[q] = trace.chosen_t;
          ModelFitOptions fopt;
          fopt.center.mode = CenterMode::heuristic;
          FittedModel model = fit_model(data, ModelKind::igm_top_t, trace.chosen_t, fopt);
          ranks[q] = target_rank(model.center_ranked, target);
        },
        options.threads);
  };
  std::vector<int> ranks, ts, ranks2, ts2;
  run_batch(ranks, ts);
  run_batch(ranks2, ts2);
  long long out_of_range = 0;
  for (int q = 0; q < options.queries; ++q)
    if (ranks[q] < 1 || ranks[q] > options.max_len * options.max_experts + 42)
      ++out_of_range;
  std::vector<int> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  double mean_rank = 0;
  for (int r : ranks) mean_rank += r;
  mean_rank /= options.queries;
  report.add_param("mean_target_rank", format_double(mean_rank));
  report.add_param("median_target_rank",
                   std::to_string(sorted[options.queries / 2]));
  std::map<int, int> thist;
  for (int t : ts) thist[t] += 1;
  std::ostringstream hist;
  for (auto [t, c] : thist) hist << "t=" << t << ":" << c << " ";
  report.add_param("selection_histogram", hist.str());
  report.add_check("queries_completed", static_cast<double>(ranks.size()), "==",
                   static_cast<double>(options.queries));
  report.add_check("ranks_in_range", static_cast<double>(out_of_range), "==", 0.0);
  report.add_check("deterministic_rerun",
                   ranks == ranks2 && ts == ts2 ? 1.0 : 0.0, "==", 1.0);
  report.runtime_seconds = timer.seconds();
  return report;
}

ExperimentReport verify_apa_fit(const ApaOptions& options) {
  Timer timer;
  ExperimentReport report;
  report.id = "apa-fit";
  report.add_param("data", options.data_path);
  RankingDataset data = parse_rankings(options.data_path);
  report.add_param("N", std::to_string(data.total_count()));
  report.add_param("t_max", std::to_string(data.max_length()));
  SelectTOptions sopt;
  sopt.lambda = options.lambda;
  sopt.window = std::make_pair(1, 5);
  sopt.center.mode = CenterMode::heuristic;
  SelectionTrace trace = select_t(data, sopt);
  const double expected_theta[5] = {0.47, 0.50, 0.54, 0.62, 0.72};
  for (const auto& cand : trace.candidates) {
    if (cand.t >= 1 && cand.t <= 5)
      report.add_check("single_theta_t" + std::to_string(cand.t), cand.theta_hat, "within",
                       expected_theta[cand.t - 1], options.tol);
  }
  report.add_check("selected_t", trace.chosen_t, "==", 2.0);
  ModelFitOptions fopt;
  fopt.center.mode = CenterMode::heuristic;
  FittedModel model = fit_model(data, ModelKind::igm_top_t, 2, fopt);
  report.add_check("igm_theta1", model.thetas[0], "within", 0.46, options.tol);
  report.add_check("igm_theta2", model.thetas[1], "within", 0.54, options.tol);
  const std::vector<int> expected_center = {3, 1, 5, 4, 2};
  bool center_match = model.center_ranked.size() >= 5;
  for (int i = 0; i < 5 && center_match; ++i)
    center_match = model.center_ranked[i] == expected_center[i];
  report.add_check("center_is_3_1_5_4_2", center_match ? 1.0 : 0.0, "==", 1.0);
  std::ostringstream c;
  for (std::size_t i = 0; i < model.center_ranked.size(); ++i)
    c << (i ? "|" : "") << model.center_ranked[i];
  report.add_param("center", c.str());
  report.runtime_seconds = timer.seconds();
  return report;
}

}  // namespace mallows
