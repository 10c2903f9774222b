#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mallows/dataset.hpp"

namespace mallows {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double reference = 0.0;
  std::string relation;  // "<=", ">=", "within", "=="
  double tolerance = 0.0;
  bool pass = false;
};

struct ExperimentReport {
  std::string id;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<CheckResult> checks;
  double runtime_seconds = 0.0;

  bool passed() const;
  void add_param(const std::string& key, const std::string& value);
  CheckResult& add_check(std::string name, double measured, const std::string& relation,
                         double reference, double tolerance = 0.0);
};

void print_report(std::ostream& out, const ExperimentReport& report);
void write_reports_csv(std::ostream& out, const std::vector<ExperimentReport>& reports);

/// 99th-percentile chi-square quantile (frozen for the dfs the suites use,
/// Wilson-Hilferty elsewhere).
double chi2_critical_99(int df);

// ---------------------------------------------------------------------------
// Verification suites. Defaults are the full verification scale; unit tests
// dial the sizes down.

struct BijectionSuiteOptions {
  int max_n = 8;
};
/// Exhaustive inversion-table round-trip and sum identity over S_n.
ExperimentReport verify_bijection_suite(const BijectionSuiteOptions& = {});

struct SamplerExactnessOptions {
  int n = 4;
  std::vector<double> thetas = {0.5, 1.0, 2.0};
  std::int64_t draws = 1'000'000;
  std::uint64_t seed = 20240501;
};
/// Chi-square goodness of fit of the exact sampler against enumerated
/// probabilities, alpha = 0.01.
ExperimentReport verify_sampler_exactness(const SamplerExactnessOptions& = {});

struct GOracleOptions {
  int max_n = 7;
  double rel_tol = 1e-10;
};
/// mean_inversions_g against brute-force enumeration over S_n.
ExperimentReport verify_g_oracle(const GOracleOptions& = {});

/// Dispersion recovery from exact means: theta* in {0.1, 1, 5} to 1e-8.
ExperimentReport verify_mle_inverse_identity();

struct BiasOptions {
  std::vector<int> ns = {3, 5};
  std::vector<double> thetas = {0.5, 1.0, 2.0};
  std::vector<int> sample_sizes = {2, 5, 10};
  int replicates = 10'000;
  std::uint64_t seed = 7;
  double min_z = 5.0;
};
/// Upward bias of the dispersion MLE for the finite model (known and unknown
/// center, with the samplewise objective inequality) and the top-t model.
ExperimentReport verify_bias_direction(const BiasOptions& = {});

struct CenterRateOptions {
  std::vector<int> ns = {2, 3};
  std::vector<double> thetas = {1.0, 2.0};
  std::vector<int> sample_sizes = {5, 10, 20, 40};
  int replicates = 10'000;
  std::uint64_t seed = 11;
};
/// Concentration of the consensus-center MLE: Monte Carlo error rates against
/// the (n - H_n) n! cosh(theta/2)^{-N} envelope and the asymptotic lower
/// bound, plus agreement with the exact n=2 binomial oracle.
ExperimentReport verify_center_error_rate(const CenterRateOptions& = {});

/// Exact P(center MLE != truth) for tiny instances (n = 2 closed binomial,
/// n = 3 multinomial enumeration, N <= 8); ties resolve lexicographically.
double exact_center_error_small(int n, double theta, int N);

struct RenewalTwoRouteOptions {
  std::vector<double> thetas = {0.5, 1.0, 2.0};
  double rel_tol = 1e-4;
  std::int64_t mc_components = 100'000;
  std::uint64_t seed = 13;
};
/// Effective length via Q-Pochhammer vs generating-function series vs
/// simulated components.
ExperimentReport verify_renewal_two_route(const RenewalTwoRouteOptions& = {});

struct Table1Options {
  int replicates = 50;
  int sample_size = 1000;
  std::vector<double> thetas = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5};
  double lambda = 0.5;
  std::uint64_t seed = 17;
};
/// Synthetic model-size selection histogram plus dispersion/center recovery.
ExperimentReport verify_table1_selection(const Table1Options& = {});

struct Table2Options {
  int t_max = 10;
  int replicates = 50;
  int sample_size = 1000;
  double lambda = 0.5;
  std::uint64_t seed = 19;
  std::vector<int> fixed_sizes = {1, 10};  // models fitted at fixed t for comparison
};
/// Rank-recovery accuracy and training time for fixed-size fits vs automatic
/// selection on longer synthetic rankings. Timings are reported, not checked.
ExperimentReport verify_table2_accuracy(const Table2Options& = {});

struct HomepageSyntheticOptions {
  int queries = 147;
  int max_experts = 21;
  int max_len = 30;
  std::uint64_t seed = 23;
  double lambda = 0.5;
  int threads = 0;  // 0 = hardware default
};
/// End-to-end batch pipeline on homepage-shaped synthetic data: per-query
/// selection + fit + target-rank metric; checks structural invariants and
/// determinism only.
ExperimentReport verify_homepage_synthetic(const HomepageSyntheticOptions& = {});

struct ApaOptions {
  std::string data_path;
  double tol = 0.02;
  double lambda = 0.5;
};
/// Election-data fit: single-parameter estimates over t = 1..5, automatic
/// selection, and the two-parameter fit with its center.
ExperimentReport verify_apa_fit(const ApaOptions& options);

/// Rank of `target` under the ranked list `center`; items missing from the
/// center go to the end of the list.
int target_rank(const std::vector<int>& center_ranked, int target);

}  // namespace mallows
