#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "mallows/experiments.hpp"
#include "mallows/fit.hpp"
#include "mallows/permutation.hpp"
#include "mallows/samplers.hpp"

using namespace mallows;

TEST_CASE("exact small-instance center error") {
  // one sample, two items: error iff the swapped ranking was drawn
  CHECK(exact_center_error_small(2, 1.0, 1) ==
        doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-12));
  CHECK(exact_center_error_small(2, 30.0, 4) <= 1e-9);
  // ties at even N keep the identity: N=2 error needs both draws swapped
  const double p = 1.0 / (1.0 + std::exp(1.0));
  CHECK(exact_center_error_small(2, 1.0, 2) == doctest::Approx(p * p).epsilon(1e-12));
  CHECK_THROWS_AS(exact_center_error_small(4, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(exact_center_error_small(3, 1.0, 20), std::invalid_argument);
}

TEST_CASE("exact n=3 oracle matches monte carlo") {
  const double exact = exact_center_error_small(3, 1.0, 3);
  // independent Monte Carlo of the same estimator
  Rng rng(314);
  const int R = 40'000;
  std::vector<Permutation> words;
  std::vector<int> w = {1, 2, 3};
  std::vector<std::vector<int>> all;
  do { all.push_back(w); } while (std::next_permutation(w.begin(), w.end()));
  int errors = 0;
  const Permutation id = Permutation::identity(3);
  for (int r = 0; r < R; ++r) {
    std::vector<Permutation> sample;
    for (int i = 0; i < 3; ++i) sample.push_back(sample_mallows_phi(3, 1.0, id, rng));
    long long best = 1LL << 60;
    std::vector<int> best_word;
    for (const auto& cand_word : all) {
      Permutation cand = Permutation::from_word(cand_word);
      long long obj = 0;
      for (const auto& s : sample) obj += kendall_tau(s, cand);
      if (obj < best) {
        best = obj;
        best_word = cand_word;
      }
    }
    if (best_word != std::vector<int>{1, 2, 3}) ++errors;
  }
  const double mc = static_cast<double>(errors) / R;
  const double se = std::sqrt(exact * (1 - exact) / R);
  CHECK(std::abs(mc - exact) <= 3 * se);
}

TEST_CASE("bijection suite") {
  BijectionSuiteOptions opt;
  opt.max_n = 6;
  CHECK(verify_bijection_suite(opt).passed());
}

TEST_CASE("sampler exactness suite at reduced scale") {
  SamplerExactnessOptions opt;
  opt.n = 3;
  opt.draws = 100'000;
  opt.thetas = {1.0};
  CHECK(verify_sampler_exactness(opt).passed());
}

TEST_CASE("g oracle suite") {
  GOracleOptions opt;
  opt.max_n = 5;
  CHECK(verify_g_oracle(opt).passed());
}

TEST_CASE("inverse identity suite") { CHECK(verify_mle_inverse_identity().passed()); }

TEST_CASE("bias direction at reduced scale") {
  BiasOptions opt;
  opt.ns = {3};
  opt.thetas = {1.0};
  opt.sample_sizes = {2, 5};
  opt.replicates = 2000;
  opt.min_z = 3.0;
  ExperimentReport report = verify_bias_direction(opt);
  CHECK(report.passed());
}

TEST_CASE("center error rate at reduced scale") {
  CenterRateOptions opt;
  opt.ns = {2};
  opt.thetas = {1.0};
  opt.sample_sizes = {5, 10};
  opt.replicates = 3000;
  CHECK(verify_center_error_rate(opt).passed());
}

TEST_CASE("renewal two-route at reduced scale") {
  RenewalTwoRouteOptions opt;
  opt.thetas = {1.0};
  opt.mc_components = 20'000;
  CHECK(verify_renewal_two_route(opt).passed());
}

TEST_CASE("homepage-shaped batch pipeline") {
  HomepageSyntheticOptions opt;
  opt.queries = 25;
  ExperimentReport report = verify_homepage_synthetic(opt);
  CHECK(report.passed());
}

TEST_CASE("target rank metric") {
  CHECK(target_rank({4, 2, 9}, 2) == 2);
  CHECK(target_rank({4, 2, 9}, 7) == 4);  // missing goes to the end
}

TEST_CASE("election-data suite runs mechanically on stand-in data") {
  // counted ballots over 5 candidates; values will not match the published
  // table, the point is that the whole path executes and reports
  const char* text =
      "120;3|1|5|4|2\n40;1|3|2|5|4\n33;3|1|2\n25;1|3\n18;2\n12;5|4|3|2|1\n";
  const std::string path = "apa_standin.txt";
  {
    std::ofstream f(path);
    f << text;
  }
  ExperimentReport report = verify_apa_fit({.data_path = path});
  std::remove(path.c_str());
  int named = 0;
  for (const auto& c : report.checks) {
    if (c.name.rfind("single_theta_t", 0) == 0) ++named;
    if (c.name == "selected_t") ++named;
    if (c.name == "igm_theta1") ++named;
    if (c.name == "center_is_3_1_5_4_2") ++named;
  }
  CHECK(named >= 8);
}

TEST_CASE("dispersion bias shrinks with the sample size but stays positive") {
  auto mean_bias = [](int N) {
    Rng rng(2718);
    const int R = 3000;
    double acc = 0.0;
    const Permutation id = Permutation::identity(3);
    for (int r = 0; r < R; ++r) {
      long long total = 0;
      for (int i = 0; i < N; ++i)
        total += inversions(sample_mallows_phi(3, 1.0, id, rng));
      acc += fit_theta_from_mean(static_cast<double>(total) / N, 3).theta - 1.0;
    }
    return acc / R;
  };
  const double small_n = mean_bias(2);
  const double large_n = mean_bias(60);
  CHECK(small_n > large_n);
  CHECK(large_n > 0.0);
}

TEST_CASE("report plumbing") {
  ExperimentReport r;
  r.id = "demo";
  r.add_param("alpha", "0.01");
  r.add_check("a", 1.0, "<=", 2.0);
  r.add_check("b", 3.0, "within", 3.001, 0.01);
  CHECK(r.passed());
  r.add_check("c", 5.0, ">=", 6.0);
  CHECK_FALSE(r.passed());
  std::ostringstream csv;
  write_reports_csv(csv, {r});
  CHECK(csv.str().find("demo,check,a,1,2,<=,0,1") != std::string::npos);
}
