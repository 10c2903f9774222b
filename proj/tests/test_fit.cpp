#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "mallows/dataset.hpp"
#include "mallows/fit.hpp"
#include "mallows/samplers.hpp"

using namespace mallows;

namespace {

std::vector<std::vector<int>> all_words(int n) {
  std::vector<int> w(n);
  std::iota(w.begin(), w.end(), 1);
  std::vector<std::vector<int>> out;
  do { out.push_back(w); } while (std::next_permutation(w.begin(), w.end()));
  return out;
}

RankingDataset phi_sample_dataset(int n, double theta, int N, std::uint64_t seed) {
  Rng rng(seed);
  const Permutation id = Permutation::identity(n);
  std::vector<std::vector<int>> lists;
  lists.reserve(N);
  for (int i = 0; i < N; ++i)
    lists.push_back(sample_mallows_phi(n, theta, id, rng).ranked_list());
  return dataset_from_rankings(std::move(lists), n);
}

}  // namespace

TEST_CASE("q-factorial") {
  CHECK(q_factorial(0.3, 2) == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(q_factorial(0.0, 6) == doctest::Approx(1.0));
  CHECK(q_factorial(0.5, 4) == doctest::Approx(4.921875).epsilon(1e-12));
  CHECK_THROWS_AS(q_factorial(1.0, 3), std::invalid_argument);

  // equals sum over permutations of q^{inv}
  for (int n = 2; n <= 6; ++n) {
    double brute = 0.0;
    for (const auto& w : all_words(n))
      brute += std::pow(0.37, inversions(std::span<const int>(w)));
    CHECK(q_factorial(0.37, n) == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("mean inversions g") {
  const double q = std::exp(-1.0);
  CHECK(mean_inversions_g(q, 2) == doctest::Approx(q / (1 + q)).epsilon(1e-12));
  CHECK(mean_inversions_g(q, 2) == doctest::Approx(0.2689414214).epsilon(1e-9));
  CHECK(mean_inversions_g(0.0, 5) == 0.0);

  // n=5 brute-force expectation to ten digits
  double num = 0.0, den = 0.0;
  for (const auto& w : all_words(5)) {
    const double weight = std::pow(q, inversions(std::span<const int>(w)));
    num += static_cast<double>(inversions(std::span<const int>(w))) * weight;
    den += weight;
  }
  CHECK(mean_inversions_g(q, 5) == doctest::Approx(num / den).epsilon(1e-10));

  // removable singularity at q -> 1: limit is n(n-1)/4
  CHECK(mean_inversions_g(1.0 - 1e-10, 4) == doctest::Approx(3.0).epsilon(1e-6));

  // strictly decreasing in theta
  for (int n = 2; n <= 10; ++n) {
    double prev = std::numeric_limits<double>::infinity();
    for (double theta = 0.01; theta <= 10.0; theta += 0.07) {
      const double val = mean_inversions_g(std::exp(-theta), n);
      CHECK(val < prev);
      prev = val;
    }
  }
}

TEST_CASE("dispersion recovery from exact means") {
  for (double theta : {0.1, 1.0, 5.0}) {
    const double mean = mean_inversions_g(std::exp(-theta), 5);
    ThetaFit fit = fit_theta_from_mean(mean, 5);
    CHECK(fit.theta == doctest::Approx(theta).epsilon(1e-8));
    CHECK_FALSE(fit.diag.clamped_high);
    CHECK_FALSE(fit.diag.clamped_low);
  }
  ThetaFit hi = fit_theta_from_mean(0.0, 5);
  CHECK(hi.diag.clamped_high);
  CHECK(hi.theta == kThetaMax);
  ThetaFit lo = fit_theta_from_mean(5.0, 5);  // n(n-1)/4 = 5
  CHECK(lo.diag.clamped_low);
  CHECK(lo.theta == kThetaMin);
}

TEST_CASE("phi dispersion fit on synthetic data") {
  RankingDataset data = phi_sample_dataset(5, 1.0, 20'000, 101);
  ThetaFit fit = fit_theta_known_center(data, Permutation::identity(5));
  CHECK(fit.theta == doctest::Approx(1.0).epsilon(0.05));

  // all observations equal to the center: no finite MLE
  RankingDataset degenerate =
      dataset_from_rankings(std::vector<std::vector<int>>(10, {1, 2, 3, 4, 5}), 5);
  ThetaFit clamped = fit_theta_known_center(degenerate, Permutation::identity(5));
  CHECK(clamped.diag.clamped_high);

  RankingDataset partial = dataset_from_rankings({{1, 2}, {2, 1, 3}}, 3);
  CHECK_THROWS_AS(fit_theta_known_center(partial, Permutation::identity(3)),
                  std::invalid_argument);
}

TEST_CASE("stagewise gm fit agrees across stages for equal dispersions") {
  RankingDataset data = phi_sample_dataset(6, 1.0, 20'000, 77);
  auto fits = fit_gm_known_center(data, Permutation::identity(6));
  REQUIRE(fits.size() == 5);
  for (const auto& f : fits) CHECK(f.theta == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("stagewise gm fit recovers distinct dispersions") {
  Rng rng(888);
  const std::vector<double> truth = {1.5, 1.2, 1.0, 0.8, 0.6};
  std::vector<std::vector<int>> lists;
  const Permutation id = Permutation::identity(6);
  for (int i = 0; i < 20'000; ++i)
    lists.push_back(sample_gm(6, truth, id, rng).ranked_list());
  RankingDataset data = dataset_from_rankings(std::move(lists), 6);
  auto fits = fit_gm_known_center(data, id);
  for (int j = 0; j < 5; ++j)
    CHECK(fits[j].theta == doctest::Approx(truth[j]).epsilon(0.08));
}

TEST_CASE("igm stage estimates are closed-form geometric MLEs") {
  // single observation with one skip at stage 1: sbar = 1, theta = log 2
  RankingDataset data = dataset_from_rankings({{2}});
  auto fits = fit_igm_thetas(data, CentralOrder(), 1);
  CHECK(fits[0].theta == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // numeric maximization oracle for the geometric likelihood at sbar = 1
  double best_theta = 0, best_ll = -1e300;
  for (double th = 0.01; th < 3.0; th += 1e-4) {
    const double ll = -th * 1.0 + std::log1p(-std::exp(-th));
    if (ll > best_ll) {
      best_ll = ll;
      best_theta = th;
    }
  }
  CHECK(fits[0].theta == doctest::Approx(best_theta).epsilon(1e-3));

  // huge mean discordance drives theta to zero
  RankingDataset far = dataset_from_rankings({{100001}});
  CHECK(fit_igm_thetas(far, CentralOrder(), 1)[0].theta < 1e-4);

  // zero discordance clamps high
  RankingDataset zero = dataset_from_rankings({{1, 2}});
  auto clamped = fit_igm_thetas(zero, CentralOrder(), 2);
  CHECK(clamped[0].diag.clamped_high);
  CHECK(clamped[1].diag.clamped_high);
}

TEST_CASE("igm fit recovers stage dispersions from samples") {
  Rng rng(2024);
  std::vector<double> truth = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5};
  std::vector<std::vector<int>> lists;
  CentralOrder id;
  for (int i = 0; i < 20'000; ++i) lists.push_back(sample_igm_top_t(truth, id, rng));
  RankingDataset data = dataset_from_rankings(std::move(lists));
  auto fits = fit_igm_thetas(data, CentralOrder(), 6);
  for (int j = 0; j < 6; ++j)
    CHECK(fits[j].theta == doctest::Approx(truth[j]).epsilon(0.05));
  ThetaFit pooled = fit_igm_single_theta(data, CentralOrder(), 2);
  CHECK(pooled.theta == doctest::Approx(0.947).epsilon(0.05));
}

TEST_CASE("per-stage observation counts honor partial rankings") {
  RankingDataset data = dataset_from_rankings({{1}, {2, 1, 3}});
  data.observations[0].multiplicity = 3;
  SufficientStats st = sufficient_stats(data, CentralOrder());
  CHECK(st.n_observations == 4);
  REQUIRE(st.stages() == 3);
  CHECK(st.stage_count[0] == 4);
  CHECK(st.stage_count[1] == 1);
  CHECK(st.stage_count[2] == 1);
}

TEST_CASE("consensus center: unanimous data") {
  RankingDataset data =
      dataset_from_rankings(std::vector<std::vector<int>>(12, {4, 2, 5, 1, 3}), 5);
  CenterFitOptions exact;
  exact.mode = CenterMode::exact;
  CHECK(fit_center(data, ModelKind::phi, exact) == std::vector<int>{4, 2, 5, 1, 3});
  CenterFitOptions heur;
  heur.mode = CenterMode::heuristic;
  CHECK(fit_center(data, ModelKind::phi, heur) == std::vector<int>{4, 2, 5, 1, 3});
  RankingDataset empty;
  CHECK_THROWS_AS(fit_center(empty, ModelKind::phi, {}), std::invalid_argument);
}

TEST_CASE("consensus center: exact mode is a global minimizer") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    RankingDataset data = phi_sample_dataset(5, 0.7, 12, seed);
    CenterFitOptions exact;
    exact.mode = CenterMode::exact;
    std::vector<int> center = fit_center(data, ModelKind::phi, exact);
    const double obj = center_objective(data, center);
    // brute-force enumeration oracle
    std::vector<int> items = {1, 2, 3, 4, 5};
    double best = 1e300;
    do {
      best = std::min(best, center_objective(data, items));
    } while (std::next_permutation(items.begin(), items.end()));
    CHECK(obj == doctest::Approx(best));
  }
}

TEST_CASE("consensus center: heuristic never worse than its initialization") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    RankingDataset data = phi_sample_dataset(6, 0.5, 40, seed);
    CenterFitOptions heur;
    heur.mode = CenterMode::heuristic;
    std::vector<int> center = fit_center(data, ModelKind::phi, heur);
    // mean-observed-rank ordering, the initialization of the search
    std::vector<double> mean_rank(7, 0.0);
    std::vector<double> freq(7, 0.0);
    for (const auto& obs : data.observations)
      for (int j = 0; j < obs.length(); ++j) {
        mean_rank[obs.items[j]] += j + 1;
        freq[obs.items[j]] += 1;
      }
    std::vector<int> borda = {1, 2, 3, 4, 5, 6};
    std::stable_sort(borda.begin(), borda.end(), [&](int a, int b) {
      return mean_rank[a] / freq[a] < mean_rank[b] / freq[b];
    });
    CHECK(center_objective(data, center) <= center_objective(data, borda) + 1e-9);
  }
}

TEST_CASE("consensus center: exact and heuristic agree on synthetic data") {
  int agreements = 0;
  const int rounds = 20;
  for (int r = 0; r < rounds; ++r) {
    RankingDataset data = phi_sample_dataset(5, 1.0, 100, 500 + r);
    CenterFitOptions exact;
    exact.mode = CenterMode::exact;
    CenterFitOptions heur;
    heur.mode = CenterMode::heuristic;
    const auto ce = fit_center(data, ModelKind::phi, exact);
    const auto ch = fit_center(data, ModelKind::phi, heur);
    if (ce == ch && ce == std::vector<int>{1, 2, 3, 4, 5}) ++agreements;
  }
  CHECK(agreements >= rounds * 95 / 100 - 1);
}

TEST_CASE("consensus center: restarts never hurt") {
  RankingDataset data = phi_sample_dataset(7, 0.4, 60, 321);
  CenterFitOptions one;
  one.mode = CenterMode::heuristic;
  CenterFitOptions many = one;
  many.restarts = 4;
  const double obj1 = center_objective(data, fit_center(data, ModelKind::phi, one));
  const double obj4 = center_objective(data, fit_center(data, ModelKind::phi, many));
  CHECK(obj4 <= obj1 + 1e-9);
}

TEST_CASE("log likelihood") {
  // single observation equal to the center
  FittedModel phi;
  phi.kind = ModelKind::phi;
  phi.model_size = 4;
  phi.thetas = {1.0};
  phi.center_ranked = {1, 2, 3, 4};
  RankingDataset single = dataset_from_rankings({{1, 2, 3, 4}}, 4);
  CHECK(log_likelihood(single, phi) ==
        doctest::Approx(-log_q_factorial(std::exp(-1.0), 4)).epsilon(1e-12));

  // probabilities over all of S_4 sum to one
  double total = 0.0;
  for (const auto& w : all_words(4)) {
    Permutation p = Permutation::from_word(w);
    RankingDataset d = dataset_from_rankings({p.ranked_list()}, 4);
    total += std::exp(log_likelihood(d, phi));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

  // gm likelihood with equal dispersions matches phi
  FittedModel gm;
  gm.kind = ModelKind::gm;
  gm.model_size = 4;
  gm.thetas = {1.0, 1.0, 1.0};
  gm.center_ranked = {1, 2, 3, 4};
  RankingDataset d = dataset_from_rankings({{3, 1, 2, 4}}, 4);
  CHECK(log_likelihood(d, gm) == doctest::Approx(log_likelihood(d, phi)).epsilon(1e-12));

  // igm t=2, both stages on target: (1-e^-1)^2
  FittedModel igm;
  igm.kind = ModelKind::igm_top_t;
  igm.model_size = 2;
  igm.thetas = {1.0, 1.0};
  igm.center_ranked = {1, 2};
  RankingDataset top2 = dataset_from_rankings({{1, 2}});
  CHECK(std::exp(log_likelihood(top2, igm)) ==
        doctest::Approx(std::pow(-std::expm1(-1.0), 2)).epsilon(1e-12));

  RankingDataset bad = dataset_from_rankings({{1, 2, 3}}, 4);
  CHECK_THROWS_AS(log_likelihood(bad, phi), std::invalid_argument);
}

TEST_CASE("end-to-end fit on a small phi dataset") {
  RankingDataset data = phi_sample_dataset(5, 1.0, 5000, 4242);
  ModelFitOptions opt;
  FittedModel model = fit_model(data, ModelKind::phi, 0, opt);
  CHECK(model.center_ranked == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(model.thetas[0] == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::isfinite(model.log_likelihood));
}
