#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "mallows/permutation.hpp"

using namespace mallows;

namespace {

// O(n^2) oracle, independent of the merge-count path
long long brute_inversions(const std::vector<int>& w) {
  long long c = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      if (w[i] > w[j]) ++c;
  return c;
}

}  // namespace

TEST_CASE("inversion counting") {
  CHECK(inversions(Permutation::from_word({1, 2, 3})) == 0);
  CHECK(inversions(Permutation::from_word({2, 1})) == 1);
  CHECK(inversions(Permutation::from_word({3, 2, 1})) == 3);

  std::vector<int> w(7);
  std::iota(w.begin(), w.end(), 1);
  do {
    CHECK(inversions(std::span<const int>(w)) == brute_inversions(w));
  } while (std::next_permutation(w.begin(), w.end()));
}

TEST_CASE("word and ranked-list views agree") {
  // ranked list (3|1|2): item 3 first, so word (ranks per item) is (2,3,1)
  Permutation p = Permutation::from_ranked_list({3, 1, 2});
  CHECK(p.word() == std::vector<int>{2, 3, 1});
  CHECK(p.ranked_list() == std::vector<int>{3, 1, 2});
  CHECK(p.rank_of(3) == 1);
  CHECK_THROWS_AS(Permutation::from_word({1, 1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Permutation::from_word({0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Permutation::from_ranked_list({2, 2, 1}), std::invalid_argument);
}

TEST_CASE("inversion table of the worked multistage example") {
  // center (3|1|2), observation (3|2|1): correct first stage, one skip at the
  // second
  Permutation center = Permutation::from_ranked_list({3, 1, 2});
  Permutation obs = Permutation::from_ranked_list({3, 2, 1});
  InversionTable s = inversion_table(obs.relative_to(center));
  REQUIRE(s.size() == 2);
  CHECK(s[0] == 0);
  CHECK(s[1] == 1);
}

TEST_CASE("inversion table basics") {
  CHECK(inversion_table(Permutation::identity(5)) == InversionTable{0, 0, 0, 0});
  Permutation p = Permutation::from_word({3, 2, 1});
  InversionTable s = inversion_table(p);
  CHECK(std::accumulate(s.begin(), s.end(), 0LL) == inversions(p));
}

TEST_CASE("decode inverts encode exhaustively") {
  for (int n = 1; n <= 6; ++n) {
    std::vector<int> w(n);
    std::iota(w.begin(), w.end(), 1);
    do {
      Permutation p = Permutation::from_word(w);
      InversionTable s = inversion_table(p);
      CHECK(decode_inversion_table(s, n) == p);
      CHECK(std::accumulate(s.begin(), s.end(), 0LL) == inversions(p));
    } while (std::next_permutation(w.begin(), w.end()));
  }
}

TEST_CASE("decode examples and errors") {
  CHECK(decode_inversion_table({0, 0, 0}, 4) == Permutation::identity(4));
  // s=(0,1) around center (3|1|2) reproduces the observation (3|2|1)
  Permutation center = Permutation::from_ranked_list({3, 1, 2});
  Permutation obs = decode_inversion_table({0, 1}, 3).compose(center);
  CHECK(obs.ranked_list() == std::vector<int>{3, 2, 1});

  CHECK_THROWS_WITH_AS(decode_inversion_table({0, 3, 0}, 4) /* s_2 max is 2 */,
                       doctest::Contains("s_2"), std::invalid_argument);
  CHECK_THROWS_AS(decode_inversion_table({0, 0}, 4), std::invalid_argument);
}

TEST_CASE("composition group laws and kendall tau") {
  Permutation p = Permutation::from_word({2, 3, 1, 4});
  CHECK(p.relative_to(p) == Permutation::identity(4));
  CHECK(kendall_tau(p, p) == 0);
  CHECK(kendall_tau(Permutation::from_word({2, 1}), Permutation::from_word({1, 2})) == 1);
  CHECK_THROWS_AS(p.compose(Permutation::identity(3)), std::invalid_argument);

  // right-invariance d(pi o rho, sigma o rho) = d(pi, sigma) over all of S_4
  std::vector<Permutation> all;
  std::vector<int> w(4);
  std::iota(w.begin(), w.end(), 1);
  do {
    all.push_back(Permutation::from_word(w));
  } while (std::next_permutation(w.begin(), w.end()));
  for (const auto& pi : all)
    for (const auto& sigma : all) {
      const auto d = kendall_tau(pi, sigma);
      for (const auto& rho : all)
        CHECK(kendall_tau(pi.compose(rho), sigma.compose(rho)) == d);
    }
}

TEST_CASE("splitting times") {
  std::vector<int> prefix = {2, 3, 4, 1, 6, 8, 7, 10, 5, 9, 12, 13, 11};
  CHECK(splitting_times(prefix) == std::vector<int>{4, 10, 13});
  CHECK(splitting_times(std::vector<int>{1, 2, 3}) == std::vector<int>{1, 2, 3});
  // incomplete trailing component is simply not reported
  std::vector<int> open = {2, 1, 4, 6, 8, 3};
  CHECK(splitting_times(open) == std::vector<int>{2});
}

TEST_CASE("components and reduced words") {
  auto cs = components(std::vector<int>{2, 3, 4, 1});
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].length == 4);
  CHECK(cs[0].reduced == std::vector<int>{2, 3, 4, 1});

  // (1)(2,4)(3) as the word (1,4,3,2): partition [1][2,3,4]
  cs = components(std::vector<int>{1, 4, 3, 2});
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].length == 1);
  CHECK(cs[1].length == 3);
  CHECK(cs[1].reduced == std::vector<int>{3, 2, 1});

  cs = components(std::vector<int>{2, 3, 4, 1, 6, 8, 7, 10, 5, 9});
  REQUIRE(cs.size() == 2);
  CHECK(cs[1].reduced == std::vector<int>{2, 4, 3, 6, 1, 5});
}

TEST_CASE("components concatenation reconstructs the prefix") {
  std::vector<int> w(9);
  std::iota(w.begin(), w.end(), 1);
  std::mt19937_64 rng(4);
  for (int round = 0; round < 50; ++round) {
    std::shuffle(w.begin(), w.end(), rng);
    auto cs = components(w);
    std::vector<int> rebuilt;
    int offset = 0;
    for (const auto& c : cs) {
      // reduced part must be a permutation word of [length] that is
      // indecomposable before its last position
      auto splits = splitting_times(c.reduced);
      REQUIRE(splits.size() == 1);
      CHECK(splits[0] == c.length);
      for (int v : c.reduced) rebuilt.push_back(v + offset);
      offset += c.length;
    }
    CHECK(std::equal(rebuilt.begin(), rebuilt.end(), w.begin()));
  }
}

TEST_CASE("central order over the positive integers") {
  CentralOrder id;
  CHECK(id.item_at(7) == 7);
  CHECK(id.rank_of(7) == 7);

  CentralOrder c({3, 1, 5});
  CHECK(c.item_at(1) == 3);
  CHECK(c.item_at(2) == 1);
  CHECK(c.item_at(3) == 5);
  CHECK(c.item_at(4) == 2);  // smallest unused
  CHECK(c.item_at(5) == 4);
  CHECK(c.item_at(6) == 6);
  CHECK(c.rank_of(2) == 4);
  CHECK(c.rank_of(4) == 5);
  CHECK(c.rank_of(6) == 6);
  for (int r = 1; r <= 50; ++r) CHECK(c.rank_of(c.item_at(r)) == r);
  CHECK_THROWS_AS(CentralOrder({2, 2}), std::invalid_argument);
}

TEST_CASE("prefix inversion table on partial data") {
  // top-3 observation with central ranks (4, 1, 6): s = (3, 0, 3)
  CHECK(prefix_inversion_table(std::vector<int>{4, 1, 6}) == InversionTable{3, 0, 3});
  CHECK_THROWS_AS(prefix_inversion_table(std::vector<int>{2, 2}), std::invalid_argument);
}

TEST_CASE("size guard is configurable") {
  const int old_max = max_permutation_size();
  set_max_permutation_size(4);
  CHECK_THROWS_AS(Permutation::identity(5), std::invalid_argument);
  set_max_permutation_size(old_max);
  CHECK_NOTHROW(Permutation::identity(5));
}
