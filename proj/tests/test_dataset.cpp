#include "doctest.h"

#include <sstream>

#include "mallows/dataset.hpp"

using namespace mallows;

TEST_CASE("counted format") {
  std::istringstream in(
      "# election ballots\n"
      "\n"
      "5738;3|1|5|4|2\n"
      "2;1|3\n");
  RankingDataset data = parse_rankings_stream(in, RankingFormat::autodetect, "mem");
  REQUIRE(data.observations.size() == 2);
  CHECK(data.format == "counted");
  CHECK(data.observations[0].multiplicity == 5738);
  CHECK(data.observations[0].items == std::vector<int>{3, 1, 5, 4, 2});
  CHECK(data.observations[1].length() == 2);
  CHECK(data.total_count() == 5740);
  CHECK(data.max_length() == 5);
  CHECK_FALSE(data.all_complete());
}

TEST_CASE("query-list format with a universe header") {
  std::istringstream in(
      "# universe: 30\n"
      "7|2|19\n"
      "2|7\n"
      "1\n");
  RankingDataset data = parse_rankings_stream(in, RankingFormat::lists, "mem");
  CHECK(data.universe_size == 30);
  CHECK(data.observations.size() == 3);
  CHECK(data.observations[2].items == std::vector<int>{1});
  CHECK(data.universe_items().size() == 30);
}

TEST_CASE("parse errors carry line numbers") {
  std::istringstream dup("3;1|2|2\n");
  CHECK_THROWS_WITH_AS(parse_rankings_stream(dup, RankingFormat::counted, "f"),
                       doctest::Contains("f:1"), ParseError);
  std::istringstream zero("0;1|2\n");
  CHECK_THROWS_AS(parse_rankings_stream(zero, RankingFormat::counted, "f"), ParseError);
  std::istringstream empty("# nothing here\n");
  CHECK_THROWS_AS(parse_rankings_stream(empty, RankingFormat::autodetect, "f"), ParseError);
  std::istringstream toobig("# universe: 3\n1|4\n");
  CHECK_THROWS_AS(parse_rankings_stream(toobig, RankingFormat::lists, "f"), ParseError);
}

TEST_CASE("write then parse round-trips") {
  std::istringstream in("4;2|1\n1;1|2\n");
  RankingDataset data = parse_rankings_stream(in, RankingFormat::autodetect, "mem");
  std::ostringstream out;
  write_rankings(out, data, RankingFormat::autodetect);
  std::istringstream back(out.str());
  RankingDataset again = parse_rankings_stream(back, RankingFormat::autodetect, "mem2");
  REQUIRE(again.observations.size() == data.observations.size());
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    CHECK(again.observations[i].items == data.observations[i].items);
    CHECK(again.observations[i].multiplicity == data.observations[i].multiplicity);
  }
}

TEST_CASE("truncation") {
  RankingDataset data = dataset_from_rankings({{3, 1, 2}, {2, 1}});
  RankingDataset top1 = data.truncated(1);
  CHECK(top1.observations[0].items == std::vector<int>{3});
  CHECK(top1.observations[1].items == std::vector<int>{2});
  CHECK(data.observations[0].length() == 3);  // original untouched
}
