#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace mallows {

/// Ordered prefix of distinct item ids, possibly from a universe larger than
/// its length; the observation unit for partially ranked data.
struct Observation {
  std::vector<int> items;
  std::int64_t multiplicity = 1;
  int length() const { return static_cast<int>(items.size()); }
};

struct RankingDataset {
  std::vector<Observation> observations;
  int universe_size = 0;  // 0 means open universe (positive integers)
  std::string source;
  std::string format;

  bool open_universe() const { return universe_size == 0; }
  std::int64_t total_count() const;
  int max_length() const;
  /// Sorted distinct items across observations (union with 1..universe_size
  /// when a closed universe is declared).
  std::vector<int> universe_items() const;
  bool all_complete() const;
  /// Observations truncated to their top-t prefixes.
  RankingDataset truncated(int t) const;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RankingFormat {
  counted,     // lines "count;i1|i2|...|ik"
  lists,       // header "# universe: n", one observation "i1|i2|...|ik" per line
  autodetect,
};

RankingDataset parse_rankings(const std::string& path,
                              RankingFormat format = RankingFormat::autodetect);
RankingDataset parse_rankings_stream(std::istream& in, RankingFormat format,
                                     const std::string& name);
void write_rankings(std::ostream& out, const RankingDataset& data, RankingFormat format);

/// Synthetic dataset helper used by samplers/tests: wraps full permutations
/// or prefixes as observations with multiplicity 1.
RankingDataset dataset_from_rankings(std::vector<std::vector<int>> ranked_lists,
                                     int universe_size = 0);

}  // namespace mallows
