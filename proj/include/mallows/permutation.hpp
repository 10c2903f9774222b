#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mallows {

// Ranks and item ids are 1-based at every interface.

/// Finite permutation of {1,...,n}, stored as the word list:
/// word()[i-1] = pi(i), the rank given to item i.
class Permutation {
 public:
  Permutation() = default;

  static Permutation identity(int n);
  /// Validates that `word` is a bijection on {1,...,n}.
  static Permutation from_word(std::vector<int> word);
  /// Builds from the ranked list (pi^{-1}(1) | ... | pi^{-1}(n)),
  /// i.e. items listed from most to least preferred.
  static Permutation from_ranked_list(const std::vector<int>& items);

  int size() const { return static_cast<int>(word_.size()); }
  int rank_of(int item) const { return word_[item - 1]; }
  const std::vector<int>& word() const { return word_; }
  std::vector<int> ranked_list() const;

  Permutation inverse() const;
  /// (this ∘ other)(i) = this(other(i)); sizes must match.
  Permutation compose(const Permutation& other) const;
  /// this ∘ center^{-1}
  Permutation relative_to(const Permutation& center) const;

  bool operator==(const Permutation&) const = default;
  /// Lexicographic order on word lists (deterministic tie-breaking).
  bool operator<(const Permutation& other) const { return word_ < other.word_; }

 private:
  struct Unchecked {};
  Permutation(std::vector<int> word, Unchecked) : word_(std::move(word)) {}

  std::vector<int> word_;
};

/// Staged discordance vector s = (s_1,...,s_{n-1}); in the top-t case the
/// entries are unbounded.
using InversionTable = std::vector<int>;

int max_permutation_size();
void set_max_permutation_size(int n);

/// Number of pairs i<j with seq[i] > seq[j]; O(n log n) merge count.
std::int64_t inversions(std::span<const int> seq);
std::int64_t inversions(const Permutation& p);

/// Inversion table of a complete permutation, length n-1.
InversionTable inversion_table(const Permutation& p);

/// Stagewise discordances of a ranked-list prefix given in central ranks:
/// s_j = y_j - 1 - #{j' < j : y_{j'} < y_j}. Works on partial (top-t) data.
InversionTable prefix_inversion_table(std::span<const int> central_ranks);

/// Inverse of inversion_table: the unique permutation whose stagewise
/// selections skip s_j remaining items. Entries are range-checked.
Permutation decode_inversion_table(const InversionTable& s, int n);

/// Kendall's tau: inversions(a ∘ b^{-1}).
std::int64_t kendall_tau(const Permutation& a, const Permutation& b);

/// Positions m with {prefix[0..m-1]} = {1,...,m}; only splitting times
/// within the prefix are reported, the trailing component may be incomplete.
std::vector<int> splitting_times(std::span<const int> prefix);

struct Component {
  int length = 0;
  std::vector<int> reduced;  // shifted to a permutation word of [length]
};

/// Splits the prefix at its splitting times. The concatenation of the raw
/// components reproduces the prefix; a trailing incomplete segment is dropped.
std::vector<Component> components(std::span<const int> prefix);

/// Total order over the positive integers: an explicit ranked prefix followed
/// by all remaining integers in increasing order. Default is the identity
/// order. Used as the central ranking of infinite/top-t models.
class CentralOrder {
 public:
  CentralOrder() = default;
  explicit CentralOrder(std::vector<int> ranked_items);
  explicit CentralOrder(const Permutation& p) : CentralOrder(p.ranked_list()) {}

  int rank_of(int item) const;
  int item_at(int rank) const;
  int explicit_size() const { return static_cast<int>(items_.size()); }
  const std::vector<int>& explicit_items() const { return items_; }

  /// Central ranks of an observed item prefix (the input to
  /// prefix_inversion_table for partially ranked data).
  std::vector<int> ranks_of(std::span<const int> items) const;

 private:
  std::vector<int> items_;
  std::vector<int> sorted_items_;
  std::unordered_map<int, int> rank_by_item_;
};

}  // namespace mallows
