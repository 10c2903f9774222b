#include "mallows/permutation.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>

namespace mallows {

namespace {

std::atomic<int> g_max_size{1'000'000};

void check_size(int n) {
  if (n < 1) throw std::invalid_argument("permutation size must be >= 1");
  if (n > g_max_size.load(std::memory_order_relaxed))
    throw std::invalid_argument("permutation size " + std::to_string(n) +
                                " exceeds the configured maximum " +
                                std::to_string(g_max_size.load()));
}

// Fenwick tree storing 0/1 per position, with k-th set bit selection.
class BitSet01 {
 public:
  explicit BitSet01(int n) : n_(n), tree_(n + 1, 0) {
    for (int i = 1; i <= n_; ++i) {
      tree_[i] += 1;
      int j = i + (i & -i);
      if (j <= n_) tree_[j] += tree_[i];
    }
    log2_ = 1;
    while ((1 << log2_) <= n_) ++log2_;
  }

  void clear(int pos) {
    for (int i = pos; i <= n_; i += i & -i) tree_[i] -= 1;
  }

  // number of remaining positions in [1, pos]
  int count_upto(int pos) const {
    int c = 0;
    for (int i = pos; i > 0; i -= i & -i) c += tree_[i];
    return c;
  }

  // 1-based index of the k-th remaining position (k >= 1).
  int select(int k) const {
    int pos = 0;
    for (int step = 1 << log2_; step > 0; step >>= 1) {
      int next = pos + step;
      if (next <= n_ && tree_[next] < k) {
        pos = next;
        k -= tree_[next];
      }
    }
    return pos + 1;
  }

 private:
  int n_;
  int log2_;
  std::vector<int> tree_;
};

std::int64_t merge_count(std::vector<int>& a, std::vector<int>& buf, int lo, int hi) {
  if (hi - lo < 2) return 0;
  int mid = lo + (hi - lo) / 2;
  std::int64_t cnt = merge_count(a, buf, lo, mid) + merge_count(a, buf, mid, hi);
  int i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[i] <= a[j]) {
      buf[k++] = a[i++];
    } else {
      cnt += mid - i;
      buf[k++] = a[j++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, a.begin() + lo);
  return cnt;
}

}  // namespace

int max_permutation_size() { return g_max_size.load(std::memory_order_relaxed); }

void set_max_permutation_size(int n) {
  if (n < 1) throw std::invalid_argument("max permutation size must be >= 1");
  g_max_size.store(n, std::memory_order_relaxed);
}

Permutation Permutation::identity(int n) {
  check_size(n);
  std::vector<int> w(n);
  for (int i = 0; i < n; ++i) w[i] = i + 1;
  return Permutation(std::move(w), Unchecked{});
}

Permutation Permutation::from_word(std::vector<int> word) {
  const int n = static_cast<int>(word.size());
  check_size(n);
  std::vector<char> seen(n + 1, 0);
  for (int v : word) {
    if (v < 1 || v > n)
      throw std::invalid_argument("word entry " + std::to_string(v) +
                                  " outside {1,...," + std::to_string(n) + "}");
    if (seen[v])
      throw std::invalid_argument("word repeats value " + std::to_string(v) +
                                  "; not a bijection");
    seen[v] = 1;
  }
  return Permutation(std::move(word), Unchecked{});
}

Permutation Permutation::from_ranked_list(const std::vector<int>& items) {
  const int n = static_cast<int>(items.size());
  check_size(n);
  std::vector<int> word(n, 0);
  for (int r = 1; r <= n; ++r) {
    int item = items[r - 1];
    if (item < 1 || item > n)
      throw std::invalid_argument("ranked list entry " + std::to_string(item) +
                                  " outside {1,...," + std::to_string(n) + "}");
    if (word[item - 1] != 0)
      throw std::invalid_argument("ranked list repeats item " + std::to_string(item));
    word[item - 1] = r;
  }
  return Permutation(std::move(word), Unchecked{});
}

std::vector<int> Permutation::ranked_list() const {
  std::vector<int> items(word_.size());
  for (int i = 0; i < size(); ++i) items[word_[i] - 1] = i + 1;
  return items;
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(word_.size());
  for (int i = 0; i < size(); ++i) inv[word_[i] - 1] = i + 1;
  return Permutation(std::move(inv), Unchecked{});
}

Permutation Permutation::compose(const Permutation& other) const {
  if (size() != other.size())
    throw std::invalid_argument("compose: size mismatch (" + std::to_string(size()) +
                                " vs " + std::to_string(other.size()) + ")");
  std::vector<int> w(word_.size());
  for (int i = 0; i < size(); ++i) w[i] = word_[other.word_[i] - 1];
  return Permutation(std::move(w), Unchecked{});
}

Permutation Permutation::relative_to(const Permutation& center) const {
  return compose(center.inverse());
}

std::int64_t inversions(std::span<const int> seq) {
  std::vector<int> a(seq.begin(), seq.end());
  std::vector<int> buf(a.size());
  return merge_count(a, buf, 0, static_cast<int>(a.size()));
}

std::int64_t inversions(const Permutation& p) {
  return inversions(std::span<const int>(p.word()));
}

InversionTable inversion_table(const Permutation& p) {
  // s_j(pi) = pi^{-1}(j) - 1 - #{j' < j : pi^{-1}(j') < pi^{-1}(j)};
  // identical to the prefix computation on the ranked list, with the
  // trivial final stage dropped.
  std::vector<int> items = p.ranked_list();
  InversionTable s = prefix_inversion_table(items);
  if (!s.empty()) s.pop_back();
  return s;
}

InversionTable prefix_inversion_table(std::span<const int> central_ranks) {
  const int t = static_cast<int>(central_ranks.size());
  InversionTable s(t);
  if (t == 0) return s;
  int max_rank = 0;
  for (int y : central_ranks) {
    if (y < 1) throw std::invalid_argument("central rank must be >= 1");
    max_rank = std::max(max_rank, y);
  }
  BitSet01 remaining(max_rank);
  for (int j = 0; j < t; ++j) {
    int y = central_ranks[j];
    if (remaining.count_upto(y) == remaining.count_upto(y - 1))
      throw std::invalid_argument("central ranks repeat the value " + std::to_string(y));
    s[j] = remaining.count_upto(y - 1);
    remaining.clear(y);
  }
  return s;
}

Permutation decode_inversion_table(const InversionTable& s, int n) {
  check_size(n);
  if (static_cast<int>(s.size()) != n - 1)
    throw std::invalid_argument("inversion table length " + std::to_string(s.size()) +
                                " does not match n-1 = " + std::to_string(n - 1));
  for (int j = 1; j <= n - 1; ++j) {
    int v = s[j - 1];
    if (v < 0 || v > n - j)
      throw std::invalid_argument("inversion table entry s_" + std::to_string(j) + " = " +
                                  std::to_string(v) + " outside {0,...," +
                                  std::to_string(n - j) + "}");
  }
  BitSet01 remaining(n);
  std::vector<int> items(n);
  for (int j = 1; j <= n; ++j) {
    int skip = (j <= n - 1) ? s[j - 1] : 0;
    int item = remaining.select(skip + 1);
    remaining.clear(item);
    items[j - 1] = item;
  }
  return Permutation::from_ranked_list(items);
}

std::int64_t kendall_tau(const Permutation& a, const Permutation& b) {
  return inversions(a.relative_to(b));
}

std::vector<int> splitting_times(std::span<const int> prefix) {
  std::vector<int> times;
  int running_max = 0;
  for (int m = 0; m < static_cast<int>(prefix.size()); ++m) {
    if (prefix[m] < 1) throw std::invalid_argument("prefix entries must be >= 1");
    running_max = std::max(running_max, prefix[m]);
    if (running_max == m + 1) times.push_back(m + 1);
  }
  return times;
}

std::vector<Component> components(std::span<const int> prefix) {
  std::vector<Component> out;
  int running_max = 0;
  int start = 0;  // 0-based start of the current component
  for (int m = 0; m < static_cast<int>(prefix.size()); ++m) {
    running_max = std::max(running_max, prefix[m]);
    if (running_max == m + 1) {
      Component c;
      c.length = m + 1 - start;
      c.reduced.reserve(c.length);
      for (int i = start; i <= m; ++i) c.reduced.push_back(prefix[i] - start);
      out.push_back(std::move(c));
      start = m + 1;
    }
  }
  return out;
}

CentralOrder::CentralOrder(std::vector<int> ranked_items) : items_(std::move(ranked_items)) {
  rank_by_item_.reserve(items_.size() * 2);
  for (int r = 1; r <= static_cast<int>(items_.size()); ++r) {
    int item = items_[r - 1];
    if (item < 1) throw std::invalid_argument("central order items must be >= 1");
    if (!rank_by_item_.emplace(item, r).second)
      throw std::invalid_argument("central order repeats item " + std::to_string(item));
  }
  sorted_items_ = items_;
  std::sort(sorted_items_.begin(), sorted_items_.end());
}

int CentralOrder::rank_of(int item) const {
  if (item < 1) throw std::invalid_argument("item ids are positive");
  auto it = rank_by_item_.find(item);
  if (it != rank_by_item_.end()) return it->second;
  // item sits in the increasing completion after the explicit prefix
  auto below = std::upper_bound(sorted_items_.begin(), sorted_items_.end(), item) -
               sorted_items_.begin();
  return explicit_size() + item - static_cast<int>(below);
}

int CentralOrder::item_at(int rank) const {
  if (rank < 1) throw std::invalid_argument("ranks are positive");
  if (rank <= explicit_size()) return items_[rank - 1];
  // k-th smallest positive integer not in the explicit prefix
  int k = rank - explicit_size();
  int lo = 1, hi = k + explicit_size();
  // f(v) = v - #{explicit <= v} is nondecreasing; find smallest v with f(v) = k
  while (lo < hi) {
    int mid = lo + (hi - lo) / 2;
    auto used = std::upper_bound(sorted_items_.begin(), sorted_items_.end(), mid) -
                sorted_items_.begin();
    if (mid - static_cast<int>(used) >= k)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

std::vector<int> CentralOrder::ranks_of(std::span<const int> items) const {
  std::vector<int> ranks;
  ranks.reserve(items.size());
  for (int item : items) ranks.push_back(rank_of(item));
  return ranks;
}

}  // namespace mallows
