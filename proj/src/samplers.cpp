#include "mallows/samplers.hpp"

#include <algorithm>
#include <cmath>

namespace mallows {

int sample_truncated_geometric(double theta, int support, Rng& rng) {
  if (!(theta > 0)) throw std::invalid_argument("theta must be > 0");
  if (support < 1) throw std::invalid_argument("support size must be >= 1");
  if (support == 1) return 0;
  const double q = std::exp(-theta);
  const double u = uniform01(rng);
  // inverse CDF: i = floor(log(1 - u(1-q^k)) / log q), clamped to the support
  const double mass = -std::expm1(static_cast<double>(support) * std::log(q));
  int i = static_cast<int>(std::floor(std::log1p(-u * mass) / std::log(q)));
  return std::clamp(i, 0, support - 1);
}

int sample_geometric(double theta, Rng& rng) {
  if (!(theta > 0)) throw std::invalid_argument("theta must be > 0");
  const double u = uniform01(rng);
  double v = std::floor(std::log1p(-u) / -theta);  // log(1-u)/log(e^{-theta})
  if (v < 0) v = 0;
  return static_cast<int>(v);
}

double truncated_geometric_pmf(double theta, int support, int i) {
  if (!(theta > 0)) throw std::invalid_argument("theta must be > 0");
  if (i < 0 || i >= support) return 0.0;
  const double q = std::exp(-theta);
  const double mass = -std::expm1(static_cast<double>(support) * std::log(q));
  return std::pow(q, i) * (1.0 - q) / mass;
}

Permutation sample_mallows_phi(int n, double theta, const Permutation& center, Rng& rng) {
  if (center.size() != n) throw std::invalid_argument("center size does not match n");
  InversionTable s(std::max(0, n - 1));
  for (int j = 1; j <= n - 1; ++j) s[j - 1] = sample_truncated_geometric(theta, n - j + 1, rng);
  return decode_inversion_table(s, n).compose(center);
}

Permutation sample_gm(int n, std::span<const double> thetas, const Permutation& center,
                      Rng& rng) {
  if (center.size() != n) throw std::invalid_argument("center size does not match n");
  if (static_cast<int>(thetas.size()) != n - 1)
    throw std::invalid_argument("need n-1 stage dispersions");
  InversionTable s(std::max(0, n - 1));
  for (int j = 1; j <= n - 1; ++j)
    s[j - 1] = sample_truncated_geometric(thetas[j - 1], n - j + 1, rng);
  return decode_inversion_table(s, n).compose(center);
}

std::vector<int> sample_igm_top_t(std::span<const double> thetas, const CentralOrder& center,
                                  Rng& rng) {
  const int t = static_cast<int>(thetas.size());
  if (t < 1) throw std::invalid_argument("model size t must be >= 1");
  std::vector<RowDistribution> rows;
  rows.reserve(t);
  for (double th : thetas) rows.push_back(RowDistribution::geometric(th));
  PShiftedStream stream(std::move(rows), rng);
  std::vector<int> items(t);
  for (int j = 0; j < t; ++j) items[j] = center.item_at(stream.next());
  return items;
}

RowDistribution RowDistribution::geometric(double theta) {
  if (!(theta > 0)) throw std::invalid_argument("theta must be > 0");
  RowDistribution d;
  d.geometric_ = true;
  d.q_ = std::exp(-theta);
  return d;
}

RowDistribution RowDistribution::from_probs(std::vector<double> probs) {
  RowDistribution d;
  double total = 0.0;
  for (double p : probs) {
    if (p < 0) throw std::invalid_argument("row probabilities must be nonnegative");
    total += p;
  }
  if (probs.empty() || std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("row probabilities must sum to 1");
  d.probs_ = std::move(probs);
  d.cdf_.resize(d.probs_.size());
  double c = 0.0;
  for (std::size_t i = 0; i < d.probs_.size(); ++i) {
    c += d.probs_[i];
    d.cdf_[i] = c;
  }
  d.cdf_.back() = 1.0;
  return d;
}

double RowDistribution::prob(int k) const {
  if (k < 1) return 0.0;
  if (geometric_) return (1.0 - q_) * std::pow(q_, k - 1);
  if (k > static_cast<int>(probs_.size())) return 0.0;
  return probs_[k - 1];
}

double RowDistribution::cumulative(int k) const {
  if (k < 1) return 0.0;
  if (geometric_) return -std::expm1(static_cast<double>(k) * std::log(q_));
  if (k >= static_cast<int>(cdf_.size())) return 1.0;
  return cdf_[k - 1];
}

int RowDistribution::sample(Rng& rng) const {
  if (geometric_) {
    const double u = uniform01(rng);
    double v = std::floor(std::log1p(-u) / std::log(q_));
    if (v < 0) v = 0;
    return static_cast<int>(v) + 1;
  }
  const double u = uniform01(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int>(it - cdf_.begin()) + 1;
}

PShiftedStream::PShiftedStream(RowDistribution row, Rng& rng, std::size_t cap)
    : PShiftedStream(std::vector<RowDistribution>{std::move(row)}, rng, cap) {}

PShiftedStream::PShiftedStream(std::vector<RowDistribution> rows, Rng& rng, std::size_t cap)
    : rows_(std::move(rows)), rng_(&rng), cap_(cap) {
  if (rows_.empty()) throw std::invalid_argument("need at least one row distribution");
  // The tail row repeats forever, so it is the homogeneous part: p_1 = 0 there
  // would make a complete permutation impossible. Earlier rows may skip rank 1.
  if (!(rows_.back().first_prob() > 0))
    throw std::invalid_argument("p-shifted rows require p_1 > 0 in the homogeneous tail");
  grow(1024);
}

const RowDistribution& PShiftedStream::row_at(std::size_t i) const {
  return rows_[std::min(i, rows_.size() - 1)];
}

void PShiftedStream::grow(int min_capacity) {
  int cap = std::max(capacity_, 1);
  while (cap < min_capacity) cap *= 2;
  if (cap == capacity_) return;
  capacity_ = cap;
  used_.resize(capacity_ + 1, 0);
  tree_.assign(capacity_ + 1, 0);
  for (int v = 1; v <= capacity_; ++v) {
    if (!used_[v]) tree_[v] += 1;
    // propagate the accumulated subtree even when v itself is used
    int j = v + (v & -v);
    if (j <= capacity_) tree_[j] += tree_[v];
  }
}

int PShiftedStream::select_unused(int k) {
  // k-th unused value; grow until the pool is large enough
  while (capacity_ - used_count_ < k) grow(capacity_ * 2);
  int pos = 0;
  int step_log = 1;
  while ((1 << step_log) <= capacity_) ++step_log;
  int remaining = k;
  for (int step = 1 << step_log; step > 0; step >>= 1) {
    int next = pos + step;
    if (next <= capacity_ && tree_[next] < remaining) {
      pos = next;
      remaining -= tree_[next];
    }
  }
  return pos + 1;
}

void PShiftedStream::mark_used(int value) {
  used_[value] = 1;
  for (int i = value; i <= capacity_; i += i & -i) tree_[i] -= 1;
  ++used_count_;
}

int PShiftedStream::next() {
  if (emitted_ >= cap_) throw StreamCapExceeded(cap_);
  int x = row_at(emitted_).sample(*rng_);
  int value = select_unused(x);
  mark_used(value);
  discordances_.push_back(x - 1);
  ++emitted_;
  return value;
}

std::vector<int> PShiftedStream::take(std::size_t m) {
  std::vector<int> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(next());
  return out;
}

std::vector<int> sample_p_shifted(const RowDistribution& row, std::size_t m, Rng& rng,
                                  std::size_t cap) {
  PShiftedStream stream(row, rng, cap);
  return stream.take(m);
}

}  // namespace mallows
