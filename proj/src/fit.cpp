#include "mallows/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mallows {

namespace {

constexpr double kSmallThetaSeries = 1e-4;

// Pairwise weighted precedence counts over the universe. P[a][b] accumulates
// multiplicity * stage weight for observations where a is observed and b is
// either unobserved or ranked after a. The center objective is then
// sum_{a,b} P[a][b] * [center ranks b above a].
struct PrecedenceMatrix {
  std::vector<int> items;              // sorted universe
  std::vector<double> p;               // row-major m x m
  int m = 0;

  double& at(int a_idx, int b_idx) { return p[a_idx * m + b_idx]; }
  double at(int a_idx, int b_idx) const { return p[a_idx * m + b_idx]; }
  double skew(int a_idx, int b_idx) const { return at(a_idx, b_idx) - at(b_idx, a_idx); }

  int index_of(int item) const {
    return static_cast<int>(std::lower_bound(items.begin(), items.end(), item) -
                            items.begin());
  }
};

PrecedenceMatrix build_precedence(const RankingDataset& data, int t_limit,
                                  std::span<const double> weights) {
  PrecedenceMatrix pm;
  pm.items = data.universe_items();
  pm.m = static_cast<int>(pm.items.size());
  pm.p.assign(static_cast<std::size_t>(pm.m) * pm.m, 0.0);
  std::vector<char> in_obs(pm.m, 0);
  for (const auto& obs : data.observations) {
    int len = obs.length();
    if (t_limit > 0) len = std::min(len, t_limit);
    std::vector<int> idx(len);
    for (int j = 0; j < len; ++j) {
      idx[j] = pm.index_of(obs.items[j]);
      in_obs[idx[j]] = 1;
    }
    const double mult = static_cast<double>(obs.multiplicity);
    for (int j = 0; j < len; ++j) {
      const double w =
          weights.empty() ? 1.0
                          : (j < static_cast<int>(weights.size()) ? weights[j] : 0.0);
      if (w == 0.0) continue;
      const int a = idx[j];
      for (int jp = j + 1; jp < len; ++jp) pm.at(a, idx[jp]) += mult * w;
      for (int b = 0; b < pm.m; ++b)
        if (!in_obs[b]) pm.at(a, b) += mult * w;
    }
    for (int j = 0; j < len; ++j) in_obs[idx[j]] = 0;
  }
  return pm;
}

double objective_from_matrix(const PrecedenceMatrix& pm, const std::vector<int>& order) {
  // order = item indices from best to worst
  double obj = 0.0;
  for (int r = 0; r < pm.m; ++r)
    for (int rp = r + 1; rp < pm.m; ++rp) obj += pm.at(order[rp], order[r]);
  return obj;
}

// word list aligned to pm.items (rank of each item in sorted-item order)
std::vector<int> word_of_order(const PrecedenceMatrix& pm, const std::vector<int>& order) {
  std::vector<int> word(pm.m);
  for (int r = 0; r < pm.m; ++r) word[order[r]] = r + 1;
  return word;
}

std::vector<int> borda_order(const RankingDataset& data, const PrecedenceMatrix& pm,
                             int t_limit) {
  struct Acc {
    double rank_sum = 0.0;
    double freq = 0.0;
  };
  std::vector<Acc> acc(pm.m);
  for (const auto& obs : data.observations) {
    int len = obs.length();
    if (t_limit > 0) len = std::min(len, t_limit);
    for (int j = 0; j < len; ++j) {
      auto& a = acc[pm.index_of(obs.items[j])];
      a.rank_sum += static_cast<double>(obs.multiplicity) * (j + 1);
      a.freq += static_cast<double>(obs.multiplicity);
    }
  }
  std::vector<int> order(pm.m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = acc[a].freq > 0 ? acc[a].rank_sum / acc[a].freq
                                      : std::numeric_limits<double>::infinity();
    const double mb = acc[b].freq > 0 ? acc[b].rank_sum / acc[b].freq
                                      : std::numeric_limits<double>::infinity();
    if (ma != mb) return ma < mb;
    if (acc[a].freq != acc[b].freq) return acc[a].freq > acc[b].freq;
    return pm.items[a] < pm.items[b];
  });
  return order;
}

// Steepest-descent adjacent transpositions until no adjacent swap improves.
double adjacent_descent(const PrecedenceMatrix& pm, std::vector<int>& order, double obj) {
  for (;;) {
    double best_delta = 0.0;
    int best_r = -1;
    for (int r = 0; r + 1 < pm.m; ++r) {
      const double delta = pm.skew(order[r], order[r + 1]);
      if (delta < best_delta - 1e-12) {
        best_delta = delta;
        best_r = r;
      }
    }
    if (best_r < 0) return obj;
    std::swap(order[best_r], order[best_r + 1]);
    obj += best_delta;
  }
}

double pair_swap_delta(const PrecedenceMatrix& pm, const std::vector<int>& order, int r,
                       int rp) {
  const int u = order[r], v = order[rp];
  double delta = pm.skew(u, v);
  for (int mid = r + 1; mid < rp; ++mid) {
    const int w = order[mid];
    delta += pm.skew(u, w) + pm.skew(w, v);
  }
  return delta;
}

double pair_swap_pass(const PrecedenceMatrix& pm, std::vector<int>& order, double obj) {
  for (int r = 0; r < pm.m; ++r) {
    for (int rp = r + 1; rp < pm.m; ++rp) {
      const double delta = pair_swap_delta(pm, order, r, rp);
      if (delta < -1e-12) {
        std::swap(order[r], order[rp]);
        obj += delta;
      }
    }
  }
  return obj;
}

std::vector<int> exact_center(const PrecedenceMatrix& pm) {
  std::vector<int> order(pm.m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> best_order;
  std::vector<int> best_word;
  double best_obj = std::numeric_limits<double>::infinity();
  do {
    const double obj = objective_from_matrix(pm, order);
    if (obj < best_obj - 1e-12) {
      best_obj = obj;
      best_order = order;
      best_word = word_of_order(pm, order);
    } else if (obj < best_obj + 1e-12) {
      auto word = word_of_order(pm, order);
      if (word < best_word) {
        best_order = order;
        best_word = std::move(word);
      }
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return best_order;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::phi: return "phi";
    case ModelKind::gm: return "gm";
    case ModelKind::igm_top_t: return "igm";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "phi") return ModelKind::phi;
  if (s == "gm") return ModelKind::gm;
  if (s == "igm") return ModelKind::igm_top_t;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

double SufficientStats::stage_mean(int j) const {
  if (j < 1 || j > stages() || stage_count[j - 1] == 0) return 0.0;
  return stage_sum[j - 1] / static_cast<double>(stage_count[j - 1]);
}

double SufficientStats::pooled_mean(int t) const {
  const int upto = t > 0 ? std::min(t, stages()) : stages();
  double sum = 0.0;
  std::int64_t count = 0;
  for (int j = 1; j <= upto; ++j) {
    sum += stage_sum[j - 1];
    count += stage_count[j - 1];
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

SufficientStats sufficient_stats(const RankingDataset& data, const CentralOrder& center,
                                 int t_limit) {
  SufficientStats st;
  for (const auto& obs : data.observations) {
    int len = obs.length();
    if (t_limit > 0) len = std::min(len, t_limit);
    std::vector<int> ranks =
        center.ranks_of(std::span<const int>(obs.items.data(), len));
    InversionTable s = prefix_inversion_table(ranks);
    if (static_cast<int>(st.stage_sum.size()) < len) {
      st.stage_sum.resize(len, 0.0);
      st.stage_count.resize(len, 0);
    }
    for (int j = 0; j < len; ++j) {
      st.stage_sum[j] += static_cast<double>(obs.multiplicity) * s[j];
      st.stage_count[j] += obs.multiplicity;
      st.total_sum += static_cast<double>(obs.multiplicity) * s[j];
    }
    st.n_observations += obs.multiplicity;
  }
  if (st.n_observations == 0) throw std::invalid_argument("empty dataset");
  return st;
}

bool FittedModel::any_clamped() const {
  for (const auto& d : stage_diagnostics)
    if (d.clamped_high || d.clamped_low) return true;
  return false;
}

double q_factorial(double q, int n) { return std::exp(log_q_factorial(q, n)); }

double log_q_factorial(double q, int n) {
  if (q < 0.0 || q >= 1.0) throw std::invalid_argument("q must lie in [0,1)");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (q == 0.0) return 0.0;
  const double logq = std::log(q);
  double acc = 0.0;
  for (int k = 1; k <= n; ++k) acc += std::log1p(-std::exp(k * logq));
  return acc - n * std::log1p(-q);
}

double truncated_geometric_mean(double theta, int support) {
  if (!(theta > 0)) throw std::invalid_argument("theta must be > 0");
  if (support < 1) throw std::invalid_argument("support size must be >= 1");
  const int k = support;
  if (k == 1) return 0.0;
  if (theta * k < kSmallThetaSeries) {
    // 1/expm1(x) = 1/x - 1/2 + x/12 - x^3/720 + ...
    const double kk = static_cast<double>(k);
    return (kk - 1.0) / 2.0 - (kk * kk - 1.0) * theta / 12.0 +
           (kk * kk * kk * kk - 1.0) * theta * theta * theta / 720.0;
  }
  return 1.0 / std::expm1(theta) - k / std::expm1(k * theta);
}

double truncated_geometric_var(double theta, int support) {
  if (!(theta > 0)) throw std::invalid_argument("theta must be > 0");
  const int k = support;
  if (k == 1) return 0.0;
  if (theta * k < kSmallThetaSeries) {
    const double kk = static_cast<double>(k);
    return (kk * kk - 1.0) / 12.0;  // uniform limit
  }
  const double e1 = std::expm1(theta);
  const double ek = std::expm1(k * theta);
  return (1.0 + e1) / (e1 * e1) - static_cast<double>(k) * k * (1.0 + ek) / (ek * ek);
}

double mean_inversions_g(double q, int n) {
  if (q < 0.0 || q >= 1.0) throw std::invalid_argument("q must lie in [0,1)");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (q == 0.0) return 0.0;
  const double theta = -std::log(q);
  double g = 0.0;
  for (int k = 2; k <= n; ++k) g += truncated_geometric_mean(theta, k);
  return g;
}

ThetaFit fit_theta_from_mean(double mean_inv, int n) {
  if (n < 2) throw std::invalid_argument("need n >= 2 to fit a dispersion");
  ThetaFit fit;
  const double max_mean = static_cast<double>(n) * (n - 1) / 4.0;
  auto g_of = [n](double theta) { return mean_inversions_g(std::exp(-theta), n); };
  if (mean_inv <= 0.0) {
    fit.theta = kThetaMax;
    fit.diag.clamped_high = true;
    fit.diag.residual = g_of(kThetaMax) - mean_inv;
    return fit;
  }
  if (mean_inv >= max_mean) {
    fit.theta = kThetaMin;
    fit.diag.clamped_low = true;
    fit.diag.residual = g_of(kThetaMin) - mean_inv;
    return fit;
  }
  // g(e^{-theta}) is strictly decreasing in theta: bisection is safe.
  double lo = kThetaMin, hi = kThetaMax;
  int iters = 0;
  for (; iters < 200 && hi - lo > 1e-12; ++iters) {
    const double mid = 0.5 * (lo + hi);
    if (g_of(mid) > mean_inv)
      lo = mid;
    else
      hi = mid;
  }
  double theta = 0.5 * (lo + hi);
  const double tol = 1e-10 * static_cast<double>(n) * n;
  for (int i = 0; i < 10; ++i) {
    const double r = g_of(theta) - mean_inv;
    if (std::abs(r) <= tol) break;
    double deriv = 0.0;  // d/dtheta g = -sum Var(G_k)
    for (int k = 2; k <= n; ++k) deriv -= truncated_geometric_var(theta, k);
    if (deriv == 0.0) break;
    double next = theta - r / deriv;
    if (!(next > kThetaMin && next < kThetaMax)) break;
    theta = next;
    ++iters;
  }
  fit.theta = theta;
  fit.diag.iterations = iters;
  fit.diag.residual = g_of(theta) - mean_inv;
  return fit;
}

ThetaFit fit_theta_known_center(const RankingDataset& data, const Permutation& center) {
  if (!data.all_complete() ||
      (data.universe_size > 0 && data.universe_size != center.size()))
    throw std::invalid_argument("phi fit requires complete rankings matching the center");
  SufficientStats st = sufficient_stats(data, CentralOrder(center));
  return fit_theta_from_mean(st.mean_total(), center.size());
}

namespace {

// root of truncated_geometric_mean(theta, support) = target
ThetaFit fit_stage_theta(double target, int support) {
  ThetaFit fit;
  const double max_mean = static_cast<double>(support - 1) / 2.0;
  if (target <= 0.0) {
    fit.theta = kThetaMax;
    fit.diag.clamped_high = true;
    return fit;
  }
  if (target >= max_mean) {
    fit.theta = kThetaMin;
    fit.diag.clamped_low = true;
    return fit;
  }
  double lo = kThetaMin, hi = kThetaMax;
  int iters = 0;
  for (; iters < 200 && hi - lo > 1e-12; ++iters) {
    const double mid = 0.5 * (lo + hi);
    if (truncated_geometric_mean(mid, support) > target)
      lo = mid;
    else
      hi = mid;
  }
  fit.theta = 0.5 * (lo + hi);
  fit.diag.iterations = iters;
  fit.diag.residual = truncated_geometric_mean(fit.theta, support) - target;
  return fit;
}

}  // namespace

std::vector<ThetaFit> fit_gm_known_center(const RankingDataset& data,
                                          const Permutation& center) {
  if (!data.all_complete() ||
      (data.universe_size > 0 && data.universe_size != center.size()))
    throw std::invalid_argument("gm fit requires complete rankings matching the center");
  const int n = center.size();
  SufficientStats st = sufficient_stats(data, CentralOrder(center));
  std::vector<ThetaFit> fits;
  fits.reserve(n - 1);
  for (int j = 1; j <= n - 1; ++j) fits.push_back(fit_stage_theta(st.stage_mean(j), n - j + 1));
  return fits;
}

std::vector<ThetaFit> fit_igm_thetas(const RankingDataset& data, const CentralOrder& center,
                                     int t) {
  if (t < 1) throw std::invalid_argument("model size t must be >= 1");
  SufficientStats st = sufficient_stats(data, center, t);
  std::vector<ThetaFit> fits(t);
  for (int j = 1; j <= t; ++j) {
    const double sbar = st.stage_mean(j);
    if (j > st.stages() || st.stage_count[j - 1] == 0 || sbar <= 0.0) {
      fits[j - 1].theta = kThetaMax;
      fits[j - 1].diag.clamped_high = true;
      continue;
    }
    fits[j - 1].theta = std::min(std::log1p(1.0 / sbar), kThetaMax);
    fits[j - 1].diag.residual = 0.0;
  }
  return fits;
}

ThetaFit fit_igm_single_theta(const RankingDataset& data, const CentralOrder& center, int t) {
  if (t < 1) throw std::invalid_argument("model size t must be >= 1");
  SufficientStats st = sufficient_stats(data, center, t);
  ThetaFit fit;
  const double sbar = st.pooled_mean(t);
  if (sbar <= 0.0) {
    fit.theta = kThetaMax;
    fit.diag.clamped_high = true;
    return fit;
  }
  fit.theta = std::min(std::log1p(1.0 / sbar), kThetaMax);
  return fit;
}

std::vector<int> fit_center(const RankingDataset& data, ModelKind kind,
                            const CenterFitOptions& options) {
  if (data.observations.empty()) throw std::invalid_argument("empty dataset");
  const int t_limit = kind == ModelKind::igm_top_t ? options.t_limit : 0;
  PrecedenceMatrix pm = build_precedence(data, t_limit, options.stage_weights);
  std::vector<int> order;
  if (options.mode == CenterMode::exact ||
      (options.mode == CenterMode::automatic && pm.m <= options.exact_limit)) {
    if (pm.m > 12)
      throw std::invalid_argument("exact consensus is infeasible for universe size " +
                                  std::to_string(pm.m));
    order = exact_center(pm);
  } else {
    order = borda_order(data, pm, t_limit);
    double obj = objective_from_matrix(pm, order);
    obj = adjacent_descent(pm, order, obj);
    double after_pairs = pair_swap_pass(pm, order, obj);
    if (after_pairs < obj) after_pairs = adjacent_descent(pm, order, after_pairs);
    double best_obj = after_pairs;
    std::vector<int> best = order;
    std::vector<int> best_word = word_of_order(pm, best);
    std::mt19937_64 rng(options.seed);
    for (int r = 1; r < options.restarts; ++r) {
      std::vector<int> cand = borda_order(data, pm, t_limit);
      for (int s = 0; s < pm.m; ++s) {
        const int i = static_cast<int>(rng() % pm.m);
        const int j = static_cast<int>(rng() % pm.m);
        std::swap(cand[i], cand[j]);
      }
      double cobj = objective_from_matrix(pm, cand);
      cobj = adjacent_descent(pm, cand, cobj);
      const double cp = pair_swap_pass(pm, cand, cobj);
      cobj = cp < cobj ? adjacent_descent(pm, cand, cp) : cp;
      auto word = word_of_order(pm, cand);
      if (cobj < best_obj - 1e-12 ||
          (cobj < best_obj + 1e-12 && word < best_word)) {
        best_obj = cobj;
        best = cand;
        best_word = std::move(word);
      }
    }
    order = best;
  }
  std::vector<int> ranked(pm.m);
  for (int r = 0; r < pm.m; ++r) ranked[r] = pm.items[order[r]];
  return ranked;
}

double center_objective(const RankingDataset& data, const std::vector<int>& center_ranked,
                        int t_limit, std::span<const double> stage_weights) {
  CentralOrder center(center_ranked);
  double obj = 0.0;
  for (const auto& obs : data.observations) {
    int len = obs.length();
    if (t_limit > 0) len = std::min(len, t_limit);
    std::vector<int> ranks =
        center.ranks_of(std::span<const int>(obs.items.data(), len));
    InversionTable s = prefix_inversion_table(ranks);
    for (int j = 0; j < len; ++j) {
      const double w = stage_weights.empty()
                           ? 1.0
                           : (j < static_cast<int>(stage_weights.size()) ? stage_weights[j]
                                                                         : 0.0);
      obj += static_cast<double>(obs.multiplicity) * w * s[j];
    }
  }
  return obj;
}

double log_likelihood(const RankingDataset& data, const FittedModel& model) {
  if (data.observations.empty()) throw std::invalid_argument("empty dataset");
  CentralOrder center(model.center_ranked);
  double ll = 0.0;
  if (model.kind == ModelKind::phi || model.kind == ModelKind::gm) {
    const int n = model.model_size;
    double log_psi = 0.0;
    if (model.kind == ModelKind::phi) {
      if (model.thetas.size() != 1) throw std::invalid_argument("phi model has one theta");
      log_psi = log_q_factorial(std::exp(-model.thetas[0]), n);
    } else {
      if (static_cast<int>(model.thetas.size()) != n - 1)
        throw std::invalid_argument("gm model needs n-1 thetas");
      for (int j = 1; j <= n - 1; ++j) {
        const double th = model.thetas[j - 1];
        log_psi += std::log1p(-std::exp(-(n - j + 1) * th)) - std::log1p(-std::exp(-th));
      }
    }
    for (const auto& obs : data.observations) {
      if (obs.length() != n)
        throw std::invalid_argument("observation length " + std::to_string(obs.length()) +
                                    " incompatible with model size " + std::to_string(n));
      std::vector<int> ranks = center.ranks_of(obs.items);
      InversionTable s = prefix_inversion_table(ranks);
      double d = 0.0;
      for (int j = 0; j < n - 1; ++j)
        d += (model.kind == ModelKind::phi ? model.thetas[0] : model.thetas[j]) * s[j];
      ll += static_cast<double>(obs.multiplicity) * (-d - log_psi);
    }
    return ll;
  }
  // IGM top-t: per-stage factorized likelihood; observations may be shorter
  // than t, stages beyond the observed prefix integrate out.
  const int t = model.model_size;
  if (static_cast<int>(model.thetas.size()) != t)
    throw std::invalid_argument("igm model needs t thetas");
  for (const auto& obs : data.observations) {
    const int len = std::min(obs.length(), t);
    std::vector<int> ranks =
        center.ranks_of(std::span<const int>(obs.items.data(), len));
    InversionTable s = prefix_inversion_table(ranks);
    double term = 0.0;
    for (int j = 0; j < len; ++j) {
      const double th = model.thetas[j];
      term += -th * s[j] + std::log1p(-std::exp(-th));
    }
    ll += static_cast<double>(obs.multiplicity) * term;
  }
  return ll;
}

FittedModel fit_model(const RankingDataset& data, ModelKind kind, int t,
                      const ModelFitOptions& options) {
  FittedModel model;
  model.kind = kind;
  // The center is shared by every stage of the infinite model, so by default
  // it is estimated from the full observations even when the dispersions only
  // cover the first t stages; set options.center.t_limit to truncate.
  model.center_ranked = options.fixed_center ? *options.fixed_center
                                             : fit_center(data, kind, options.center);
  if (kind == ModelKind::phi) {
    model.model_size = static_cast<int>(model.center_ranked.size());
    auto f = fit_theta_known_center(
        data, Permutation::from_ranked_list(model.center_ranked));
    model.thetas = {f.theta};
    model.stage_diagnostics = {f.diag};
  } else if (kind == ModelKind::gm) {
    model.model_size = static_cast<int>(model.center_ranked.size());
    auto fits =
        fit_gm_known_center(data, Permutation::from_ranked_list(model.center_ranked));
    for (auto& f : fits) {
      model.thetas.push_back(f.theta);
      model.stage_diagnostics.push_back(f.diag);
    }
  } else {
    model.model_size = t;
    CentralOrder center(model.center_ranked);
    if (options.pooled) {
      auto f = fit_igm_single_theta(data, center, t);
      model.thetas.assign(t, f.theta);
      model.stage_diagnostics.assign(t, f.diag);
    } else {
      auto fits = fit_igm_thetas(data, center, t);
      for (auto& f : fits) {
        model.thetas.push_back(f.theta);
        model.stage_diagnostics.push_back(f.diag);
      }
    }
  }
  model.log_likelihood = log_likelihood(data, model);
  return model;
}

}  // namespace mallows
