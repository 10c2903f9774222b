#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mallows/dataset.hpp"
#include "mallows/permutation.hpp"

namespace mallows {

inline constexpr double kThetaMax = 50.0;
inline constexpr double kThetaMin = 1e-8;

enum class ModelKind { phi, gm, igm_top_t };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Per-stage discordance statistics. Stages with no observations (partial
/// rankings shorter than the stage) have count 0.
struct SufficientStats {
  std::vector<double> stage_sum;
  std::vector<std::int64_t> stage_count;
  double total_sum = 0.0;
  std::int64_t n_observations = 0;

  int stages() const { return static_cast<int>(stage_sum.size()); }
  double stage_mean(int j) const;  // 1-based stage
  /// Pooled mean over stages 1..t (all stages when t <= 0).
  double pooled_mean(int t = 0) const;
  double mean_total() const { return total_sum / static_cast<double>(n_observations); }
};

/// Stagewise discordances of every observation against `center`, truncated to
/// the top-t prefix when t_limit > 0.
SufficientStats sufficient_stats(const RankingDataset& data, const CentralOrder& center,
                                 int t_limit = 0);

struct FitDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  bool clamped_high = false;  // theta pinned at kThetaMax (mean discordance 0)
  bool clamped_low = false;   // theta pinned at kThetaMin
};

struct FittedModel {
  ModelKind kind = ModelKind::phi;
  int model_size = 0;              // n for phi/gm, t for igm
  std::vector<double> thetas;      // 1 entry for phi, n-1 for gm, t for igm
  std::vector<int> center_ranked;  // ranked list over the universe items
  double log_likelihood = 0.0;
  std::vector<FitDiagnostics> stage_diagnostics;
  bool any_clamped() const;
};

/// q-factorial f(q) = prod_{k=1..n} (1-q^k)/(1-q) = sum_pi q^{inv(pi)}.
double q_factorial(double q, int n);
double log_q_factorial(double q, int n);

/// Mean of the truncated geometric G_{e^-theta, k} on {0,...,k-1}.
double truncated_geometric_mean(double theta, int support);
double truncated_geometric_var(double theta, int support);

/// g(q) of the MLE equation: expected inversions of a Mallows phi draw,
/// g(q) = sum_{k=2..n} E[G_{q,k}]. Continuous at q=0 and (removably) q->1.
double mean_inversions_g(double q, int n);

struct ThetaFit {
  double theta = 0.0;
  FitDiagnostics diag;
};

/// Solves g(e^{-theta}) = mean_inv by bisection plus Newton polish.
ThetaFit fit_theta_from_mean(double mean_inv, int n);

/// Mallows phi MLE of theta with known center; observations must be complete.
ThetaFit fit_theta_known_center(const RankingDataset& data, const Permutation& center);

/// Stagewise GM dispersions with known center (root of the stage-mean map).
std::vector<ThetaFit> fit_gm_known_center(const RankingDataset& data,
                                          const Permutation& center);

/// IGM top-t stage MLEs: theta_j = log(1 + 1/sbar_j).
std::vector<ThetaFit> fit_igm_thetas(const RankingDataset& data, const CentralOrder& center,
                                     int t);
/// Single-parameter IGM MLE: pooled stages 1..t.
ThetaFit fit_igm_single_theta(const RankingDataset& data, const CentralOrder& center, int t);

enum class CenterMode { automatic, exact, heuristic };

struct CenterFitOptions {
  CenterMode mode = CenterMode::automatic;
  int exact_limit = 9;      // exact enumeration allowed up to this universe size
  int t_limit = 0;          // truncate observations to top-t (0 = no truncation)
  std::vector<double> stage_weights;  // optional per-stage weights (GM objective)
  int restarts = 1;
  std::uint64_t seed = 1;   // perturbation stream for restarts > 1
};

/// Consensus-center search: minimizes the summed stagewise discordance of the
/// data around the returned ranked list. Exact enumeration below
/// exact_limit, otherwise Borda initialization + adjacent-transposition
/// steepest descent + one pass of arbitrary pair swaps.
std::vector<int> fit_center(const RankingDataset& data, ModelKind kind,
                            const CenterFitOptions& options = {});

/// Total weighted discordance of the data around a candidate center.
double center_objective(const RankingDataset& data, const std::vector<int>& center_ranked,
                        int t_limit = 0, std::span<const double> stage_weights = {});

/// Exact log density of the data under a fitted model, in log space.
double log_likelihood(const RankingDataset& data, const FittedModel& model);

struct ModelFitOptions {
  CenterFitOptions center;
  bool pooled = false;  // igm: single dispersion across stages
  std::optional<std::vector<int>> fixed_center;
};

/// End-to-end fit: center estimate then dispersion MLEs then log-likelihood.
FittedModel fit_model(const RankingDataset& data, ModelKind kind, int t,
                      const ModelFitOptions& options = {});

}  // namespace mallows
