#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mallows/dataset.hpp"
#include "mallows/fit.hpp"

namespace mallows {

/// Effective length of the random infinite permutation at dispersion theta,
/// 1/(e^{-theta}; e^{-theta})_inf; the model-size target of the selection rule.
double effective_length(double theta);

struct SelectionCandidate {
  int t = 0;
  double theta_hat = 0.0;
  double effective_len = 0.0;
  double error = 0.0;  // |t - effective_len|
  bool clamped = false;
};

struct SelectionTrace {
  double theta0 = 0.0;          // single-parameter fit at t = 1
  double effective_len0 = 0.0;  // effective length at theta0
  std::vector<SelectionCandidate> candidates;  // ordered by t
  int argmin_t = 0;
  int chosen_t = 0;
  int t_max = 0;
  double lambda = 0.5;
  int cutoff = 0;  // max(1, floor(lambda * t_max))
  bool degenerate_fit = false;
};

struct SelectTOptions {
  double lambda = 0.5;
  std::optional<std::pair<int, int>> window;  // explicit search range [lo, hi]
  CenterFitOptions center;                    // per-candidate center estimation
};

/// Model-size selection: fit the single-parameter top-1 model, build a small
/// search window around the rounded effective length, then pick the t whose
/// own fitted effective length it matches best; ties break toward smaller t
/// and the result is capped at floor(lambda * t_max), clamped to >= 1.
SelectionTrace select_t(const RankingDataset& data, const SelectTOptions& options = {});

}  // namespace mallows
