#include "mallows/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mallows/regeneration.hpp"

namespace mallows {

double effective_length(double theta) { return expected_component_length(theta); }

namespace {

// MB(t): single-parameter IGM fit on data truncated to top-t, with the
// center re-estimated from the truncated data.
ThetaFit mb_fit(const RankingDataset& data, int t, const CenterFitOptions& center_options) {
  CenterFitOptions copt = center_options;
  copt.t_limit = t;
  std::vector<int> center = fit_center(data, ModelKind::igm_top_t, copt);
  return fit_igm_single_theta(data, CentralOrder(std::move(center)), t);
}

}  // namespace

SelectionTrace select_t(const RankingDataset& data, const SelectTOptions& options) {
  if (data.observations.empty()) throw std::invalid_argument("empty dataset");
  if (!(options.lambda > 0.0 && options.lambda < 1.0))
    throw std::invalid_argument("lambda must lie in (0,1)");

  SelectionTrace trace;
  trace.lambda = options.lambda;
  trace.t_max = data.max_length();
  trace.cutoff = std::max(1, static_cast<int>(std::floor(options.lambda * trace.t_max)));

  ThetaFit fit0 = mb_fit(data, 1, options.center);
  trace.theta0 = fit0.theta;
  trace.effective_len0 = effective_length(fit0.theta);
  trace.degenerate_fit = fit0.diag.clamped_high || fit0.diag.clamped_low;

  int lo, hi;
  if (options.window) {
    lo = std::max(1, options.window->first);
    hi = std::min(trace.t_max, options.window->second);
  } else {
    const int r = static_cast<int>(std::lround(trace.effective_len0));
    const int w = std::max(2, (r + 1) / 2);
    lo = std::max(1, r - w);
    hi = std::min(trace.t_max, r + w);
  }
  lo = std::min(lo, trace.t_max);
  if (hi < lo) hi = lo;

  double best_err = std::numeric_limits<double>::infinity();
  trace.argmin_t = lo;
  for (int t = lo; t <= hi; ++t) {
    ThetaFit fit = t == 1 ? fit0 : mb_fit(data, t, options.center);
    SelectionCandidate cand;
    cand.t = t;
    cand.theta_hat = fit.theta;
    cand.effective_len = effective_length(fit.theta);
    cand.error = std::abs(static_cast<double>(t) - cand.effective_len);
    cand.clamped = fit.diag.clamped_high || fit.diag.clamped_low;
    trace.degenerate_fit = trace.degenerate_fit || cand.clamped;
    if (cand.error < best_err) {  // strict: ties keep the smaller t
      best_err = cand.error;
      trace.argmin_t = t;
    }
    trace.candidates.push_back(cand);
  }
  trace.chosen_t = std::min(trace.argmin_t, trace.cutoff);
  return trace;
}

}  // namespace mallows
