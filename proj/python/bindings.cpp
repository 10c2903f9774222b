// Python bindings for the core operations. Permutations cross the boundary as
// plain lists: word lists for the algebraic operations, ranked lists for
// observations and centers, matching the text formats of the CLI.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mallows/dataset.hpp"
#include "mallows/experiments.hpp"
#include "mallows/fit.hpp"
#include "mallows/model_selection.hpp"
#include "mallows/permutation.hpp"
#include "mallows/regeneration.hpp"
#include "mallows/samplers.hpp"

namespace py = pybind11;
using namespace mallows;

namespace {

RankingDataset make_dataset(const std::vector<std::vector<int>>& rankings,
                            const std::vector<std::int64_t>& multiplicities,
                            int universe_size) {
  RankingDataset data = dataset_from_rankings(rankings, universe_size);
  if (!multiplicities.empty()) {
    if (multiplicities.size() != data.observations.size())
      throw std::invalid_argument("multiplicities must match the number of rankings");
    for (std::size_t i = 0; i < multiplicities.size(); ++i)
      data.observations[i].multiplicity = multiplicities[i];
  }
  return data;
}

CentralOrder make_center(const std::vector<int>& ranked) {
  return ranked.empty() ? CentralOrder() : CentralOrder(ranked);
}

CenterMode center_mode_from_string(const std::string& mode) {
  if (mode == "exact") return CenterMode::exact;
  if (mode == "heuristic") return CenterMode::heuristic;
  if (mode == "auto") return CenterMode::automatic;
  throw std::invalid_argument("center mode must be auto|exact|heuristic");
}

py::dict model_to_dict(const FittedModel& model) {
  py::dict d;
  d["model"] = to_string(model.kind);
  d["size"] = model.model_size;
  d["thetas"] = model.thetas;
  d["center"] = model.center_ranked;
  d["log_likelihood"] = model.log_likelihood;
  bool clamped = model.any_clamped();
  d["clamped"] = clamped;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mallows, m) {
  m.doc() = "Mallows ranking models: exact samplers, MLE fitting, renewal analysis "
            "and automatic model-size selection";

  // permutation algebra on word lists
  m.def("inversions",
        [](const std::vector<int>& word) {
          return inversions(Permutation::from_word(word));
        },
        py::arg("word"));
  m.def("inversion_table",
        [](const std::vector<int>& word) {
          return inversion_table(Permutation::from_word(word));
        },
        py::arg("word"));
  m.def("decode_inversion_table",
        [](const std::vector<int>& table, int n) {
          return decode_inversion_table(table, n).word();
        },
        py::arg("table"), py::arg("n"));
  m.def("prefix_inversion_table",
        [](const std::vector<int>& central_ranks) {
          return prefix_inversion_table(central_ranks);
        },
        py::arg("central_ranks"));
  m.def("compose",
        [](const std::vector<int>& a, const std::vector<int>& b) {
          return Permutation::from_word(a).compose(Permutation::from_word(b)).word();
        },
        py::arg("a"), py::arg("b"));
  m.def("invert",
        [](const std::vector<int>& word) {
          return Permutation::from_word(word).inverse().word();
        },
        py::arg("word"));
  m.def("relative",
        [](const std::vector<int>& word, const std::vector<int>& center) {
          return Permutation::from_word(word)
              .relative_to(Permutation::from_word(center))
              .word();
        },
        py::arg("word"), py::arg("center"));
  m.def("kendall_tau",
        [](const std::vector<int>& a, const std::vector<int>& b) {
          return kendall_tau(Permutation::from_word(a), Permutation::from_word(b));
        },
        py::arg("a"), py::arg("b"));
  m.def("word_from_ranked",
        [](const std::vector<int>& ranked) {
          return Permutation::from_ranked_list(ranked).word();
        },
        py::arg("ranked"));
  m.def("ranked_from_word",
        [](const std::vector<int>& word) {
          return Permutation::from_word(word).ranked_list();
        },
        py::arg("word"));
  m.def("splitting_times",
        [](const std::vector<int>& prefix) { return splitting_times(prefix); },
        py::arg("prefix"));
  m.def("components",
        [](const std::vector<int>& prefix) {
          std::vector<std::pair<int, std::vector<int>>> out;
          for (auto& c : components(prefix)) out.emplace_back(c.length, c.reduced);
          return out;
        },
        py::arg("prefix"));

  // samplers; observations come back as ranked lists
  m.def("sample_mallows_phi",
        [](int n, double theta, int count, std::uint64_t seed,
           const std::vector<int>& center) {
          Rng rng(seed);
          Permutation c = center.empty() ? Permutation::identity(n)
                                         : Permutation::from_ranked_list(center);
          std::vector<std::vector<int>> out;
          out.reserve(count);
          for (int i = 0; i < count; ++i)
            out.push_back(sample_mallows_phi(n, theta, c, rng).ranked_list());
          return out;
        },
        py::arg("n"), py::arg("theta"), py::arg("count") = 1, py::arg("seed") = 1,
        py::arg("center") = std::vector<int>{});
  m.def("sample_gm",
        [](int n, const std::vector<double>& thetas, int count, std::uint64_t seed,
           const std::vector<int>& center) {
          Rng rng(seed);
          Permutation c = center.empty() ? Permutation::identity(n)
                                         : Permutation::from_ranked_list(center);
          std::vector<std::vector<int>> out;
          out.reserve(count);
          for (int i = 0; i < count; ++i)
            out.push_back(sample_gm(n, thetas, c, rng).ranked_list());
          return out;
        },
        py::arg("n"), py::arg("thetas"), py::arg("count") = 1, py::arg("seed") = 1,
        py::arg("center") = std::vector<int>{});
  m.def("sample_igm_top_t",
        [](const std::vector<double>& thetas, int count, std::uint64_t seed,
           const std::vector<int>& center) {
          Rng rng(seed);
          CentralOrder c = make_center(center);
          std::vector<std::vector<int>> out;
          out.reserve(count);
          for (int i = 0; i < count; ++i) out.push_back(sample_igm_top_t(thetas, c, rng));
          return out;
        },
        py::arg("thetas"), py::arg("count") = 1, py::arg("seed") = 1,
        py::arg("center") = std::vector<int>{});
  m.def("sample_p_shifted",
        [](std::optional<double> theta, const std::vector<double>& row_probs, int length,
           std::uint64_t seed) {
          Rng rng(seed);
          RowDistribution row = theta ? RowDistribution::geometric(*theta)
                                      : RowDistribution::from_probs(row_probs);
          return sample_p_shifted(row, length, rng);
        },
        py::arg("theta") = std::nullopt, py::arg("row_probs") = std::vector<double>{},
        py::arg("length") = 20, py::arg("seed") = 1);

  // fitting
  m.def("q_factorial", &q_factorial, py::arg("q"), py::arg("n"));
  m.def("mean_inversions_g", &mean_inversions_g, py::arg("q"), py::arg("n"));
  m.def("fit_theta_from_mean",
        [](double mean_inv, int n) {
          ThetaFit f = fit_theta_from_mean(mean_inv, n);
          return py::make_tuple(f.theta, f.diag.clamped_high || f.diag.clamped_low);
        },
        py::arg("mean_inversions"), py::arg("n"));
  m.def("fit_theta_known_center",
        [](const std::vector<std::vector<int>>& rankings,
           const std::vector<int>& center_ranked,
           const std::vector<std::int64_t>& multiplicities) {
          RankingDataset data = make_dataset(rankings, multiplicities, 0);
          ThetaFit f =
              fit_theta_known_center(data, Permutation::from_ranked_list(center_ranked));
          return py::make_tuple(f.theta, f.diag.clamped_high || f.diag.clamped_low);
        },
        py::arg("rankings"), py::arg("center"),
        py::arg("multiplicities") = std::vector<std::int64_t>{});
  m.def("fit_igm_thetas",
        [](const std::vector<std::vector<int>>& rankings, int t,
           const std::vector<int>& center_ranked,
           const std::vector<std::int64_t>& multiplicities) {
          RankingDataset data = make_dataset(rankings, multiplicities, 0);
          std::vector<double> thetas;
          for (auto& f : fit_igm_thetas(data, make_center(center_ranked), t))
            thetas.push_back(f.theta);
          return thetas;
        },
        py::arg("rankings"), py::arg("t"), py::arg("center") = std::vector<int>{},
        py::arg("multiplicities") = std::vector<std::int64_t>{});
  m.def("fit_center",
        [](const std::vector<std::vector<int>>& rankings, const std::string& model,
           int t_limit, const std::string& mode,
           const std::vector<std::int64_t>& multiplicities) {
          RankingDataset data = make_dataset(rankings, multiplicities, 0);
          CenterFitOptions opt;
          opt.mode = center_mode_from_string(mode);
          opt.t_limit = t_limit;
          return fit_center(data, model_kind_from_string(model), opt);
        },
        py::arg("rankings"), py::arg("model") = "igm", py::arg("t_limit") = 0,
        py::arg("mode") = "auto", py::arg("multiplicities") = std::vector<std::int64_t>{});
  m.def("fit_model",
        [](const std::vector<std::vector<int>>& rankings, const std::string& model, int t,
           bool pooled, const std::string& center_mode,
           const std::vector<std::int64_t>& multiplicities, int universe_size) {
          RankingDataset data = make_dataset(rankings, multiplicities, universe_size);
          ModelFitOptions opt;
          opt.pooled = pooled;
          opt.center.mode = center_mode_from_string(center_mode);
          return model_to_dict(fit_model(data, model_kind_from_string(model), t, opt));
        },
        py::arg("rankings"), py::arg("model") = "phi", py::arg("t") = 0,
        py::arg("pooled") = false, py::arg("center_mode") = "auto",
        py::arg("multiplicities") = std::vector<std::int64_t>{},
        py::arg("universe_size") = 0);

  // renewal analysis
  m.def("q_pochhammer", &q_pochhammer, py::arg("a"), py::arg("q"), py::arg("tol") = 1e-12);
  m.def("expected_component_length", &expected_component_length, py::arg("theta"),
        py::arg("tol") = 1e-12);
  m.def("effective_length", &effective_length, py::arg("theta"));
  m.def("component_length_pgf",
        [](std::optional<double> theta, const std::vector<double>& row_probs, int n_max) {
          RowDistribution row = theta ? RowDistribution::geometric(*theta)
                                      : RowDistribution::from_probs(row_probs);
          ComponentLengthPgf pgf = component_length_pgf_coeffs(row, n_max);
          py::dict d;
          d["u"] = pgf.u;
          d["prob"] = pgf.prob;
          d["mean"] = pgf.mean();
          return d;
        },
        py::arg("theta") = std::nullopt, py::arg("row_probs") = std::vector<double>{},
        py::arg("n_max") = 200);
  m.def("renewal_monte_carlo",
        [](double theta, std::int64_t components, std::uint64_t seed, std::size_t cap) {
          Rng rng(seed);
          RenewalSummary s = renewal_monte_carlo(theta, components, rng, cap);
          py::dict d;
          d["empirical_mean"] = s.empirical_mean;
          d["expected_length"] = s.expected_length;
          d["n_components"] = s.n_components;
          d["length_histogram"] = s.length_histogram;
          return d;
        },
        py::arg("theta"), py::arg("components") = 10000, py::arg("seed") = 1,
        py::arg("cap") = std::size_t{1'000'000});

  // model-size selection
  m.def("select_t",
        [](const std::vector<std::vector<int>>& rankings, double lam,
           std::optional<std::pair<int, int>> window,
           const std::vector<std::int64_t>& multiplicities) {
          RankingDataset data = make_dataset(rankings, multiplicities, 0);
          SelectTOptions opt;
          opt.lambda = lam;
          opt.window = window;
          opt.center.mode = CenterMode::heuristic;
          SelectionTrace trace = select_t(data, opt);
          py::dict d;
          d["t"] = trace.chosen_t;
          d["argmin_t"] = trace.argmin_t;
          d["cutoff"] = trace.cutoff;
          d["t_max"] = trace.t_max;
          d["theta0"] = trace.theta0;
          d["degenerate"] = trace.degenerate_fit;
          py::list cands;
          for (const auto& c : trace.candidates) {
            py::dict cd;
            cd["t"] = c.t;
            cd["theta_hat"] = c.theta_hat;
            cd["effective_length"] = c.effective_len;
            cd["error"] = c.error;
            cands.append(cd);
          }
          d["candidates"] = cands;
          return d;
        },
        py::arg("rankings"), py::arg("lam") = 0.5, py::arg("window") = std::nullopt,
        py::arg("multiplicities") = std::vector<std::int64_t>{});

  // data files
  m.def("parse_rankings",
        [](const std::string& path) {
          RankingDataset data = parse_rankings(path);
          std::vector<std::pair<std::vector<int>, std::int64_t>> out;
          for (const auto& o : data.observations)
            out.emplace_back(o.items, o.multiplicity);
          return out;
        },
        py::arg("path"));
  m.def("target_rank", &target_rank, py::arg("center"), py::arg("target"));

  m.attr("__version__") = "1.0.0";
}
