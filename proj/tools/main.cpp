// Command-line surface: sampling, fitting, model-size selection, renewal
// curves and the verification suites.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mallows/dataset.hpp"
#include "mallows/experiments.hpp"
#include "mallows/fit.hpp"
#include "mallows/model_selection.hpp"
#include "mallows/permutation.hpp"
#include "mallows/regeneration.hpp"
#include "mallows/samplers.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                               std::chars_format::general, 12);
  return std::string(buf, p);
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_item_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, '|'))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

std::string join_items(const std::vector<int>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "|" : "") << items[i];
  return out.str();
}

std::string join_doubles(const std::vector<double>& xs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? "|" : "") << fmt(xs[i]);
  return out.str();
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file '" + path + "'");
  return file;
}

mallows::RankingFormat format_from_string(const std::string& s) {
  if (s == "counted") return mallows::RankingFormat::counted;
  if (s == "lists") return mallows::RankingFormat::lists;
  return mallows::RankingFormat::autodetect;
}

int run_sample(const std::string& model, int n, int t, double theta,
               const std::string& thetas_arg, const std::string& center_arg, int count,
               std::uint64_t seed, int length, const std::string& out_path) {
  using namespace mallows;
  std::ofstream file;
  std::ostream& out = open_or_stdout(file, out_path);
  Rng rng(seed);
  if (model == "phi" || model == "gm") {
    Permutation center = center_arg.empty()
                             ? Permutation::identity(n)
                             : Permutation::from_ranked_list(parse_item_list(center_arg));
    if (center.size() != n) throw std::runtime_error("--center length must equal --n");
    std::vector<double> thetas;
    if (model == "gm") {
      thetas = thetas_arg.empty() ? std::vector<double>(n - 1, theta)
                                  : parse_double_list(thetas_arg);
      if (static_cast<int>(thetas.size()) != n - 1)
        throw std::runtime_error("--thetas must list n-1 stage dispersions");
    }
    out << "# universe: " << n << "\n";
    for (int i = 0; i < count; ++i) {
      Permutation p = model == "phi" ? sample_mallows_phi(n, theta, center, rng)
                                     : sample_gm(n, thetas, center, rng);
      out << join_items(p.ranked_list()) << "\n";
    }
    return 0;
  }
  if (model == "igm") {
    std::vector<double> thetas =
        thetas_arg.empty() ? std::vector<double>(t, theta) : parse_double_list(thetas_arg);
    CentralOrder center =
        center_arg.empty() ? CentralOrder() : CentralOrder(parse_item_list(center_arg));
    for (int i = 0; i < count; ++i)
      out << join_items(sample_igm_top_t(thetas, center, rng)) << "\n";
    return 0;
  }
  if (model == "pshifted") {
    RowDistribution row = thetas_arg.empty()
                              ? RowDistribution::geometric(theta)
                              : RowDistribution::from_probs(parse_double_list(thetas_arg));
    for (int i = 0; i < count; ++i)
      out << join_items(sample_p_shifted(row, length, rng)) << "\n";
    return 0;
  }
  throw std::runtime_error("unknown model '" + model + "'");
}

int run_fit(const std::vector<std::string>& data_paths, const std::string& format,
            const std::string& model, int t, bool auto_t, double lambda,
            const std::string& center_mode, bool pooled, int target_item,
            std::uint64_t seed, int threads, bool json, const std::string& out_path) {
  using namespace mallows;
  const ModelKind kind = model_kind_from_string(model);
  CenterMode cmode = CenterMode::automatic;
  if (center_mode == "exact") cmode = CenterMode::exact;
  if (center_mode == "heuristic") cmode = CenterMode::heuristic;

  struct Row {
    std::string source;
    int t = 0;
    bool auto_selected = false;
    FittedModel model;
    int target_rank_value = 0;
  };
  std::vector<Row> rows(data_paths.size());
  std::vector<std::string> errors(data_paths.size());
  auto work = [&](std::size_t i) {
    try {
      RankingDataset data = parse_rankings(data_paths[i], format_from_string(format));
      Row row;
      row.source = data_paths[i];
      int use_t = t;
      if (kind == ModelKind::igm_top_t && auto_t) {
        SelectTOptions sopt;
        sopt.lambda = lambda;
        sopt.center.mode = cmode == CenterMode::automatic ? CenterMode::heuristic : cmode;
        sopt.center.seed = seed;
        SelectionTrace trace = select_t(data, sopt);
        use_t = trace.chosen_t;
        row.auto_selected = true;
      }
      ModelFitOptions fopt;
      fopt.center.mode = cmode;
      fopt.center.seed = seed;
      fopt.pooled = pooled;
      row.model = fit_model(data, kind, use_t, fopt);
      row.t = row.model.model_size;
      if (target_item > 0)
        row.target_rank_value = target_rank(row.model.center_ranked, target_item);
      rows[i] = std::move(row);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(data_paths.size())));
  if (threads == 1 || data_paths.size() == 1) {
    for (std::size_t i = 0; i < data_paths.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= data_paths.size()) return;
          work(i);
        }
      });
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < data_paths.size(); ++i)
    if (!errors[i].empty()) {
      std::cerr << "error: " << data_paths[i] << ": " << errors[i] << "\n";
      return 1;
    }

  std::ofstream file;
  std::ostream& out = open_or_stdout(file, out_path);
  if (json) {
    for (const auto& row : rows) {
      out << "{\"source\":\"" << row.source << "\",\"model\":\"" << to_string(row.model.kind)
          << "\",\"t\":" << row.t << ",\"auto\":" << (row.auto_selected ? "true" : "false")
          << ",\"thetas\":[";
      for (std::size_t j = 0; j < row.model.thetas.size(); ++j)
        out << (j ? "," : "") << fmt(row.model.thetas[j]);
      out << "],\"center\":[" ;
      for (std::size_t j = 0; j < row.model.center_ranked.size(); ++j)
        out << (j ? "," : "") << row.model.center_ranked[j];
      out << "],\"log_likelihood\":" << fmt(row.model.log_likelihood)
          << ",\"clamped\":" << (row.model.any_clamped() ? "true" : "false");
      if (target_item > 0) out << ",\"target_rank\":" << row.target_rank_value;
      out << "}\n";
    }
  } else {
    out << "source,model,t,auto,thetas,center,log_likelihood,clamped";
    if (target_item > 0) out << ",target_item,target_rank";
    out << "\n";
    for (const auto& row : rows) {
      out << row.source << "," << to_string(row.model.kind) << "," << row.t << ","
          << (row.auto_selected ? 1 : 0) << "," << join_doubles(row.model.thetas) << ","
          << join_items(row.model.center_ranked) << "," << fmt(row.model.log_likelihood)
          << "," << (row.model.any_clamped() ? 1 : 0);
      if (target_item > 0) out << "," << target_item << "," << row.target_rank_value;
      out << "\n";
    }
  }
  return 0;
}

int run_select_t(const std::string& data_path, const std::string& format, double lambda,
                 const std::string& window, std::uint64_t seed,
                 const std::string& trace_path) {
  using namespace mallows;
  RankingDataset data = parse_rankings(data_path, format_from_string(format));
  SelectTOptions opt;
  opt.lambda = lambda;
  opt.center.mode = CenterMode::heuristic;
  opt.center.seed = seed;
  if (!window.empty()) {
    auto colon = window.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("--window expects lo:hi");
    opt.window = std::make_pair(std::stoi(window.substr(0, colon)),
                                std::stoi(window.substr(colon + 1)));
  }
  SelectionTrace trace = select_t(data, opt);
  if (!trace_path.empty()) {
    std::ofstream file;
    std::ostream& out = open_or_stdout(file, trace_path);
    out << "t,theta_hat,effective_length,abs_error,clamped,chosen\n";
    for (const auto& c : trace.candidates)
      out << c.t << "," << fmt(c.theta_hat) << "," << fmt(c.effective_len) << ","
          << fmt(c.error) << "," << (c.clamped ? 1 : 0) << ","
          << (c.t == trace.chosen_t ? 1 : 0) << "\n";
  }
  std::cout << trace.chosen_t << std::endl;
  return 0;
}

int run_regen(const std::string& grid, double theta, std::int64_t components,
              std::uint64_t seed, const std::string& out_path) {
  using namespace mallows;
  std::ofstream file;
  std::ostream& out = open_or_stdout(file, out_path);
  out << "theta,expected_length,empirical_mean,n_components\n";
  if (!grid.empty()) {
    std::stringstream ss(grid);
    std::string a, b, c;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, c);
    const double lo = std::stod(a), hi = std::stod(b), step = c.empty() ? 0.1 : std::stod(c);
    for (double th = lo; th <= hi + 1e-12; th += step) {
      if (th <= 0) continue;  // the curve explodes at zero
      out << fmt(th) << "," << fmt(expected_component_length(th)) << ",,\n";
    }
    return 0;
  }
  Rng rng(seed);
  RenewalSummary summary = renewal_monte_carlo(theta, components, rng);
  out << fmt(theta) << "," << fmt(summary.expected_length) << ","
      << fmt(summary.empirical_mean) << "," << summary.n_components << "\n";
  return 0;
}

int run_verify(const std::vector<std::string>& suites, std::uint64_t seed,
               const std::string& apa_path, const std::string& report_path, bool fast) {
  using namespace mallows;
  std::vector<ExperimentReport> reports;
  auto want = [&](const std::string& name) {
    if (suites.empty()) return true;
    for (const auto& s : suites)
      if (s == name || s == "all") return true;
    return false;
  };
  if (want("bijection")) reports.push_back(verify_bijection_suite());
  if (want("sampler")) {
    SamplerExactnessOptions opt;
    opt.seed = seed;
    if (fast) opt.draws = 100'000;
    reports.push_back(verify_sampler_exactness(opt));
  }
  if (want("g-oracle")) reports.push_back(verify_g_oracle());
  if (want("mle-inverse")) reports.push_back(verify_mle_inverse_identity());
  if (want("bias")) {
    BiasOptions opt;
    opt.seed = seed;
    if (fast) opt.replicates = 2000, opt.min_z = 3.0;
    reports.push_back(verify_bias_direction(opt));
  }
  if (want("center-rate")) {
    CenterRateOptions opt;
    opt.seed = seed;
    if (fast) opt.replicates = 2000;
    reports.push_back(verify_center_error_rate(opt));
  }
  if (want("regen")) {
    RenewalTwoRouteOptions opt;
    opt.seed = seed;
    if (fast) opt.mc_components = 20'000;
    reports.push_back(verify_renewal_two_route(opt));
  }
  if (want("table1")) {
    Table1Options opt;
    opt.seed = seed;
    if (fast) opt.replicates = 10;
    reports.push_back(verify_table1_selection(opt));
  }
  if (want("table2")) {
    Table2Options opt;
    opt.seed = seed;
    if (fast) opt.replicates = 10;
    reports.push_back(verify_table2_accuracy(opt));
  }
  if (want("homepage")) {
    HomepageSyntheticOptions opt;
    opt.seed = seed;
    if (fast) opt.queries = 40;
    reports.push_back(verify_homepage_synthetic(opt));
  }
  if (want("apa")) {
    if (!apa_path.empty()) {
      reports.push_back(verify_apa_fit({.data_path = apa_path}));
    } else if (!suites.empty()) {
      std::cerr << "apa suite requires --apa PATH\n";
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& r : reports) {
    print_report(std::cout, r);
    all_pass = all_pass && r.passed();
  }
  if (!report_path.empty()) {
    std::ofstream file(report_path);
    write_reports_csv(file, reports);
  }
  std::cout << (all_pass ? "OK" : "FAILED") << std::endl;
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mallows ranking models: samplers, MLE fitting, renewal analysis and "
               "automatic model-size selection"};
  app.set_config("--config");
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "default RNG seed")->envname("MALLOWS_SEED");

  // sample
  auto* sample = app.add_subcommand("sample", "draw rankings from a model");
  std::string s_model = "phi", s_thetas, s_center, s_out;
  int s_n = 5, s_t = 3, s_count = 10, s_len = 20;
  double s_theta = 1.0;
  sample->add_option("--model", s_model, "phi|gm|igm|pshifted")->capture_default_str();
  sample->add_option("--n", s_n, "number of items (phi/gm)");
  sample->add_option("--t", s_t, "model size (igm)");
  sample->add_option("--theta", s_theta, "single dispersion");
  sample->add_option("--thetas", s_thetas,
                     "comma-separated stage dispersions (gm/igm) or row probabilities "
                     "(pshifted)");
  sample->add_option("--center", s_center, "central ranked list, e.g. 3|1|2");
  sample->add_option("--count", s_count, "number of rankings to draw");
  sample->add_option("--length", s_len, "prefix length (pshifted)");
  sample->add_option("--out", s_out, "output path (default stdout)");

  // fit
  auto* fit = app.add_subcommand("fit", "fit a model to ranking data");
  std::vector<std::string> f_data;
  std::string f_format = "auto", f_model = "phi", f_center_mode = "auto", f_out;
  int f_t = 0, f_target = 0, f_threads = 0;
  double f_lambda = 0.5;
  bool f_auto = false, f_pooled = false, f_json = false;
  fit->add_option("--data", f_data, "input ranking file(s)")->required();
  fit->add_option("--format", f_format, "counted|lists|auto")->capture_default_str();
  fit->add_option("--model", f_model, "phi|gm|igm")->capture_default_str();
  fit->add_option("--t", f_t, "model size (igm)");
  fit->add_flag("--auto", f_auto, "select the model size automatically (igm)");
  fit->add_option("--lambda", f_lambda, "cutoff fraction for automatic selection")
      ->capture_default_str();
  fit->add_option("--center-mode", f_center_mode, "auto|exact|heuristic")
      ->capture_default_str();
  fit->add_flag("--pooled", f_pooled, "single pooled dispersion (igm)");
  fit->add_option("--target-item", f_target,
                  "report the rank of this item under the fitted center");
  fit->add_option("--threads", f_threads, "worker threads for batch fitting");
  fit->add_flag("--json", f_json, "emit JSON lines instead of CSV");
  fit->add_option("--out", f_out, "output path (default stdout)");

  // select-t
  auto* sel = app.add_subcommand("select-t", "choose the model size automatically");
  std::string t_data, t_format = "auto", t_window, t_trace;
  double t_lambda = 0.5;
  sel->add_option("--data", t_data, "input ranking file")->required();
  sel->add_option("--format", t_format, "counted|lists|auto")->capture_default_str();
  sel->add_option("--lambda", t_lambda, "cutoff fraction")->capture_default_str();
  sel->add_option("--window", t_window, "explicit search range lo:hi");
  sel->add_option("--trace", t_trace, "write the per-candidate trace CSV here");

  // regen
  auto* regen = app.add_subcommand("regen", "renewal curves and simulations");
  std::string r_grid, r_out;
  double r_theta = 1.0;
  std::int64_t r_components = 100'000;
  regen->add_option("--theta-grid", r_grid, "curve grid lo:hi:step");
  regen->add_option("--theta", r_theta, "dispersion for simulation");
  regen->add_option("--components", r_components, "components to simulate");
  regen->add_option("--out", r_out, "output path (default stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "run verification suites");
  std::vector<std::string> v_suites;
  std::string v_apa, v_report;
  bool v_fast = false;
  verify->add_option("suites", v_suites,
                     "bijection sampler g-oracle mle-inverse bias center-rate regen "
                     "table1 table2 homepage apa (default: all but apa/table2)");
  verify->add_option("--apa", v_apa, "election-data file for the apa suite");
  verify->add_option("--report", v_report, "write combined report CSV here");
  verify->add_flag("--fast", v_fast, "reduced replicate counts for a quick pass");

  auto* version = app.add_subcommand("version", "print version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*version) {
      std::cout << "mallows " << kVersion << std::endl;
      return 0;
    }
    if (*sample)
      return run_sample(s_model, s_n, s_t, s_theta, s_thetas, s_center, s_count, seed,
                        s_len, s_out);
    if (*fit)
      return run_fit(f_data, f_format, f_model, f_t, f_auto || f_t == 0, f_lambda,
                     f_center_mode, f_pooled, f_target, seed, f_threads, f_json, f_out);
    if (*sel) return run_select_t(t_data, t_format, t_lambda, t_window, seed, t_trace);
    if (*regen) return run_regen(r_grid, r_theta, r_components, seed, r_out);
    if (*verify) {
      std::vector<std::string> suites = v_suites;
      if (suites.empty())
        suites = {"bijection", "sampler", "g-oracle", "mle-inverse", "bias",
                  "center-rate", "regen", "table1", "homepage"};
      if (!v_apa.empty() &&
          std::find(suites.begin(), suites.end(), "apa") == suites.end())
        suites.push_back("apa");
      return run_verify(suites, seed, v_apa, v_report, v_fast);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
