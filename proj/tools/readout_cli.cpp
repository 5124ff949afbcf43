#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "readout/analytic.hpp"
#include "readout/config.hpp"
#include "readout/error_rate.hpp"
#include "readout/fit.hpp"
#include "readout/io.hpp"
#include "readout/ml_filter.hpp"
#include "readout/rng.hpp"
#include "readout/signal.hpp"
#include "readout/util.hpp"

namespace {

using nlohmann::json;
using namespace readout;

TurnOnRate parse_rate(const std::string& text) {
  if (text == "inf" || text == "INF" || text == "infinite") return TurnOnRate::infinite();
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return TurnOnRate::finite(value);
  } catch (const std::exception&) {
    throw std::invalid_argument("gamma must be a positive number or 'inf', got '" + text + "'");
  }
}

json rate_json(const std::string& text) {
  const TurnOnRate rate = parse_rate(text);
  if (rate.is_infinite()) return "inf";
  return rate.value();
}

std::string rate_text(const json& value) {
  return value.is_string() ? value.get<std::string>() : format_double(value.get<double>());
}

QubitState parse_state(const std::string& text) {
  if (text == "plus") return QubitState::kPlus;
  if (text == "minus") return QubitState::kMinus;
  throw std::invalid_argument("state must be 'plus' or 'minus', got '" + text + "'");
}

FilterKind parse_filter(const std::string& text) {
  if (text == "peak") return FilterKind::kPeak;
  if (text == "boxcar") return FilterKind::kBoxcar;
  throw std::invalid_argument("filter must be 'peak' or 'boxcar', got '" + text + "'");
}

double json_or_nan(const json& cfg, const char* key) {
  const auto it = cfg.find(key);
  if (it == cfg.end() || it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

json nan_to_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

ReadoutConfig config_from(const json& cfg, double default_bins = 1.0) {
  ReadoutConfig out;
  out.snr = cfg.at("r").get<double>();
  out.rate = parse_rate(rate_text(cfg.at("gamma")));
  out.tau_m = cfg.at("tau_m").get<double>();
  out.n_bins = cfg.value("n_bins", default_bins);
  out.validate();
  return out;
}

// Subcommand runners take a fully resolved configuration and return the list
// of files written, so a saved manifest can replay the exact invocation.

std::vector<std::string> run_simulate(const json& cfg) {
  const ReadoutConfig c = config_from(cfg);
  const QubitState state = parse_state(cfg.at("state").get<std::string>());
  const std::string kind = cfg.at("kind").get<std::string>();
  const std::string out = cfg.at("out").get<std::string>();
  Rng rng(cfg.at("seed").get<std::uint64_t>(), cfg.value("stream", 0ull));

  std::vector<std::vector<double>> rows;
  if (kind == "binned") {
    const BinnedTrace trace = generate_binned_trace(c, state, rng);
    for (std::size_t l = 0; l < trace.values.size(); ++l) {
      rows.push_back({static_cast<double>(l), trace.values[l]});
    }
    write_csv(out, {"l", "psi_bar"}, rows);
  } else if (kind == "continuous") {
    double dt = cfg.value("dt", 0.0);
    if (dt <= 0.0) dt = default_trace_dt(c);
    const ContinuousTrace trace = generate_continuous_trace(c, dt, state, rng);
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
      rows.push_back({static_cast<double>(k) * dt, trace.samples[k]});
    }
    write_csv(out, {"t", "psi"}, rows);
  } else {
    throw std::invalid_argument("kind must be 'binned' or 'continuous', got '" + kind + "'");
  }
  return {out};
}

std::vector<std::string> run_distributions(const json& cfg) {
  const ReadoutConfig c = config_from(cfg);
  const FilterKind filter = parse_filter(cfg.at("filter").get<std::string>());
  const std::string out = cfg.at("out").get<std::string>();
  const StateDists dists = filter_dists(filter, c);

  double lo = json_or_nan(cfg, "psi_min");
  double hi = json_or_nan(cfg, "psi_max");
  if (std::isnan(lo)) lo = std::min(dists.minus.support_lo, dists.plus.support_lo);
  if (std::isnan(hi)) hi = std::max(dists.minus.support_hi, dists.plus.support_hi);
  const auto points = cfg.value("points", 513);
  if (points < 2 || !(hi > lo)) throw std::invalid_argument("need psi_max > psi_min and >= 2 points");

  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double psi = lo + (hi - lo) * static_cast<double>(k) / (points - 1);
    rows.push_back({psi, dists.minus.pdf(psi), dists.plus.pdf(psi), dists.minus.cdf(psi),
                    dists.plus.cdf(psi)});
  }
  write_csv(out, {"psi", "pdf_minus", "pdf_plus", "cdf_minus", "cdf_plus"}, rows);
  return {out};
}

OptimizeRanges ranges_from(const json& cfg) {
  OptimizeRanges ranges;
  ranges.tau_m_lo = cfg.value("tau_m_min", ranges.tau_m_lo);
  ranges.tau_m_hi = cfg.value("tau_m_max", ranges.tau_m_hi);
  ranges.n_bins_lo = cfg.value("n_min", ranges.n_bins_lo);
  ranges.n_bins_hi = cfg.value("n_max", ranges.n_bins_hi);
  return ranges;
}

std::vector<std::string> run_optimize(const json& cfg) {
  const std::string filter_name = cfg.at("filter").get<std::string>();
  const FilterKind filter = parse_filter(filter_name);
  const std::string gamma = rate_text(cfg.at("gamma"));
  const double r = cfg.at("r").get<double>();
  const OptimizationResult opt = optimize_filter(filter, parse_rate(gamma), r, ranges_from(cfg));

  json summary;
  summary["filter"] = filter_name;
  summary["gamma"] = rate_json(gamma);
  summary["r"] = r;
  summary["eps"] = opt.eps;
  summary["nu"] = opt.nu;
  summary["tau_m"] = opt.tau_m;
  summary["n_bins"] = opt.n_bins;
  summary["eps_round"] = opt.eps_round;
  summary["nu_round"] = opt.nu_round;
  summary["n_bins_round"] = opt.n_bins_round;
  summary["probes"] = opt.trace.size();
  std::cout << summary.dump(2) << std::endl;

  const std::string out = cfg.value("out", std::string());
  if (out.empty()) return {};
  std::ofstream json_file(out + ".json", std::ios::binary);
  if (!json_file) throw std::invalid_argument("cannot open output file: " + out + ".json");
  json_file << summary.dump(2) << '\n';
  write_csv(out + ".csv", {"r", "filter", "gamma", "eps", "nu", "tau_m", "n_bins"},
            {{format_double(r), filter_name, gamma, format_double(opt.eps), format_double(opt.nu),
              format_double(opt.tau_m), format_double(opt.n_bins)}});
  return {out + ".json", out + ".csv"};
}

std::vector<std::string> run_scaling(const json& cfg) {
  const std::string filter_name = cfg.at("filter").get<std::string>();
  const std::string gamma = rate_text(cfg.at("gamma"));
  const auto grid = cfg.at("r_list").get<std::vector<double>>();
  const std::string out = cfg.at("out").get<std::string>();
  const std::vector<ScalingRow> rows =
      scaling_study(parse_filter(filter_name), parse_rate(gamma), grid,
                    cfg.value("threads", 0), ranges_from(cfg));

  std::vector<std::vector<std::string>> cells;
  json summary = json::array();
  for (const ScalingRow& row : rows) {
    cells.push_back({format_double(row.snr), filter_name, gamma, format_double(row.eps),
                     format_double(row.nu), format_double(row.tau_m), format_double(row.n_bins),
                     format_double(row.eps_sqrt_scaled), format_double(row.eps_linear_scaled)});
    summary.push_back({{"r", row.snr},
                       {"eps", row.eps},
                       {"tau_m", row.tau_m},
                       {"n_bins", row.n_bins},
                       {"eps_sqrt_scaled", row.eps_sqrt_scaled},
                       {"eps_linear_scaled", row.eps_linear_scaled}});
  }
  std::cout << summary.dump(2) << std::endl;
  write_csv(out,
            {"r", "filter", "gamma", "eps", "nu", "tau_m", "n_bins", "eps_sqrt_scaled",
             "eps_linear_scaled"},
            cells);
  return {out};
}

std::vector<std::string> run_ml_benchmark(const json& cfg) {
  ReadoutConfig c;
  c.snr = cfg.at("r").get<double>();
  c.rate = parse_rate(rate_text(cfg.at("gamma")));
  c.tau_m = cfg.at("tau_m").get<double>();
  c.validate();
  const auto records = cfg.at("records").get<std::int64_t>();
  const double dt = cfg.value("dt", 0.0);
  const std::string out = cfg.at("out").get<std::string>();
  const MlErrorResult result = ml_error_rate(c, records, cfg.at("seed").get<std::uint64_t>(),
                                             cfg.value("threads", 0), dt);

  json summary;
  summary["r"] = c.snr;
  summary["gamma"] = rate_json(rate_text(cfg.at("gamma")));
  summary["eps"] = result.eps;
  summary["stderr"] = result.std_err;
  summary["records"] = result.records;
  summary["wrong"] = result.wrong;
  summary["tau_m"] = c.tau_m;
  summary["dt"] = dt > 0.0 ? dt : default_ml_dt(c);
  std::cout << summary.dump(2) << std::endl;

  write_csv(out, {"r", "gamma", "eps", "stderr", "records"},
            {{format_double(c.snr), rate_text(cfg.at("gamma")), format_double(result.eps),
              format_double(result.std_err), std::to_string(result.records)}});
  return {out};
}

std::vector<std::string> run_estimator_trace(const json& cfg) {
  ReadoutConfig c;
  c.snr = cfg.at("r").get<double>();
  c.rate = parse_rate(rate_text(cfg.at("gamma")));
  c.tau_m = cfg.at("tau_m").get<double>();
  c.validate();
  const QubitState state = parse_state(cfg.at("state").get<std::string>());
  const std::string out = cfg.at("out").get<std::string>();
  double dt = cfg.value("dt", 0.0);
  if (dt <= 0.0) dt = default_ml_dt(c);

  Rng rng(cfg.at("seed").get<std::uint64_t>(), cfg.value("stream", 0ull));
  const ContinuousTrace trace = generate_continuous_trace(c, dt, state, rng);
  const std::vector<EstimatorState> states = integrate_estimator(trace, c);

  std::vector<std::vector<double>> rows;
  rows.reserve(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    rows.push_back({static_cast<double>(k) * dt, states[k].posterior()});
  }
  write_csv(out, {"tau_m", "p_plus"}, rows);
  return {out};
}

std::vector<std::string> run_fit(const json& cfg) {
  const std::string data = cfg.at("data").get<std::string>();
  const std::string format_name = cfg.value("format", std::string("samples"));
  HistogramFormat format;
  if (format_name == "edges") {
    format = HistogramFormat::kEdges;
  } else if (format_name == "samples") {
    format = HistogramFormat::kSamples;
  } else {
    throw std::invalid_argument("format must be 'edges' or 'samples', got '" + format_name + "'");
  }
  const Histogram hist = ingest_histogram(data, format);

  const TurnOnRate rate = parse_rate(rate_text(cfg.at("gamma")));
  const double tau_m = cfg.at("tau_m").get<double>();
  FitParams init;
  init.scale = cfg.value("init_scale", 0.0);
  if (init.scale <= 0.0) init.scale = hist.edges.back() / 1.1;
  init.snr = cfg.value("init_snr", 100.0);
  init.tau_b = cfg.value("init_tau_b", tau_m / 20.0);
  init.p_plus = cfg.value("init_p_plus", 0.5);
  const FitResult result = fit_histogram(hist, rate, tau_m, init, cfg.value("threads", 0));

  json summary;
  summary["I"] = result.params.scale;
  summary["r"] = result.params.snr;
  summary["tau_b"] = result.params.tau_b;
  summary["p_plus"] = result.params.p_plus;
  summary["chi2"] = result.chi2;
  summary["dof"] = result.dof;
  summary["log_like"] = result.log_like;
  summary["converged"] = result.converged;
  summary["covariance"] = result.covariance;
  std::cout << summary.dump(2) << std::endl;

  const std::string out = cfg.at("out").get<std::string>();
  std::ofstream json_file(out, std::ios::binary);
  if (!json_file) throw std::invalid_argument("cannot open output file: " + out);
  json_file << summary.dump(2) << '\n';
  return {out};
}

const std::map<std::string, std::function<std::vector<std::string>(const json&)>> kRunners = {
    {"simulate", run_simulate},       {"distributions", run_distributions},
    {"optimize", run_optimize},       {"scaling", run_scaling},
    {"ml-benchmark", run_ml_benchmark}, {"estimator-trace", run_estimator_trace},
    {"fit", run_fit}};

void execute(const std::string& name, const json& cfg) {
  const auto runner = kRunners.find(name);
  if (runner == kRunners.end()) throw std::invalid_argument("unknown subcommand: " + name);
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> outputs = runner->second(cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!outputs.empty()) {
    RunManifest manifest;
    manifest.subcommand = name;
    manifest.config_json = cfg.dump();
    manifest.seed = cfg.value("seed", 0ull);
    manifest.duration_seconds = seconds;
    manifest.outputs = outputs;
    const std::string path = outputs.front() + ".manifest.json";
    save_manifest(path, manifest);
    std::cerr << "manifest: " << path << '\n';
  }
}

// Returns the flag value when given on the command line, else the config-file
// value, else the built-in default already stored in `value`.
template <typename T>
void merge(const json& file_cfg, const CLI::Option* opt, const char* key, T& value) {
  if (opt->count() > 0) return;
  const auto it = file_cfg.find(key);
  if (it != file_cfg.end() && !it->is_null()) value = it->get<T>();
}

void merge_gamma(const json& file_cfg, const CLI::Option* opt, std::string& value) {
  if (opt->count() > 0) return;
  const auto it = file_cfg.find("gamma");
  if (it != file_cfg.end()) value = rate_text(*it);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-shot qubit readout post-processing toolkit"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with default parameter values");
  std::string manifest_path;
  app.add_option("--manifest", manifest_path, "Replay a recorded run from its manifest");

  // Shared parameter structs; every subcommand resolves into a flat JSON
  // object so manifests can replay it.
  struct Common {
    std::string gamma = "4";
    double r = 100.0;
    double tau_m = 2.0;
    double n_bins = 1.0;
    std::uint64_t seed = 1234;
    std::uint64_t stream = 0;
    std::string out;
  };

  Common sim;
  std::string sim_state = "plus";
  std::string sim_kind = "binned";
  double sim_dt = 0.0;
  sim.out = "trace.csv";
  CLI::App* simulate = app.add_subcommand("simulate", "Generate one Monte-Carlo record");
  auto* sim_gamma = simulate->add_option("--gamma", sim.gamma, "Turn-on rate or 'inf'");
  auto* sim_r = simulate->add_option("--snr", sim.r, "Signal-to-noise ratio r");
  auto* sim_tm = simulate->add_option("--tau-m", sim.tau_m, "Measurement time");
  auto* sim_n = simulate->add_option("--n-bins", sim.n_bins, "Bin count (integral)");
  auto* sim_state_opt = simulate->add_option("--state", sim_state, "plus|minus");
  auto* sim_kind_opt = simulate->add_option("--kind", sim_kind, "binned|continuous");
  auto* sim_dt_opt = simulate->add_option("--dt", sim_dt, "Sample step (continuous; 0 = auto)");
  auto* sim_seed = simulate->add_option("--seed", sim.seed, "RNG seed");
  auto* sim_stream = simulate->add_option("--stream", sim.stream, "RNG stream (shot index)");
  auto* sim_out = simulate->add_option("--out", sim.out, "Output CSV path");

  Common dist;
  std::string dist_filter = "peak";
  double dist_lo = std::numeric_limits<double>::quiet_NaN();
  double dist_hi = std::numeric_limits<double>::quiet_NaN();
  int dist_points = 513;
  dist.out = "distributions.csv";
  CLI::App* distributions =
      app.add_subcommand("distributions", "Tabulate filter output densities");
  auto* dist_filter_opt = distributions->add_option("--filter", dist_filter, "peak|boxcar");
  auto* dist_gamma = distributions->add_option("--gamma", dist.gamma, "Turn-on rate or 'inf'");
  auto* dist_r = distributions->add_option("--snr", dist.r, "Signal-to-noise ratio r");
  auto* dist_tm = distributions->add_option("--tau-m", dist.tau_m, "Measurement time");
  auto* dist_n = distributions->add_option("--n-bins", dist.n_bins, "Bin count");
  auto* dist_lo_opt = distributions->add_option("--psi-min", dist_lo, "Grid start (default: support)");
  auto* dist_hi_opt = distributions->add_option("--psi-max", dist_hi, "Grid end (default: support)");
  auto* dist_points_opt = distributions->add_option("--points", dist_points, "Grid size");
  auto* dist_out = distributions->add_option("--out", dist.out, "Output CSV path");

  Common opt_params;
  std::string opt_filter = "peak";
  opt_params.r = 250.0;
  OptimizeRanges opt_ranges;
  CLI::App* optimize = app.add_subcommand("optimize", "Minimize the error rate over (tau_m, N)");
  auto* opt_filter_opt = optimize->add_option("--filter", opt_filter, "peak|boxcar");
  auto* opt_gamma = optimize->add_option("--gamma", opt_params.gamma, "Turn-on rate or 'inf'");
  auto* opt_r = optimize->add_option("--snr", opt_params.r, "Signal-to-noise ratio r");
  auto* opt_tlo = optimize->add_option("--tau-m-min", opt_ranges.tau_m_lo, "Search range");
  auto* opt_thi = optimize->add_option("--tau-m-max", opt_ranges.tau_m_hi, "Search range");
  auto* opt_nlo = optimize->add_option("--n-min", opt_ranges.n_bins_lo, "Search range");
  auto* opt_nhi = optimize->add_option("--n-max", opt_ranges.n_bins_hi, "Search range");
  auto* opt_out = optimize->add_option("--out", opt_params.out,
                                       "Output base path (writes .json and .csv)");

  Common scal;
  std::string scal_filter = "boxcar";
  std::vector<double> scal_grid{100.0, 316.22776601683796, 1000.0, 3162.2776601683795, 10000.0};
  int scal_threads = 0;
  OptimizeRanges scal_ranges;
  scal.out = "scaling.csv";
  CLI::App* scaling = app.add_subcommand("scaling", "Optimized error rate across an snr grid");
  auto* scal_filter_opt = scaling->add_option("--filter", scal_filter, "peak|boxcar");
  auto* scal_gamma = scaling->add_option("--gamma", scal.gamma, "Turn-on rate or 'inf'");
  auto* scal_grid_opt =
      scaling->add_option("--snr-list", scal_grid, "Comma-separated r grid")->delimiter(',');
  auto* scal_threads_opt = scaling->add_option("--threads", scal_threads, "Worker cap");
  auto* scal_tlo = scaling->add_option("--tau-m-min", scal_ranges.tau_m_lo, "Search range");
  auto* scal_thi = scaling->add_option("--tau-m-max", scal_ranges.tau_m_hi, "Search range");
  auto* scal_nlo = scaling->add_option("--n-min", scal_ranges.n_bins_lo, "Search range");
  auto* scal_nhi = scaling->add_option("--n-max", scal_ranges.n_bins_hi, "Search range");
  auto* scal_out = scaling->add_option("--out", scal.out, "Output CSV path");

  Common ml;
  ml.r = 250.0;
  ml.tau_m = 10.0;
  ml.out = "ml_benchmark.csv";
  std::int64_t ml_records = 50000;
  double ml_dt = 0.0;
  int ml_threads = 0;
  CLI::App* ml_benchmark =
      app.add_subcommand("ml-benchmark", "Monte-Carlo error rate of the posterior filter");
  auto* ml_gamma = ml_benchmark->add_option("--gamma", ml.gamma, "Turn-on rate or 'inf'");
  auto* ml_r = ml_benchmark->add_option("--snr", ml.r, "Signal-to-noise ratio r");
  auto* ml_records_opt = ml_benchmark->add_option("--records", ml_records, "Record count");
  auto* ml_tm = ml_benchmark->add_option("--tau-m", ml.tau_m, "Measurement time");
  auto* ml_dt_opt = ml_benchmark->add_option("--dt", ml_dt, "Sample step (0 = auto)");
  auto* ml_seed = ml_benchmark->add_option("--seed", ml.seed, "RNG seed");
  auto* ml_threads_opt = ml_benchmark->add_option("--threads", ml_threads, "Worker cap");
  auto* ml_out = ml_benchmark->add_option("--out", ml.out, "Output CSV path");

  Common est;
  est.r = 30.0;
  est.tau_m = 10.0;
  est.out = "estimator_trace.csv";
  std::string est_state = "plus";
  double est_dt = 0.0;
  CLI::App* estimator_trace =
      app.add_subcommand("estimator-trace", "Posterior trajectory on one record");
  auto* est_gamma = estimator_trace->add_option("--gamma", est.gamma, "Turn-on rate or 'inf'");
  auto* est_r = estimator_trace->add_option("--snr", est.r, "Signal-to-noise ratio r");
  auto* est_state_opt = estimator_trace->add_option("--state", est_state, "plus|minus");
  auto* est_tm = estimator_trace->add_option("--tau-m", est.tau_m, "Measurement time");
  auto* est_dt_opt = estimator_trace->add_option("--dt", est_dt, "Sample step (0 = auto)");
  auto* est_seed = estimator_trace->add_option("--seed", est.seed, "RNG seed");
  auto* est_stream = estimator_trace->add_option("--stream", est.stream, "RNG stream");
  auto* est_out = estimator_trace->add_option("--out", est.out, "Output CSV path");

  Common fitp;
  fitp.tau_m = 2.5;
  fitp.out = "fit.json";
  std::string fit_data;
  std::string fit_format = "samples";
  double fit_init_scale = 0.0;
  double fit_init_snr = 100.0;
  double fit_init_tau_b = 0.0;
  double fit_init_p = 0.5;
  int fit_threads = 0;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the peak-signal mixture to a histogram");
  auto* fit_data_opt = fit_cmd->add_option("--data", fit_data, "Input CSV path");
  auto* fit_format_opt = fit_cmd->add_option("--format", fit_format, "edges|samples");
  auto* fit_gamma = fit_cmd->add_option("--gamma", fitp.gamma, "Turn-on rate or 'inf'");
  auto* fit_tm = fit_cmd->add_option("--tau-m", fitp.tau_m, "Measurement time (fixed)");
  auto* fit_is = fit_cmd->add_option("--init-scale", fit_init_scale, "Initial raw scale I");
  auto* fit_ir = fit_cmd->add_option("--init-snr", fit_init_snr, "Initial r");
  auto* fit_ib = fit_cmd->add_option("--init-tau-b", fit_init_tau_b, "Initial tau_b");
  auto* fit_ip = fit_cmd->add_option("--init-p-plus", fit_init_p, "Initial P(+)");
  auto* fit_threads_opt = fit_cmd->add_option("--threads", fit_threads, "Worker cap");
  auto* fit_out = fit_cmd->add_option("--out", fitp.out, "Output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    json file_cfg = json::object();
    if (!config_path.empty()) {
      try {
        file_cfg = json::parse(read_text_file(config_path));
      } catch (const json::exception& e) {
        throw std::invalid_argument("unreadable config " + config_path + ": " + e.what());
      }
      if (!file_cfg.is_object()) {
        throw std::invalid_argument("config must be a JSON object: " + config_path);
      }
    }

    if (!manifest_path.empty()) {
      const RunManifest manifest = load_manifest(manifest_path);
      execute(manifest.subcommand, json::parse(manifest.config_json));
      return 0;
    }

    json cfg = json::object();
    if (app.got_subcommand(simulate)) {
      merge_gamma(file_cfg, sim_gamma, sim.gamma);
      merge(file_cfg, sim_r, "r", sim.r);
      merge(file_cfg, sim_tm, "tau_m", sim.tau_m);
      merge(file_cfg, sim_n, "n_bins", sim.n_bins);
      merge(file_cfg, sim_state_opt, "state", sim_state);
      merge(file_cfg, sim_kind_opt, "kind", sim_kind);
      merge(file_cfg, sim_dt_opt, "dt", sim_dt);
      merge(file_cfg, sim_seed, "seed", sim.seed);
      merge(file_cfg, sim_stream, "stream", sim.stream);
      merge(file_cfg, sim_out, "out", sim.out);
      cfg = {{"gamma", rate_json(sim.gamma)}, {"r", sim.r},     {"tau_m", sim.tau_m},
             {"n_bins", sim.n_bins},          {"state", sim_state}, {"kind", sim_kind},
             {"dt", sim_dt},                  {"seed", sim.seed},   {"stream", sim.stream},
             {"out", sim.out}};
      execute("simulate", cfg);
    } else if (app.got_subcommand(distributions)) {
      merge(file_cfg, dist_filter_opt, "filter", dist_filter);
      merge_gamma(file_cfg, dist_gamma, dist.gamma);
      merge(file_cfg, dist_r, "r", dist.r);
      merge(file_cfg, dist_tm, "tau_m", dist.tau_m);
      merge(file_cfg, dist_n, "n_bins", dist.n_bins);
      merge(file_cfg, dist_lo_opt, "psi_min", dist_lo);
      merge(file_cfg, dist_hi_opt, "psi_max", dist_hi);
      merge(file_cfg, dist_points_opt, "points", dist_points);
      merge(file_cfg, dist_out, "out", dist.out);
      cfg = {{"filter", dist_filter},        {"gamma", rate_json(dist.gamma)},
             {"r", dist.r},                  {"tau_m", dist.tau_m},
             {"n_bins", dist.n_bins},        {"psi_min", nan_to_null(dist_lo)},
             {"psi_max", nan_to_null(dist_hi)}, {"points", dist_points},
             {"out", dist.out}};
      execute("distributions", cfg);
    } else if (app.got_subcommand(optimize)) {
      merge(file_cfg, opt_filter_opt, "filter", opt_filter);
      merge_gamma(file_cfg, opt_gamma, opt_params.gamma);
      merge(file_cfg, opt_r, "r", opt_params.r);
      merge(file_cfg, opt_tlo, "tau_m_min", opt_ranges.tau_m_lo);
      merge(file_cfg, opt_thi, "tau_m_max", opt_ranges.tau_m_hi);
      merge(file_cfg, opt_nlo, "n_min", opt_ranges.n_bins_lo);
      merge(file_cfg, opt_nhi, "n_max", opt_ranges.n_bins_hi);
      merge(file_cfg, opt_out, "out", opt_params.out);
      cfg = {{"filter", opt_filter},
             {"gamma", rate_json(opt_params.gamma)},
             {"r", opt_params.r},
             {"tau_m_min", opt_ranges.tau_m_lo},
             {"tau_m_max", opt_ranges.tau_m_hi},
             {"n_min", opt_ranges.n_bins_lo},
             {"n_max", opt_ranges.n_bins_hi},
             {"out", opt_params.out}};
      execute("optimize", cfg);
    } else if (app.got_subcommand(scaling)) {
      merge(file_cfg, scal_filter_opt, "filter", scal_filter);
      merge_gamma(file_cfg, scal_gamma, scal.gamma);
      merge(file_cfg, scal_grid_opt, "r_list", scal_grid);
      merge(file_cfg, scal_threads_opt, "threads", scal_threads);
      merge(file_cfg, scal_tlo, "tau_m_min", scal_ranges.tau_m_lo);
      merge(file_cfg, scal_thi, "tau_m_max", scal_ranges.tau_m_hi);
      merge(file_cfg, scal_nlo, "n_min", scal_ranges.n_bins_lo);
      merge(file_cfg, scal_nhi, "n_max", scal_ranges.n_bins_hi);
      merge(file_cfg, scal_out, "out", scal.out);
      cfg = {{"filter", scal_filter},
             {"gamma", rate_json(scal.gamma)},
             {"r_list", scal_grid},
             {"threads", scal_threads},
             {"tau_m_min", scal_ranges.tau_m_lo},
             {"tau_m_max", scal_ranges.tau_m_hi},
             {"n_min", scal_ranges.n_bins_lo},
             {"n_max", scal_ranges.n_bins_hi},
             {"out", scal.out}};
      execute("scaling", cfg);
    } else if (app.got_subcommand(ml_benchmark)) {
      merge_gamma(file_cfg, ml_gamma, ml.gamma);
      merge(file_cfg, ml_r, "r", ml.r);
      merge(file_cfg, ml_records_opt, "records", ml_records);
      merge(file_cfg, ml_tm, "tau_m", ml.tau_m);
      merge(file_cfg, ml_dt_opt, "dt", ml_dt);
      merge(file_cfg, ml_seed, "seed", ml.seed);
      merge(file_cfg, ml_threads_opt, "threads", ml_threads);
      merge(file_cfg, ml_out, "out", ml.out);
      cfg = {{"gamma", rate_json(ml.gamma)}, {"r", ml.r},          {"records", ml_records},
             {"tau_m", ml.tau_m},            {"dt", ml_dt},        {"seed", ml.seed},
             {"threads", ml_threads},        {"out", ml.out}};
      execute("ml-benchmark", cfg);
    } else if (app.got_subcommand(estimator_trace)) {
      merge_gamma(file_cfg, est_gamma, est.gamma);
      merge(file_cfg, est_r, "r", est.r);
      merge(file_cfg, est_state_opt, "state", est_state);
      merge(file_cfg, est_tm, "tau_m", est.tau_m);
      merge(file_cfg, est_dt_opt, "dt", est_dt);
      merge(file_cfg, est_seed, "seed", est.seed);
      merge(file_cfg, est_stream, "stream", est.stream);
      merge(file_cfg, est_out, "out", est.out);
      cfg = {{"gamma", rate_json(est.gamma)}, {"r", est.r},         {"state", est_state},
             {"tau_m", est.tau_m},            {"dt", est_dt},       {"seed", est.seed},
             {"stream", est.stream},          {"out", est.out}};
      execute("estimator-trace", cfg);
    } else if (app.got_subcommand(fit_cmd)) {
      merge(file_cfg, fit_data_opt, "data", fit_data);
      merge(file_cfg, fit_format_opt, "format", fit_format);
      merge_gamma(file_cfg, fit_gamma, fitp.gamma);
      merge(file_cfg, fit_tm, "tau_m", fitp.tau_m);
      merge(file_cfg, fit_is, "init_scale", fit_init_scale);
      merge(file_cfg, fit_ir, "init_snr", fit_init_snr);
      merge(file_cfg, fit_ib, "init_tau_b", fit_init_tau_b);
      merge(file_cfg, fit_ip, "init_p_plus", fit_init_p);
      merge(file_cfg, fit_threads_opt, "threads", fit_threads);
      merge(file_cfg, fit_out, "out", fitp.out);
      if (fit_data.empty()) throw std::invalid_argument("fit requires --data");
      if (fit_init_tau_b <= 0.0) fit_init_tau_b = fitp.tau_m / 20.0;
      cfg = {{"data", fit_data},
             {"format", fit_format},
             {"gamma", rate_json(fitp.gamma)},
             {"tau_m", fitp.tau_m},
             {"init_scale", fit_init_scale},
             {"init_snr", fit_init_snr},
             {"init_tau_b", fit_init_tau_b},
             {"init_p_plus", fit_init_p},
             {"threads", fit_threads},
             {"out", fitp.out}};
      execute("fit", cfg);
    } else {
      std::cerr << app.help() << '\n';
      return 2;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
