#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coreselect/builder.hpp"
#include "coreselect/calibration.hpp"
#include "coreselect/dataset.hpp"
#include "coreselect/forecasting.hpp"
#include "coreselect/geometry.hpp"
#include "coreselect/harness.hpp"
#include "coreselect/report.hpp"

namespace cs = coreselect;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitData = 3;
constexpr int kExitValidation = 4;

struct Options {
  std::string config_path;
  std::string dataset_path;
  double delta = 1.0;
  double epsilon = 0.05;
  std::string kappa = "inf";
  int window_n = 1;
  std::string forecaster = "persistence";
  double sigma2 = 0.0;
  bool sigma2_fixed = false;  // true once --sigma2 or config sets it
  std::uint64_t seed = 1;
  int trials = 2000;
  std::string out_dir = ".";
  std::vector<std::string> baselines;
  double ratio = 0.1;
  bool ratio_only = false;
  int dims = 1;
  std::size_t fit_count = 0;
  int ar_order = 2;
  bool no_normalize = false;
  std::size_t seed_windows = 1;
  std::size_t exact_limit = cs::kDefaultExactLimit;
  std::string delta0_grid;
  std::string delta1_grid;
  std::string kappa_grid = "inf";
  bool synthetic = false;
  std::size_t synth_length = 2000;
  double delta0_override = std::numeric_limits<double>::quiet_NaN();
  double delta1_override = std::numeric_limits<double>::quiet_NaN();
};

cs::Capacity parse_kappa(const std::string& text) {
  if (text == "inf") return cs::Capacity::unbounded();
  std::uint32_t value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end || value < 1) {
    throw std::invalid_argument(
        "kappa must be a positive integer or 'inf', got '" + text + "'");
  }
  return cs::Capacity::bounded(value);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      items.push_back(text.substr(start));
      break;
    }
    items.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return items;
}

std::vector<double> parse_radius_grid(const std::string& text,
                                      const char* what) {
  if (text.empty()) {
    throw std::invalid_argument(std::string(what) + " grid must be nonempty");
  }
  std::vector<double> values;
  for (const std::string& item : split_list(text)) {
    if (item == "inf") {
      values.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    double v = 0.0;
    const char* begin = item.data();
    const char* end = begin + item.size();
    const auto result = std::from_chars(begin, end, v);
    if (result.ec != std::errc{} || result.ptr != end || v < 0.0) {
      throw std::invalid_argument(std::string(what) +
                                  " grid entries must be >= 0 or 'inf'");
    }
    values.push_back(v);
  }
  return values;
}

std::vector<cs::BaselineKind> parse_baselines(
    const std::vector<std::string>& names) {
  std::vector<cs::BaselineKind> kinds;
  for (const std::string& name : names) {
    if (name == "random") {
      kinds.push_back(cs::BaselineKind::Random);
    } else if (name == "kcenter") {
      kinds.push_back(cs::BaselineKind::KCenter);
    } else {
      throw std::invalid_argument("unknown baseline '" + name +
                                  "' (expected random or kcenter)");
    }
  }
  return kinds;
}

// Config-file values fill every option the command line (or environment)
// left unset.
void merge_config_file(const ordered_json& cfg, const CLI::App* sub,
                       Options& o) {
  const auto unset = [&](const char* flag) {
    const CLI::Option* opt =
        sub->get_option_no_throw(std::string("--") + flag);
    return opt != nullptr && opt->count() == 0;
  };
  const auto take = [&](const char* key, auto& field) {
    if (cfg.contains(key) && unset(key)) {
      field = cfg.at(key).get<std::decay_t<decltype(field)>>();
    }
  };
  take("dataset", o.dataset_path);
  take("delta", o.delta);
  take("epsilon", o.epsilon);
  take("window-n", o.window_n);
  take("forecaster", o.forecaster);
  take("seed", o.seed);
  take("trials", o.trials);
  take("out", o.out_dir);
  take("ratio", o.ratio);
  take("dims", o.dims);
  take("fit-count", o.fit_count);
  take("ar-order", o.ar_order);
  take("seed-windows", o.seed_windows);
  take("exact-limit", o.exact_limit);
  take("delta0-grid", o.delta0_grid);
  take("delta1-grid", o.delta1_grid);
  take("kappa-grid", o.kappa_grid);
  take("length", o.synth_length);
  if (cfg.contains("kappa") && unset("kappa")) {
    const auto& v = cfg.at("kappa");
    o.kappa = v.is_string() ? v.get<std::string>()
                            : std::to_string(v.get<std::uint64_t>());
  }
  if (cfg.contains("sigma2") && unset("sigma2")) {
    o.sigma2 = cfg.at("sigma2").get<double>();
    o.sigma2_fixed = true;
  }
  if (cfg.contains("baseline") && unset("baseline")) {
    o.baselines = cfg.at("baseline").get<std::vector<std::string>>();
  }
  if (cfg.contains("normalize") && unset("no-normalize")) {
    o.no_normalize = !cfg.at("normalize").get<bool>();
  }
  if (cfg.contains("synthetic") && unset("synthetic")) {
    o.synthetic = cfg.at("synthetic").get<bool>();
  }
  if (cfg.contains("ratio-only") && unset("ratio-only")) {
    o.ratio_only = cfg.at("ratio-only").get<bool>();
  }
}

std::unique_ptr<cs::Forecaster> make_plain_forecaster(const Options& o) {
  if (o.forecaster == "persistence") {
    return cs::persistence_forecaster(o.window_n, o.dims);
  }
  if (o.forecaster == "ar") {
    return cs::ar_forecaster(o.ar_order, o.window_n, o.dims);
  }
  throw std::invalid_argument("unknown forecaster '" + o.forecaster +
                              "' (expected persistence, ar, or oracle)");
}

cs::PipelineConfig pipeline_config(const Options& o) {
  cs::PipelineConfig config;
  config.calibration.delta = o.delta;
  config.calibration.epsilon = o.epsilon;
  config.calibration.window_n = o.window_n;
  config.calibration.dims = o.dims;
  config.calibration.sigma2 = o.sigma2;
  config.calibration.kappa = parse_kappa(o.kappa);
  config.sigma2_fixed = o.sigma2_fixed;
  config.exact_limit = o.exact_limit;
  config.normalize = !o.no_normalize;
  config.seed_windows = o.seed_windows;
  config.seed = o.seed;
  config.baselines = parse_baselines(o.baselines);
  return config;
}

void print_double(const char* label, double value) {
  std::printf("%s %.17g\n", label, value);
}

int cmd_calibrate(Options& o) {
  if (!o.dataset_path.empty()) {
    const cs::StreamDataset ds = cs::read_csv(o.dataset_path);
    o.dims = ds.dims;
  }
  cs::CalibrationConfig config;
  config.delta = o.delta;
  config.epsilon = o.epsilon;
  config.window_n = o.window_n;
  config.dims = o.dims;
  config.sigma2 = o.sigma2;
  config.kappa = parse_kappa(o.kappa);

  const double min_delta = cs::min_feasible_delta(o.epsilon, o.window_n,
                                                  o.dims, o.sigma2);
  print_double("minFeasibleDelta", min_delta);
  try {
    const cs::RunRadii radii = cs::derive_radii(config);
    print_double("delta0", radii.delta0);
    print_double("delta1", radii.delta1);
    print_double("margin", o.delta - min_delta);
    return kExitOk;
  } catch (const cs::InfeasibleConfigError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  }
}

cs::StreamDataset load_dataset(const Options& o) {
  cs::StreamDataset ds;
  if (o.synthetic) {
    cs::RegimeStreamSpec spec;
    spec.length = o.synth_length;
    spec.dims = o.dims;
    spec.seed = o.seed;
    ds = cs::make_regime_stream(spec);
  } else {
    if (o.dataset_path.empty()) {
      throw std::invalid_argument("--dataset (or --synthetic) is required");
    }
    ds = cs::read_csv(o.dataset_path);
  }
  if (o.fit_count > ds.size()) {
    throw cs::DataError("fit-count exceeds the dataset size");
  }
  ds.fit_count = o.fit_count;
  return ds;
}

// Oracle runs hold the stream the pipeline will see, so normalization is
// applied up front and disabled inside the pipeline.
std::unique_ptr<cs::Forecaster> make_oracle_for(
    const Options& o, cs::StreamDataset& ds, cs::PipelineConfig& config) {
  if (config.normalize && ds.fit_count > 0) {
    Eigen::MatrixXd rows(ds.fit_count, ds.dims);
    for (std::size_t i = 0; i < ds.fit_count; ++i) {
      rows.row(static_cast<Eigen::Index>(i)) = ds.features[i].transpose();
    }
    const cs::FeatureScaler scaler = cs::FeatureScaler::fit(rows);
    for (Eigen::VectorXd& x : ds.features) x = scaler.transform(x);
  }
  config.normalize = false;
  return cs::gaussian_oracle_forecaster(ds.features, o.sigma2, o.seed,
                                        o.window_n, o.dims);
}

ordered_json baseline_only_json(const cs::StreamDataset& ds,
                                const Options& o) {
  ordered_json out;
  out["ratioOnly"] = true;
  out["ratio"] = o.ratio;
  ordered_json rows = ordered_json::array();
  for (const cs::BaselineKind kind : parse_baselines(o.baselines)) {
    ordered_json row;
    std::vector<std::size_t> positions;
    if (kind == cs::BaselineKind::Random) {
      row["kind"] = "random";
      positions = cs::random_baseline(ds, o.ratio, o.seed);
    } else {
      row["kind"] = "kcenter";
      const std::size_t n = static_cast<std::size_t>(o.window_n);
      const std::size_t k = std::min(
          n, static_cast<std::size_t>(
                 std::llround(o.ratio * static_cast<double>(o.window_n))));
      row["perWindowK"] = k;
      positions = cs::kcenter_window_baseline(ds, n, k);
    }
    row["selectedCount"] = positions.size();
    ordered_json epochs = ordered_json::array();
    for (const std::size_t p : positions) epochs.push_back(ds.epochs[p]);
    row["selectedEpochs"] = epochs;
    if (ds.labels.has_value()) {
      const cs::ClassDistribution dist = cs::class_distribution(
          positions, *ds.labels, ds.num_classes());
      row["classCounts"] = dist.counts;
      row["skewRatio"] = dist.skew_ratio.has_value()
                             ? ordered_json(*dist.skew_ratio)
                             : ordered_json(nullptr);
    }
    rows.push_back(std::move(row));
  }
  out["baselines"] = rows;
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cs::DataError(path + ": cannot open file for writing");
  out << text;
  out.flush();
  if (!out) throw cs::DataError(path + ": write failed");
}

int cmd_run(Options& o) {
  cs::StreamDataset ds = load_dataset(o);
  o.dims = ds.dims;
  fs::create_directories(o.out_dir);

  if (o.ratio_only) {
    if (o.baselines.empty()) o.baselines.push_back("random");
    const ordered_json out = baseline_only_json(ds, o);
    write_text_file((fs::path(o.out_dir) / "report.json").string(),
                    out.dump(2) + "\n");
    std::printf("ratioOnly baselines=%zu ratio=%.6g\n",
                out.at("baselines").size(), o.ratio);
    return kExitOk;
  }

  cs::PipelineConfig config = pipeline_config(o);
  std::unique_ptr<cs::Forecaster> forecaster =
      o.forecaster == "oracle" ? make_oracle_for(o, ds, config)
                               : make_plain_forecaster(o);
  const cs::RunReport report = cs::run_pipeline(ds, *forecaster, config);
  cs::write_report_file(report,
                        (fs::path(o.out_dir) / "report.json").string());
  cs::write_selected_csv_file(
      report, (fs::path(o.out_dir) / "selected.csv").string());
  std::printf("samplingRatio=%.6g weightNorm=%.6g coverage=%.6g size=%zu\n",
              report.sampling_ratio, report.weight_norm_value,
              report.coverage.fraction, report.coreset_size);
  return kExitOk;
}

int cmd_validate(Options& o) {
  if (o.forecaster != "oracle") {
    throw std::invalid_argument(
        "validate requires --forecaster oracle; the coverage guarantee "
        "only holds under the Gaussian error model");
  }
  if (o.trials < 1) throw std::invalid_argument("--trials must be >= 1");
  const double min_delta =
      cs::min_feasible_delta(o.epsilon, o.window_n, o.dims, o.sigma2);
  if (o.delta <= 0.0) {
    o.delta = 2.0 * min_delta;  // auto: comfortably feasible radius
  }

  const std::size_t windows = static_cast<std::size_t>(o.trials);
  const std::size_t n = static_cast<std::size_t>(o.window_n);
  const std::size_t length = n * (o.seed_windows + windows);
  cs::StreamDataset ds =
      cs::make_random_walk(length, o.dims, 0.5 * o.delta, o.seed + 1);

  cs::PipelineConfig config = pipeline_config(o);
  config.sigma2_fixed = true;
  config.normalize = false;
  const bool has0 = !std::isnan(o.delta0_override);
  const bool has1 = !std::isnan(o.delta1_override);
  if (has0 && has1) {
    config.explicit_radii = cs::RunRadii{o.delta0_override,
                                         o.delta1_override};
  } else if (has0 || has1) {
    cs::RunRadii radii = cs::derive_radii(config.calibration);
    if (has0) radii.delta0 = o.delta0_override;
    if (has1) radii.delta1 = o.delta1_override;
    config.explicit_radii = radii;
  }
  std::unique_ptr<cs::Forecaster> forecaster = cs::gaussian_oracle_forecaster(
      ds.features, o.sigma2, o.seed, o.window_n, o.dims);
  const cs::RunReport report = cs::run_pipeline(ds, *forecaster, config);

  const double target = 1.0 - o.epsilon;
  const double band =
      target - 3.0 * std::sqrt(o.epsilon * (1.0 - o.epsilon) /
                               static_cast<double>(windows));
  const bool pass = report.coverage.fraction >= band;

  fs::create_directories(o.out_dir);
  ordered_json out;
  out["windows"] = report.windows_processed;
  out["fraction"] = report.coverage.fraction;
  out["target"] = target;
  out["band"] = band;
  out["pass"] = pass;
  out["report"] = ordered_json::parse(cs::report_to_json(report));
  write_text_file((fs::path(o.out_dir) / "validate.json").string(),
                  out.dump(2) + "\n");
  std::printf("coverage=%.6g target=%.6g band=%.6g windows=%zu %s\n",
              report.coverage.fraction, target, band,
              report.windows_processed, pass ? "PASS" : "FAIL");
  return pass ? kExitOk : kExitValidation;
}

struct SweepCell {
  double delta0 = 0.0;
  double delta1 = 0.0;
  std::string kappa;
};

ordered_json run_sweep_cell(const cs::StreamDataset& ds, const Options& o,
                            const SweepCell& cell) {
  ordered_json row;
  row["delta0"] = std::isinf(cell.delta0) ? ordered_json("inf")
                                          : ordered_json(cell.delta0);
  row["delta1"] = std::isinf(cell.delta1) ? ordered_json("inf")
                                          : ordered_json(cell.delta1);
  row["kappa"] = cell.kappa;
  try {
    Options cell_opts = o;
    cell_opts.kappa = cell.kappa;
    cs::PipelineConfig config = pipeline_config(cell_opts);
    config.explicit_radii = cs::RunRadii{cell.delta0, cell.delta1};
    config.sigma2_fixed = true;
    cs::StreamDataset working = ds;
    std::unique_ptr<cs::Forecaster> forecaster =
        cell_opts.forecaster == "oracle"
            ? make_oracle_for(cell_opts, working, config)
            : make_plain_forecaster(cell_opts);
    const cs::RunReport report =
        cs::run_pipeline(working, *forecaster, config);
    row["samplingRatio"] = report.sampling_ratio;
    row["coresetSize"] = report.coreset_size;
    row["weightNorm"] = report.weight_norm_value;
    row["objective"] = report.objective;
    row["coverageFraction"] = report.coverage.fraction;
    if (report.classes.has_value() &&
        report.classes->skew_ratio.has_value()) {
      row["skewRatio"] = *report.classes->skew_ratio;
    } else {
      row["skewRatio"] = nullptr;
    }
  } catch (const std::exception& e) {
    row["error"] = e.what();
  }
  return row;
}

int cmd_sweep(Options& o) {
  const cs::StreamDataset ds = load_dataset(o);
  o.dims = ds.dims;

  const std::vector<double> grid0 = parse_radius_grid(o.delta0_grid, "delta0");
  const std::vector<double> grid1 =
      o.delta1_grid.empty() ? std::vector<double>{}
                            : parse_radius_grid(o.delta1_grid, "delta1");
  std::vector<std::string> kappas = split_list(o.kappa_grid);
  for (const std::string& k : kappas) parse_kappa(k);  // validate early

  std::vector<SweepCell> cells;
  for (const double d0 : grid0) {
    const std::vector<double> d1s = grid1.empty() ? std::vector<double>{d0}
                                                  : grid1;
    for (const double d1 : d1s) {
      for (const std::string& k : kappas) {
        cells.push_back(SweepCell{d0, d1, k});
      }
    }
  }

  std::vector<std::future<ordered_json>> futures;
  futures.reserve(cells.size());
  for (const SweepCell& cell : cells) {
    futures.push_back(std::async(std::launch::async, [&ds, &o, cell] {
      return run_sweep_cell(ds, o, cell);
    }));
  }
  ordered_json rows = ordered_json::array();
  for (auto& f : futures) rows.push_back(f.get());

  // Sanity column: at fixed (delta1, kappa), growing delta0 must not
  // collect more (checked only against the previous cell in the group).
  std::map<std::string, std::pair<double, double>> last_in_group;
  for (auto& row : rows) {
    if (row.contains("error")) continue;
    const std::string key = row.at("delta1").dump() + "|" +
                            row.at("kappa").get<std::string>();
    const double d0 = row.at("delta0").is_string()
                          ? std::numeric_limits<double>::infinity()
                          : row.at("delta0").get<double>();
    const double ratio = row.at("samplingRatio").get<double>();
    bool ok = true;
    const auto it = last_in_group.find(key);
    if (it != last_in_group.end() && d0 >= it->second.first) {
      ok = ratio <= it->second.second;
    }
    row["monotoneOk"] = ok;
    last_in_group[key] = {d0, ratio};
  }

  fs::create_directories(o.out_dir);
  ordered_json out;
  out["cells"] = rows;
  write_text_file((fs::path(o.out_dir) / "sweep.json").string(),
                  out.dump(2) + "\n");
  for (const auto& row : rows) {
    if (row.contains("error")) {
      std::printf("d0=%s d1=%s kappa=%s skipped: %s\n",
                  row.at("delta0").dump().c_str(),
                  row.at("delta1").dump().c_str(),
                  row.at("kappa").get<std::string>().c_str(),
                  row.at("error").get<std::string>().c_str());
      continue;
    }
    std::printf(
        "d0=%s d1=%s kappa=%s ratio=%.4f size=%zu norm=%.4f skew=%s\n",
        row.at("delta0").dump().c_str(), row.at("delta1").dump().c_str(),
        row.at("kappa").get<std::string>().c_str(),
        row.at("samplingRatio").get<double>(),
        row.at("coresetSize").get<std::size_t>(),
        row.at("weightNorm").get<double>(),
        row.at("skewRatio").is_null()
            ? "inf"
            : std::to_string(row.at("skewRatio").get<double>()).c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming coreset selection over forecast windows"};
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file")
        ->envname("CORESELECT_CONFIG");
    sub->add_option("--delta", o.delta, "target coverage radius")
        ->envname("CORESELECT_DELTA");
    sub->add_option("--epsilon", o.epsilon,
                    "per-window failure probability in (0,1)")
        ->envname("CORESELECT_EPSILON");
    sub->add_option("--kappa", o.kappa, "capacity (positive integer or inf)")
        ->envname("CORESELECT_KAPPA");
    sub->add_option("--window-n", o.window_n, "prediction window length")
        ->envname("CORESELECT_WINDOW_N");
    sub->add_option("--sigma2", o.sigma2,
                    "fixed prediction error power (else estimated)")
        ->envname("CORESELECT_SIGMA2");
    sub->add_option("--seed", o.seed, "run seed")->envname("CORESELECT_SEED");
    sub->add_option("--out", o.out_dir, "output directory")
        ->envname("CORESELECT_OUT");
    sub->add_option("--dims", o.dims, "feature dimension (datasets override)")
        ->envname("CORESELECT_DIMS");
  };
  const auto add_stream = [&](CLI::App* sub) {
    sub->add_option("--dataset", o.dataset_path, "input CSV stream")
        ->envname("CORESELECT_DATASET");
    sub->add_option("--forecaster", o.forecaster,
                    "persistence | ar | oracle")
        ->envname("CORESELECT_FORECASTER");
    sub->add_option("--fit-count", o.fit_count,
                    "leading epochs reserved for forecaster fitting")
        ->envname("CORESELECT_FIT_COUNT");
    sub->add_option("--ar-order", o.ar_order, "AR forecaster order")
        ->envname("CORESELECT_AR_ORDER");
    sub->add_flag("--no-normalize", o.no_normalize,
                  "disable z-score normalization")
        ->envname("CORESELECT_NO_NORMALIZE");
    sub->add_option("--seed-windows", o.seed_windows,
                    "leading selection windows collected whole")
        ->envname("CORESELECT_SEED_WINDOWS");
    sub->add_option("--exact-limit", o.exact_limit,
                    "exact cover solver size cutoff")
        ->envname("CORESELECT_EXACT_LIMIT");
    sub->add_flag("--synthetic", o.synthetic,
                  "use the built-in labeled regime stream")
        ->envname("CORESELECT_SYNTHETIC");
    sub->add_option("--length", o.synth_length, "synthetic stream length")
        ->envname("CORESELECT_LENGTH");
  };

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "derive (delta0, delta1) and margin");
  add_common(calibrate);
  calibrate->add_option("--dataset", o.dataset_path,
                        "optional CSV; used to infer dims")
      ->envname("CORESELECT_DATASET");

  CLI::App* run = app.add_subcommand("run", "stream a dataset and select");
  add_common(run);
  add_stream(run);
  run->add_option("--baseline", o.baselines,
                  "baseline to include (random | kcenter), repeatable")
      ->envname("CORESELECT_BASELINE");
  run->add_option("--ratio", o.ratio, "sampling ratio for --ratio-only")
      ->envname("CORESELECT_RATIO");
  run->add_flag("--ratio-only", o.ratio_only,
                "skip the pipeline; emit baselines at --ratio")
      ->envname("CORESELECT_RATIO_ONLY");

  CLI::App* validate = app.add_subcommand(
      "validate", "Monte Carlo check of the coverage guarantee");
  add_common(validate);
  validate->add_option("--trials", o.trials, "number of windows")
      ->envname("CORESELECT_TRIALS");
  validate->add_option("--forecaster", o.forecaster, "must be oracle")
      ->envname("CORESELECT_FORECASTER");
  validate
      ->add_option("--seed-windows", o.seed_windows,
                   "leading windows collected whole")
      ->envname("CORESELECT_SEED_WINDOWS");
  validate
      ->add_option("--delta0", o.delta0_override,
                   "override the derived delta0 (violation experiments)")
      ->envname("CORESELECT_DELTA0");
  validate
      ->add_option("--delta1", o.delta1_override,
                   "override the derived delta1 (violation experiments)")
      ->envname("CORESELECT_DELTA1");

  CLI::App* sweep =
      app.add_subcommand("sweep", "grid over (delta0, delta1, kappa)");
  add_common(sweep);
  add_stream(sweep);
  sweep->add_option("--delta0-grid", o.delta0_grid,
                    "comma list of delta0 values ('inf' allowed)")
      ->envname("CORESELECT_DELTA0_GRID");
  sweep->add_option("--delta1-grid", o.delta1_grid,
                    "comma list of delta1 values (defaults to delta0)")
      ->envname("CORESELECT_DELTA1_GRID");
  sweep->add_option("--kappa-grid", o.kappa_grid,
                    "comma list of kappa values ('inf' allowed)")
      ->envname("CORESELECT_KAPPA_GRID");

  CLI11_PARSE(app, argc, argv);
  CLI::App* active = app.get_subcommands().front();

  try {
    if (!o.config_path.empty()) {
      std::ifstream in(o.config_path);
      if (!in) throw cs::DataError(o.config_path + ": cannot open file");
      ordered_json cfg;
      try {
        cfg = ordered_json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw cs::DataError(o.config_path + ": " + e.what());
      }
      merge_config_file(cfg, active, o);
    }
    const CLI::Option* sigma_opt = active->get_option_no_throw("--sigma2");
    if (sigma_opt != nullptr && sigma_opt->count() > 0) {
      o.sigma2_fixed = true;
    }
    if (active == validate &&
        active->get_option_no_throw("--forecaster")->count() == 0 &&
        o.forecaster == "persistence") {
      o.forecaster = "oracle";
    }

    if (active == calibrate) return cmd_calibrate(o);
    if (active == run) return cmd_run(o);
    if (active == validate) return cmd_validate(o);
    return cmd_sweep(o);
  } catch (const cs::InfeasibleConfigError& e) {
    std::fprintf(stderr, "infeasible config: %s\n", e.what());
    return kExitInfeasible;
  } catch (const cs::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
