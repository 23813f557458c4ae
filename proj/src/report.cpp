#include "coreselect/report.hpp"

#include <fstream>

#include "json.hpp"

namespace coreselect {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json kappa_json(const Capacity& kappa) {
  if (!kappa.finite()) return "inf";
  return kappa.value();
}

ordered_json classes_json(const std::optional<ClassDistribution>& classes) {
  if (!classes.has_value()) return nullptr;
  ordered_json out;
  out["counts"] = classes->counts;
  out["skewRatio"] =
      classes->skew_ratio.has_value() ? ordered_json(*classes->skew_ratio)
                                      : ordered_json(nullptr);
  return out;
}

ordered_json config_json(const PipelineConfig& config) {
  ordered_json out;
  out["delta"] = config.calibration.delta;
  out["epsilon"] = config.calibration.epsilon;
  out["windowN"] = config.calibration.window_n;
  out["dims"] = config.calibration.dims;
  out["sigma2"] = config.calibration.sigma2;
  out["sigma2Mode"] = config.sigma2_fixed ? "fixed" : "estimated";
  out["kappa"] = kappa_json(config.calibration.kappa);
  if (config.explicit_radii.has_value()) {
    out["explicitRadii"] = {{"delta0", config.explicit_radii->delta0},
                            {"delta1", config.explicit_radii->delta1}};
  } else {
    out["explicitRadii"] = nullptr;
  }
  out["exactLimit"] = config.exact_limit;
  out["normalize"] = config.normalize;
  out["seedWindows"] = config.seed_windows;
  out["seed"] = config.seed;
  out["bound"] = {{"L", config.bound.loss_bound},
                  {"lambdaLoss", config.bound.lambda_loss},
                  {"lambdaRegression", config.bound.lambda_regression},
                  {"numClasses", config.bound.num_classes},
                  {"gamma", config.bound.gamma}};
  ordered_json kinds = ordered_json::array();
  for (const BaselineKind kind : config.baselines) {
    kinds.push_back(kind == BaselineKind::Random ? "random" : "kcenter");
  }
  out["baselines"] = kinds;
  return out;
}

ordered_json report_json(const RunReport& report) {
  ordered_json out;
  out["config"] = config_json(report.config);
  out["forecaster"] = report.forecaster_name;
  out["sigma2Used"] = report.sigma2_used;
  out["radii"] = {{"delta0", report.radii.delta0},
                  {"delta1", report.radii.delta1}};
  out["coreset"] = {{"size", report.coreset_size},
                    {"totalCandidates", report.total_candidates},
                    {"weightNorm", report.weight_norm_value},
                    {"samplingRatio", report.sampling_ratio},
                    {"selectedEpochs", report.selected_epochs},
                    {"weights", report.weights}};
  out["windows"] = {{"processed", report.windows_processed},
                    {"droppedTrailing", report.dropped_trailing}};
  ordered_json per_window = ordered_json::array();
  for (const bool covered : report.coverage.per_window) {
    per_window.push_back(covered);
  }
  out["coverage"] = {{"fraction", report.coverage.fraction},
                     {"perWindow", per_window}};
  out["classes"] = classes_json(report.classes);
  out["bound"] = {{"radiusTerm", report.bound.radius_term},
                  {"hoeffdingTerm", report.bound.hoeffding_term},
                  {"weightTerm", report.bound.weight_term},
                  {"trainingTerm", report.bound.training_term},
                  {"total", report.bound.total}};
  out["nu"] = report.nu_value;
  out["objective"] = report.objective;
  out["forecastNrmse"] = report.forecast_nrmse;  // NaN serializes as null
  ordered_json baselines = ordered_json::array();
  for (const BaselineReport& baseline : report.baselines) {
    ordered_json b;
    b["kind"] = baseline.kind;
    b["costUnaware"] = baseline.cost_unaware;
    b["samplingRatio"] = baseline.sampling_ratio;
    b["perWindowK"] = baseline.per_window_k.has_value()
                          ? ordered_json(*baseline.per_window_k)
                          : ordered_json(nullptr);
    b["selectedEpochs"] = baseline.selected_epochs;
    b["classes"] = classes_json(baseline.classes);
    baselines.push_back(std::move(b));
  }
  out["baselines"] = baselines;
  return out;
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  return report_json(report).dump(2) + "\n";
}

void write_report_file(const RunReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open file for writing");
  out << report_to_json(report);
  out.flush();
  if (!out) throw DataError(path + ": write failed");
}

std::string selected_epochs_csv(const RunReport& report) {
  std::string csv = "epoch,weight\n";
  for (std::size_t i = 0; i < report.selected_epochs.size(); ++i) {
    csv += std::to_string(report.selected_epochs[i]);
    csv += ',';
    csv += std::to_string(report.weights[i]);
    csv += '\n';
  }
  return csv;
}

void write_selected_csv_file(const RunReport& report,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open file for writing");
  out << selected_epochs_csv(report);
  out.flush();
  if (!out) throw DataError(path + ": write failed");
}

}  // namespace coreselect
