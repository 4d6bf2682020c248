#include "rulfdia/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "rulfdia/errors.hpp"
#include "rulfdia/textio.hpp"

namespace rulfdia::eval {

using cmapss::EngineTrajectory;
using text::format_double;

double rmse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("rmse: " + std::to_string(predictions.size()) + " predictions vs " +
                                std::to_string(truths.size()) + " truths");
  if (predictions.empty()) throw std::invalid_argument("rmse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - truths[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predictions.size()));
}

void TestSet::validate() const {
  if (trajectories.size() != final_ruls.size())
    throw ValidationError("test set: " + std::to_string(trajectories.size()) + " trajectories but " +
                          std::to_string(final_ruls.size()) + " RUL values");
}

TestSet TestSet::longer_than(std::size_t min_cycles) const {
  validate();
  TestSet out;
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    if (trajectories[i].length() > min_cycles) {
      out.trajectories.push_back(trajectories[i]);
      out.final_ruls.push_back(final_ruls[i]);
    }
  return out;
}

namespace {

void require_length(const nn::ModelParams& model, const EngineTrajectory& t) {
  if (t.length() < model.spec.seq_len)
    throw ValidationError("engine " + std::to_string(t.engine_id) + " has " +
                          std::to_string(t.length()) + " cycles, shorter than seq_len " +
                          std::to_string(model.spec.seq_len));
}

// Prediction for the window whose last row is `end_row` (0-based).
double predict_window(const nn::ModelParams& model, const nn::Matrix& features, std::size_t end_row) {
  const std::size_t len = model.spec.seq_len;
  nn::Matrix window(len, features.cols());
  const std::size_t first = end_row + 1 - len;
  for (std::size_t r = 0; r < len; ++r) std::ranges::copy(features.row(first + r), window.row(r).begin());
  return std::max(0.0, nn::forward(model, window, nn::Mode::Infer, nullptr));
}

double capped(double rul, const cmapss::RulLabeling& labeling) {
  return std::min(rul, static_cast<double>(labeling.rul_cap));
}

}  // namespace

double predict_last_window(const nn::ModelParams& model, const EngineTrajectory& trajectory,
                           const cmapss::NormStats& stats) {
  require_length(model, trajectory);
  const auto norm = cmapss::normalize(trajectory, stats);
  return predict_window(model, norm.features, trajectory.length() - 1);
}

double EvaluationReport::recomputed_rmse() const {
  std::vector<double> p, t;
  for (const auto& e : per_engine) {
    p.push_back(e.prediction);
    t.push_back(e.truth);
  }
  return eval::rmse(p, t);
}

EvaluationReport evaluate(const nn::ModelParams& model, std::span<const EngineTrajectory> trajectories,
                          std::span<const double> final_ruls, const cmapss::NormStats& stats,
                          const cmapss::RulLabeling& labeling, std::string dataset_label) {
  if (trajectories.size() != final_ruls.size())
    throw ValidationError("evaluate: " + std::to_string(trajectories.size()) + " trajectories but " +
                          std::to_string(final_ruls.size()) + " RUL values");
  labeling.validate();
  EvaluationReport report;
  report.model_label = model.spec.label();
  report.dataset_label = std::move(dataset_label);
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& t = trajectories[i];
    if (t.length() < model.spec.seq_len) {
      report.excluded_engines.push_back(t.engine_id);
      continue;
    }
    EngineResult r;
    r.engine_id = t.engine_id;
    r.prediction = predict_last_window(model, t, stats);
    r.truth = capped(final_ruls[i], labeling);
    r.abs_error = std::abs(r.prediction - r.truth);
    report.per_engine.push_back(r);
  }
  if (report.per_engine.empty())
    throw ValidationError("evaluate: no engine has at least " + std::to_string(model.spec.seq_len) +
                          " cycles");
  report.n_engines = report.per_engine.size();
  report.rmse = report.recomputed_rmse();
  return report;
}

EvaluationReport evaluate(const nn::ModelParams& model, const TestSet& test,
                          const cmapss::NormStats& stats, const cmapss::RulLabeling& labeling,
                          std::string dataset_label) {
  return evaluate(model, test.trajectories, test.final_ruls, stats, labeling, std::move(dataset_label));
}

double PiecewiseTrace::rmse() const {
  std::vector<double> p, t;
  for (const auto& pt : points) {
    p.push_back(pt.predicted_rul);
    t.push_back(pt.true_rul);
  }
  return eval::rmse(p, t);
}

PiecewiseTrace piecewise_trace(const nn::ModelParams& model, const EngineTrajectory& trajectory,
                               const cmapss::NormStats& stats, const cmapss::RulLabeling& labeling,
                               double final_rul, std::optional<fdia::AttackWindow> attack_window) {
  require_length(model, trajectory);
  const auto labels = cmapss::label_rul(trajectory, labeling, final_rul);
  const auto norm = cmapss::normalize(trajectory, stats);
  PiecewiseTrace trace;
  trace.engine_id = trajectory.engine_id;
  trace.attack_window = attack_window;
  for (std::size_t end = model.spec.seq_len - 1; end < trajectory.length(); ++end)
    trace.points.push_back({trajectory.rows[end].cycle, predict_window(model, norm.features, end), labels[end]});
  return trace;
}

AttackComparison compare_under_attack(const nn::ModelParams& model, const TestSet& clean,
                                      std::span<const EngineTrajectory> attacked,
                                      const cmapss::NormStats& stats,
                                      const cmapss::RulLabeling& labeling) {
  clean.validate();
  if (attacked.size() != clean.trajectories.size())
    throw ValidationError("compare_under_attack: " + std::to_string(clean.trajectories.size()) +
                          " clean vs " + std::to_string(attacked.size()) + " attacked engines");
  for (std::size_t i = 0; i < attacked.size(); ++i) {
    const auto& c = clean.trajectories[i];
    const auto& a = attacked[i];
    if (c.engine_id != a.engine_id || c.length() != a.length())
      throw ValidationError("compare_under_attack: position " + std::to_string(i) + " pairs engine " +
                            std::to_string(c.engine_id) + " (" + std::to_string(c.length()) +
                            " cycles) with engine " + std::to_string(a.engine_id) + " (" +
                            std::to_string(a.length()) + " cycles)");
  }
  AttackComparison out;
  out.clean = evaluate(model, clean.trajectories, clean.final_ruls, stats, labeling, "clean");
  out.attacked = evaluate(model, attacked, clean.final_ruls, stats, labeling, "attacked");
  out.clean_rmse = out.clean.rmse;
  out.attacked_rmse = out.attacked.rmse;
  if (out.clean_rmse > 0.0)
    out.degradation_factor = out.attacked_rmse / out.clean_rmse;
  else
    out.degradation_factor = out.attacked_rmse == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return out;
}

void AlertConfig::validate() const {
  if (!(rul_threshold > 0.0) || !std::isfinite(rul_threshold))
    throw ValidationError("alert threshold must be a positive number of cycles");
}

AlertSummary alert_decisions(const PiecewiseTrace& trace, const AlertConfig& config) {
  config.validate();
  AlertSummary out;
  for (const auto& p : trace.points) {
    const bool alert = p.predicted_rul <= config.rul_threshold;
    out.decisions.push_back({p.cycle, alert});
    if (alert && !out.first_alert_cycle) out.first_alert_cycle = p.cycle;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t attack_cell_index(fdia::Variant variant, fdia::NoiseKind noise) {
  return (variant == fdia::Variant::Continuous ? 0 : 2) + (noise == fdia::NoiseKind::Random ? 0 : 1);
}

std::string_view attack_cell_name(std::size_t index) {
  static constexpr std::array<std::string_view, kNumAttackCells> names = {
      "continuous_random", "continuous_biased", "interim_random", "interim_biased"};
  return names.at(index);
}

std::optional<double> StudyRow::mean_attacked_rmse() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& c : cells)
    if (c) {
      sum += *c;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

namespace {

void summarize(StudyResult& result) {
  auto& rows = result.rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!result.best_clean_row || rows[i].clean_rmse < rows[*result.best_clean_row].clean_rmse)
      result.best_clean_row = i;
    const auto m = rows[i].mean_attacked_rmse();
    if (m && (!result.most_resilient_row || *m < *rows[*result.most_resilient_row].mean_attacked_rmse()))
      result.most_resilient_row = i;
  }
  if (!result.best_clean_row) {
    result.note = "no rows";
  } else if (!result.most_resilient_row) {
    result.note = "no attack cells; lowest clean RMSE at " + rows[*result.best_clean_row].config_label;
  } else if (*result.best_clean_row == *result.most_resilient_row) {
    result.note = "lowest clean RMSE and lowest mean attacked RMSE coincide at " +
                  rows[*result.best_clean_row].config_label + " for this seed";
  } else {
    result.note = "lowest clean RMSE at " + rows[*result.best_clean_row].config_label +
                  ", lowest mean attacked RMSE at " + rows[*result.most_resilient_row].config_label;
  }
}

}  // namespace

StudyResult evaluate_study(std::span<const nn::ModelParams> models, const StudyData& data,
                           std::span<const fdia::AttackSpec> attack_matrix,
                           const StudyProgress& progress) {
  data.test.validate();
  std::array<std::optional<std::vector<EngineTrajectory>>, kNumAttackCells> attacked;
  for (const auto& spec : attack_matrix) {
    const auto idx = attack_cell_index(spec.variant, spec.noise);
    if (attacked[idx]) throw ValidationError("study: attack cell " + spec.cell_name() + " listed twice");
    attacked[idx] = fdia::attack_dataset(spec, data.test.trajectories, data.bounds);
  }
  StudyResult result;
  for (const auto& model : models) {
    StudyRow row;
    row.config_label = model.spec.label();
    row.seq_len = model.spec.seq_len;
    row.clean_rmse = evaluate(model, data.test, data.stats, data.labeling).rmse;
    for (std::size_t c = 0; c < kNumAttackCells; ++c)
      if (attacked[c])
        row.cells[c] = evaluate(model, *attacked[c], data.test.final_ruls, data.stats, data.labeling).rmse;
    if (progress) progress("evaluated " + row.config_label);
    result.rows.push_back(std::move(row));
  }
  summarize(result);
  return result;
}

StudyResult run_study(std::span<const nn::ModelSpec> specs, const StudyData& data,
                      std::span<const fdia::AttackSpec> attack_matrix,
                      const nn::TrainConfig& train_config, const StudyProgress& progress) {
  std::vector<nn::ModelParams> models;
  for (const auto& spec : specs) {
    const auto samples = cmapss::make_training_samples(data.train, data.stats, data.labeling, spec.seq_len);
    if (progress) progress("training " + spec.label() + " on " + std::to_string(samples.size()) + " windows");
    models.push_back(nn::train(spec, samples, train_config).params);
  }
  return evaluate_study(models, data, attack_matrix, progress);
}

// ---------------------------------------------------------------------------

namespace {

using Json = nlohmann::ordered_json;

Json stamp_json(const ArtifactStamp& s) {
  return Json{{"tool_version", s.tool_version}, {"config_hash", s.config_hash}, {"seed", s.seed}};
}

Json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

}  // namespace

void write_stamp_line(std::ostream& out, const ArtifactStamp& stamp) {
  out << "# tool_version=" << stamp.tool_version << " config_hash=" << stamp.config_hash
      << " seed=" << stamp.seed << '\n';
}

void write_report_csv(std::ostream& out, const EvaluationReport& report, const ArtifactStamp& stamp) {
  write_stamp_line(out, stamp);
  out << "engine_id,prediction,truth,abs_error\n";
  for (const auto& e : report.per_engine)
    out << e.engine_id << ',' << format_double(e.prediction) << ',' << format_double(e.truth) << ','
        << format_double(e.abs_error) << '\n';
}

void write_report_json(std::ostream& out, const EvaluationReport& report, const ArtifactStamp& stamp) {
  Json j;
  j["stamp"] = stamp_json(stamp);
  j["model_label"] = report.model_label;
  j["dataset_label"] = report.dataset_label;
  j["rmse"] = report.rmse;
  j["n_engines"] = report.n_engines;
  j["excluded_engines"] = report.excluded_engines;
  out << j.dump(2) << '\n';
}

void write_trace_csv(std::ostream& out, const PiecewiseTrace& clean, const PiecewiseTrace* attacked,
                     const ArtifactStamp& stamp) {
  if (attacked && (attacked->points.size() != clean.points.size()))
    throw ValidationError("trace csv: clean and attacked traces differ in length");
  write_stamp_line(out, stamp);
  out << "cycle,true_rul,predicted_rul_clean,predicted_rul_attacked\n";
  for (std::size_t i = 0; i < clean.points.size(); ++i) {
    const auto& p = clean.points[i];
    out << p.cycle << ',' << format_double(p.true_rul) << ',' << format_double(p.predicted_rul) << ',';
    if (attacked) out << format_double(attacked->points[i].predicted_rul);
    out << '\n';
  }
}

void write_study_csv(std::ostream& out, const StudyResult& result, const ArtifactStamp& stamp) {
  write_stamp_line(out, stamp);
  out << "config_label,seq_len,clean_rmse";
  for (std::size_t c = 0; c < kNumAttackCells; ++c) out << ',' << attack_cell_name(c);
  out << '\n';
  for (const auto& row : result.rows) {
    // Labels contain commas, so they are quoted.
    out << '"' << row.config_label << "\"," << row.seq_len << ',' << format_double(row.clean_rmse);
    for (const auto& c : row.cells) {
      out << ',';
      if (c) out << format_double(*c);
    }
    out << '\n';
  }
}

void write_study_json(std::ostream& out, const StudyResult& result, const ArtifactStamp& stamp) {
  Json rows = Json::array();
  for (const auto& row : result.rows) {
    Json r;
    r["config_label"] = row.config_label;
    r["seq_len"] = row.seq_len;
    r["clean_rmse"] = row.clean_rmse;
    for (std::size_t c = 0; c < kNumAttackCells; ++c)
      r[std::string(attack_cell_name(c))] = number_or_null(row.cells[c]);
    r["mean_attacked_rmse"] = number_or_null(row.mean_attacked_rmse());
    rows.push_back(std::move(r));
  }
  Json j;
  j["stamp"] = stamp_json(stamp);
  j["rows"] = std::move(rows);
  j["best_clean"] = result.best_clean_row ? Json(result.rows[*result.best_clean_row].config_label) : Json();
  j["most_resilient"] =
      result.most_resilient_row ? Json(result.rows[*result.most_resilient_row].config_label) : Json();
  j["optima_coincide"] = result.best_clean_row && result.most_resilient_row &&
                         *result.best_clean_row == *result.most_resilient_row;
  j["note"] = result.note;
  out << j.dump(2) << '\n';
}

}  // namespace rulfdia::eval
