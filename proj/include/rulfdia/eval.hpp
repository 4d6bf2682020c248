#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rulfdia/cmapss.hpp"
#include "rulfdia/fdia.hpp"
#include "rulfdia/nn/model.hpp"
#include "rulfdia/nn/train.hpp"

namespace rulfdia::eval {

double rmse(std::span<const double> predictions, std::span<const double> truths);

/// Test trajectories paired by position with their ground-truth final RULs.
struct TestSet {
  std::vector<cmapss::EngineTrajectory> trajectories;
  std::vector<double> final_ruls;

  /// Throws ValidationError when the two lists differ in length.
  void validate() const;
  /// Keeps engines with strictly more than min_cycles rows.
  TestSet longer_than(std::size_t min_cycles) const;
};

/// Normalizes with train-time stats, runs the final window in inference mode
/// and clamps at zero. Throws ValidationError if T_n < seq_len.
double predict_last_window(const nn::ModelParams& model, const cmapss::EngineTrajectory& trajectory,
                           const cmapss::NormStats& stats);

struct EngineResult {
  int engine_id = 0;
  double prediction = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
};

struct EvaluationReport {
  std::string model_label;
  std::string dataset_label;
  double rmse = 0.0;
  std::size_t n_engines = 0;
  std::vector<EngineResult> per_engine;
  std::vector<int> excluded_engines;  // shorter than seq_len

  double recomputed_rmse() const;
};

/// Truths are capped with `labeling`; engines with T_n < seq_len are skipped
/// and listed in excluded_engines. No evaluable engine is a ValidationError.
EvaluationReport evaluate(const nn::ModelParams& model, std::span<const cmapss::EngineTrajectory> trajectories,
                          std::span<const double> final_ruls, const cmapss::NormStats& stats,
                          const cmapss::RulLabeling& labeling, std::string dataset_label = {});
EvaluationReport evaluate(const nn::ModelParams& model, const TestSet& test,
                          const cmapss::NormStats& stats, const cmapss::RulLabeling& labeling,
                          std::string dataset_label = {});

struct TracePoint {
  int cycle = 0;
  double predicted_rul = 0.0;
  double true_rul = 0.0;
};

struct PiecewiseTrace {
  int engine_id = 0;
  std::vector<TracePoint> points;
  std::optional<fdia::AttackWindow> attack_window;

  double rmse() const;
};

/// One point per end cycle in [seq_len, T_n].
PiecewiseTrace piecewise_trace(const nn::ModelParams& model, const cmapss::EngineTrajectory& trajectory,
                               const cmapss::NormStats& stats, const cmapss::RulLabeling& labeling,
                               double final_rul,
                               std::optional<fdia::AttackWindow> attack_window = std::nullopt);

struct AttackComparison {
  EvaluationReport clean;
  EvaluationReport attacked;
  double clean_rmse = 0.0;
  double attacked_rmse = 0.0;
  double degradation_factor = 0.0;  // attacked / clean; infinite when clean is 0
};

/// Both reports cover the same engines. Ids and lengths must line up
/// position by position, otherwise ValidationError.
AttackComparison compare_under_attack(const nn::ModelParams& model, const TestSet& clean,
                                      std::span<const cmapss::EngineTrajectory> attacked,
                                      const cmapss::NormStats& stats,
                                      const cmapss::RulLabeling& labeling);

struct AlertConfig {
  double rul_threshold = 30.0;
  void validate() const;
};

struct AlertDecision {
  int cycle = 0;
  bool alert = false;
};

struct AlertSummary {
  std::vector<AlertDecision> decisions;
  std::optional<int> first_alert_cycle;
};

AlertSummary alert_decisions(const PiecewiseTrace& trace, const AlertConfig& config);

// ---------------------------------------------------------------------------
// Sequence-length study

/// Column order of the four attack cells in study output.
inline constexpr std::size_t kNumAttackCells = 4;
std::size_t attack_cell_index(fdia::Variant variant, fdia::NoiseKind noise);
std::string_view attack_cell_name(std::size_t index);

struct StudyRow {
  std::string config_label;
  std::size_t seq_len = 0;
  double clean_rmse = 0.0;
  std::array<std::optional<double>, kNumAttackCells> cells;

  /// Mean RMSE over the attack cells present; nullopt when there are none.
  std::optional<double> mean_attacked_rmse() const;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::optional<std::size_t> best_clean_row;      // lowest clean RMSE
  std::optional<std::size_t> most_resilient_row;  // lowest mean attacked RMSE
  std::string note;
};

struct StudyData {
  std::vector<cmapss::EngineTrajectory> train;
  TestSet test;
  cmapss::NormStats stats;
  cmapss::RulLabeling labeling;
  fdia::StealthBounds bounds;
};

using StudyProgress = std::function<void(const std::string& message)>;

/// Rows for already-trained models. Each attack dataset is generated once
/// and shared by every row, so the cells are paired across models.
StudyResult evaluate_study(std::span<const nn::ModelParams> models, const StudyData& data,
                           std::span<const fdia::AttackSpec> attack_matrix,
                           const StudyProgress& progress = {});

/// Trains every spec with the same TrainConfig, then evaluate_study.
StudyResult run_study(std::span<const nn::ModelSpec> specs, const StudyData& data,
                      std::span<const fdia::AttackSpec> attack_matrix,
                      const nn::TrainConfig& train_config, const StudyProgress& progress = {});

// ---------------------------------------------------------------------------
// Artifacts

/// Provenance written into every artifact.
struct ArtifactStamp {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version = RULFDIA_VERSION;
};

/// CSV files start with one `# key=value ...` provenance line.
void write_stamp_line(std::ostream& out, const ArtifactStamp& stamp);

/// engine_id,prediction,truth,abs_error
void write_report_csv(std::ostream& out, const EvaluationReport& report, const ArtifactStamp& stamp);
void write_report_json(std::ostream& out, const EvaluationReport& report, const ArtifactStamp& stamp);

/// cycle,true_rul,predicted_rul_clean,predicted_rul_attacked. Without an
/// attacked trace the last column is left empty.
void write_trace_csv(std::ostream& out, const PiecewiseTrace& clean, const PiecewiseTrace* attacked,
                     const ArtifactStamp& stamp);

/// config_label,seq_len,clean_rmse,continuous_random,continuous_biased,
/// interim_random,interim_biased. Missing cells are empty.
void write_study_csv(std::ostream& out, const StudyResult& result, const ArtifactStamp& stamp);
void write_study_json(std::ostream& out, const StudyResult& result, const ArtifactStamp& stamp);

}  // namespace rulfdia::eval
