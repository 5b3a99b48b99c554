#pragma once

#include "twostage/metrics.hpp"
#include "twostage/models.hpp"
#include "twostage/series_data.hpp"
#include "twostage/training.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace twostage {

/// Architecture plus optimizer settings for one stage.
struct StageSettings {
	ModelKind kind = ModelKind::HybridMlpMar;
	ModelOptions options;
	TrainConfig train;
};

/// Stage 1 maps history -> future horizon; Stage 2 maps history ++ future
/// horizon -> forecast horizon. With spec.future == 0 there is no Stage 1
/// and Stage 2 is the plain baseline on history alone.
struct StagePair {
	std::optional<Model> stage1;
	Model stage2;
	HorizonSpec spec;
	std::optional<double> stage1_eval_mse;
};

// ---- sample matrices (one sample per column) -------------------------------

Matrix history_matrix(const SampleSet& set);
Matrix target_matrix(const SampleSet& set);
Matrix future_matrix(const SampleSet& set);
/// History rows first, then the true future-horizon rows.
Matrix stage2_inputs(const SampleSet& set);

// ---- training --------------------------------------------------------------

/// Trains history -> future. Throws Stage1DisabledError when H = 0 and
/// InsufficientDataError on an empty set.
Model train_stage1(const SampleSet& train_set, const StageSettings& settings, std::uint64_t init_seed);

/// Squared error of Stage 1 over the future horizons of `eval_set`.
Stage1Errors stage1_errors(const Model& stage1, const SampleSet& eval_set);

/// Trains (history ++ true future) -> forecast horizon. Never sees Stage-1
/// output. `observer` receives every minibatch input.
Model train_stage2(const SampleSet& train_set, const StageSettings& settings, std::uint64_t init_seed,
                   const BatchObserver& observer = {});

/// f2(x_his ++ f1(x_his)) in Eval mode; f2(x_his) when H = 0.
/// Throws ShapeError when the history length is not L.
Vector predict(const StagePair& pair, const Vector& history);
Matrix predict(const StagePair& pair, const Matrix& histories);

struct StageSeeds {
	std::uint64_t stage1_init = 0;
	std::uint64_t stage2_init = 0;
};

/// Trains both stages (Stage 1 only when H > 0) and, when `eval_set` is
/// given, records the Stage-1 evaluation MSE. `stage1.train.seed` and
/// `stage2.train.seed` drive shuffling and dropout.
StagePair train_two_stage(const SampleSet& train_set, const SampleSet* eval_set, const StageSettings& stage1,
                          const StageSettings& stage2, const StageSeeds& seeds);

/// Puts a Stage-1 model of `stage1_kind` in front of a `baseline_kind`
/// Stage 2 widened to L + H inputs. Throws Stage1DisabledError when H = 0.
StagePair augment_baseline(ModelKind baseline_kind, ModelKind stage1_kind, const SampleSet& train_set,
                           const SampleSet* eval_set, StageSettings stage1, StageSettings stage2,
                           const StageSeeds& seeds);

// ---- per-series evaluation protocol ----------------------------------------

struct ProtocolConfig {
	/// L; unset means 2 * T.
	std::optional<std::size_t> history;
	/// Fixed T overriding both the series' own period and estimation.
	std::optional<std::size_t> period;
	/// Estimate T from the training half when it is not otherwise known.
	bool period_auto = false;
	std::size_t default_period = 24;
	std::size_t max_lag = 200;
	std::size_t train_stride = 1;
	MetricOptions metrics;
};

/// One series after split and normalization with training-half statistics.
struct PreparedSeries {
	std::string id;
	std::vector<double> train;   // normalized training half
	std::vector<double> context; // last L training points ++ normalized test half
	std::size_t test_size = 0;
	std::size_t period = 0;
	std::size_t history = 0;
	NormStats stats;
};

std::size_t resolve_period(const TimeSeries& normalized_train, const ProtocolConfig& config);
PreparedSeries prepare_series(const TimeSeries& series, const ProtocolConfig& config);

/// Training windows from the training half (stride from config).
SampleSet training_windows(const PreparedSeries& prepared, const HorizonSpec& spec, std::size_t stride);
/// Evaluation windows: anchors step by h through the context so forecast
/// horizons tile the test half.
SampleSet evaluation_windows(const PreparedSeries& prepared, const HorizonSpec& spec);

/// Maps a batch of histories (L x N) to forecasts (h x N).
using Forecaster = std::function<Matrix(const Matrix&)>;

/// Forecast errors over the tiled test half; t is the index within it.
PointErrors forecast_errors(const Forecaster& forecaster, const PreparedSeries& prepared, std::size_t horizon);

/// Seed for a (series, stage, H, purpose) tuple: derive_seed(master,
/// {fnv1a(series id), stage, H, purpose}). Stage 1 uses stage = 1, every
/// Stage-2 or baseline model uses stage = 2; purpose 0 = init, 1 = training.
/// Globally trained models use the id kGlobalSeriesId.
std::uint64_t task_seed(std::uint64_t master, const std::string& series_id, std::uint64_t stage,
                        std::uint64_t future, std::uint64_t purpose);

inline constexpr const char* kGlobalSeriesId = "<global>";

enum class TrainingScope {
	/// One StagePair trained on the windows of every series.
	Global,
	/// One StagePair per series.
	PerSeries,
};

struct RunConfig {
	StageSettings stage1;
	StageSettings stage2;
	ProtocolConfig protocol;
	TrainingScope scope = TrainingScope::Global;
	std::uint64_t master_seed = 0;
	std::size_t workers = 0;
};

/// Training windows of every series, concatenated in input order. Throws
/// ConfigError when the series disagree on the history length.
SampleSet pooled_training_windows(std::span<const PreparedSeries> prepared, const HorizonSpec& spec,
                                  std::size_t stride);

/// Trains a StagePair (Stage 1 only when H > 0) for one series, or for all
/// of them under the global scope.
StagePair train_pair(std::span<const PreparedSeries> prepared, std::size_t horizon, std::size_t future,
                     const RunConfig& config);

/// Forecast errors and Stage-1 errors of a trained pair on one series.
SeriesEvaluation evaluate_pair(const StagePair& pair, const PreparedSeries& prepared, const MetricOptions& options);

/// Trains per the configured scope and evaluates every series, results in
/// input order. Non-trainable Stage-2 kinds (Previous Period) are always
/// built per series.
std::vector<SeriesEvaluation> run_two_stage(std::span<const PreparedSeries> prepared, std::size_t horizon,
                                            std::size_t future, const RunConfig& config);

/// Splits and normalizes every series (in parallel, results in input order).
std::vector<PreparedSeries> prepare_all(std::span<const TimeSeries> series, const ProtocolConfig& config,
                                        std::size_t workers);

struct SweepRow {
	std::size_t future = 0;
	EvalReport macro;
	EvalReport pooled;
	std::vector<SeriesEvaluation> per_series;
};

SweepRow summarize(std::size_t future, std::vector<SeriesEvaluation> per_series, const MetricOptions& options);

/// One row per H, each from freshly trained models. Throws ConfigError on an
/// empty H list.
std::vector<SweepRow> sweep_future_horizon(std::span<const TimeSeries> series, std::size_t horizon,
                                           std::span<const std::size_t> future_values, const RunConfig& config);

} // namespace twostage
