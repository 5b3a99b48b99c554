#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace twostage {

struct PointRecord {
	std::size_t t = 0;
	double actual = 0.0;
	double predicted = 0.0;
};

/// Forecast/actual pairs over one evaluation span.
struct PointErrors {
	std::vector<PointRecord> points;

	void add(std::size_t t, double actual, double predicted) { points.push_back({t, actual, predicted}); }
	std::size_t size() const { return points.size(); }
	bool empty() const { return points.empty(); }
};

enum class MetricKind { Mape, Rmspe, Rmse, Mae };

/// Which points the "-95" trim removes.
enum class TrimRule {
	/// Drop the largest per-point terms of the metric being trimmed.
	PerMetric,
	/// Drop the points with the largest absolute error, for every metric.
	AbsoluteError,
};

enum class AggregationMode { Macro, Pooled };

struct MetricOptions {
	/// Points with |actual| below this are excluded from MAPE and RMSPE.
	double zero_guard = 1e-8;
	double keep_fraction = 0.95;
	TrimRule trim_rule = TrimRule::PerMetric;
};

std::string_view metric_name(MetricKind kind);

double mape(const PointErrors& errs, const MetricOptions& options = {});
double rmspe(const PointErrors& errs, const MetricOptions& options = {});
double rmse(const PointErrors& errs);
double mae(const PointErrors& errs);

double metric(MetricKind kind, const PointErrors& errs, const MetricOptions& options = {});

/// The metric recomputed after removing floor((1 - keep_fraction) * n)
/// points, n being the number of points eligible for that metric. Throws
/// ParameterError unless keep_fraction lies in (0, 1] and
/// UndefinedMetricError when nothing survives.
double trimmed(MetricKind kind, const PointErrors& errs, double keep_fraction, const MetricOptions& options = {});

/// Per-point terms that survive the trim (|e|/|x|, e^2/x^2, e^2 or |e|).
/// keep_fraction = 1 returns every eligible term.
std::vector<double> surviving_terms(MetricKind kind, const PointErrors& errs, double keep_fraction,
                                    const MetricOptions& options);

/// Mean of terms, square-rooted for the root-mean metrics. Throws
/// UndefinedMetricError on an empty span.
double finalize_metric(MetricKind kind, std::span<const double> terms);

struct EvalReport {
	std::string series_id;
	double mape = 0.0;
	double mape95 = 0.0;
	double rmspe = 0.0;
	double rmspe95 = 0.0;
	double rmse = 0.0;
	double rmse95 = 0.0;
	double mae = 0.0;
	double mae95 = 0.0;
	std::optional<double> s1_mse;

	/// Values in column order: mape, mape95, rmspe, rmspe95, rmse, rmse95, mae, mae95.
	std::vector<double> values() const;
};

/// Stage-1 squared-error accumulator for one series.
struct Stage1Errors {
	double sum_squared = 0.0;
	std::size_t count = 0;

	std::optional<double> mse() const;
};

struct SeriesEvaluation {
	EvalReport report;
	PointErrors errors;
	std::optional<Stage1Errors> stage1;
};

/// All eight metrics for one series.
EvalReport evaluate(const PointErrors& errs, const MetricOptions& options = {}, std::string series_id = {},
                    std::optional<Stage1Errors> stage1 = std::nullopt);
SeriesEvaluation evaluate_series(PointErrors errs, const MetricOptions& options, std::string series_id,
                                 std::optional<Stage1Errors> stage1 = std::nullopt);

/// Macro: unweighted mean of per-series values. Pooled: metrics recomputed
/// over every series' surviving terms (trimming stays per series). S1 MSE is
/// reported only when every series carries it. Throws EmptyInputError.
EvalReport aggregate(std::span<const SeriesEvaluation> series, AggregationMode mode,
                     const MetricOptions& options = {});

std::string_view aggregation_name(AggregationMode mode);

} // namespace twostage
