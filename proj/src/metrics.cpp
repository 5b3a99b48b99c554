#include "twostage/metrics.hpp"

#include "twostage/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace twostage {

namespace {

bool is_relative(MetricKind kind) {
	return kind == MetricKind::Mape || kind == MetricKind::Rmspe;
}

bool eligible(MetricKind kind, const PointRecord& p, const MetricOptions& options) {
	return !is_relative(kind) || std::abs(p.actual) >= options.zero_guard;
}

double term(MetricKind kind, const PointRecord& p) {
	const double e = std::abs(p.actual - p.predicted);
	switch (kind) {
		case MetricKind::Mape:
			return e / std::abs(p.actual);
		case MetricKind::Rmspe: {
			// square the MAPE ratio itself so RMSPE >= MAPE survives rounding
			const double r = e / std::abs(p.actual);
			return r * r;
		}
		case MetricKind::Rmse:
			return e * e;
		case MetricKind::Mae:
			return e;
	}
	return 0.0;
}

std::size_t drop_count(std::size_t n, double keep_fraction) {
	if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
		throw ParameterError("keep fraction must lie in (0, 1]");
	}
	// The epsilon absorbs representation error in (1 - keep) * n, e.g. 0.05 * 20.
	return static_cast<std::size_t>(std::floor((1.0 - keep_fraction) * static_cast<double>(n) + 1e-9));
}

} // namespace

std::string_view metric_name(MetricKind kind) {
	switch (kind) {
		case MetricKind::Mape:
			return "MAPE";
		case MetricKind::Rmspe:
			return "RMSPE";
		case MetricKind::Rmse:
			return "RMSE";
		case MetricKind::Mae:
			return "MAE";
	}
	return "?";
}

double finalize_metric(MetricKind kind, std::span<const double> terms) {
	if (terms.empty()) {
		throw UndefinedMetricError(std::string(metric_name(kind)) + " undefined: no eligible points");
	}
	const double mean = std::accumulate(terms.begin(), terms.end(), 0.0) / static_cast<double>(terms.size());
	return (kind == MetricKind::Rmspe || kind == MetricKind::Rmse) ? std::sqrt(mean) : mean;
}

std::vector<double> surviving_terms(MetricKind kind, const PointErrors& errs, double keep_fraction,
                                    const MetricOptions& options) {
	std::vector<const PointRecord*> points;
	points.reserve(errs.size());
	for (const auto& p : errs.points) {
		if (eligible(kind, p, options)) {
			points.push_back(&p);
		}
	}
	const std::size_t drop = drop_count(points.size(), keep_fraction);
	if (drop > 0) {
		// Stable ordering keeps ties deterministic: earlier points survive.
		if (options.trim_rule == TrimRule::PerMetric) {
			std::stable_sort(points.begin(), points.end(), [kind](const PointRecord* a, const PointRecord* b) {
				return term(kind, *a) < term(kind, *b);
			});
		} else {
			std::stable_sort(points.begin(), points.end(), [](const PointRecord* a, const PointRecord* b) {
				return std::abs(a->actual - a->predicted) < std::abs(b->actual - b->predicted);
			});
		}
		points.resize(points.size() - drop);
		std::sort(points.begin(), points.end(), [](const PointRecord* a, const PointRecord* b) { return a < b; });
	}
	std::vector<double> terms;
	terms.reserve(points.size());
	for (const PointRecord* p : points) {
		terms.push_back(term(kind, *p));
	}
	return terms;
}

double metric(MetricKind kind, const PointErrors& errs, const MetricOptions& options) {
	return finalize_metric(kind, surviving_terms(kind, errs, 1.0, options));
}

double mape(const PointErrors& errs, const MetricOptions& options) {
	return metric(MetricKind::Mape, errs, options);
}

double rmspe(const PointErrors& errs, const MetricOptions& options) {
	return metric(MetricKind::Rmspe, errs, options);
}

double rmse(const PointErrors& errs) {
	return metric(MetricKind::Rmse, errs);
}

double mae(const PointErrors& errs) {
	return metric(MetricKind::Mae, errs);
}

double trimmed(MetricKind kind, const PointErrors& errs, double keep_fraction, const MetricOptions& options) {
	return finalize_metric(kind, surviving_terms(kind, errs, keep_fraction, options));
}

std::vector<double> EvalReport::values() const {
	return {mape, mape95, rmspe, rmspe95, rmse, rmse95, mae, mae95};
}

std::optional<double> Stage1Errors::mse() const {
	if (count == 0) {
		return std::nullopt;
	}
	return sum_squared / static_cast<double>(count);
}

EvalReport evaluate(const PointErrors& errs, const MetricOptions& options, std::string series_id,
                    std::optional<Stage1Errors> stage1) {
	EvalReport r;
	r.series_id = std::move(series_id);
	const double keep = options.keep_fraction;
	r.mape = metric(MetricKind::Mape, errs, options);
	r.mape95 = trimmed(MetricKind::Mape, errs, keep, options);
	r.rmspe = metric(MetricKind::Rmspe, errs, options);
	r.rmspe95 = trimmed(MetricKind::Rmspe, errs, keep, options);
	r.rmse = metric(MetricKind::Rmse, errs, options);
	r.rmse95 = trimmed(MetricKind::Rmse, errs, keep, options);
	r.mae = metric(MetricKind::Mae, errs, options);
	r.mae95 = trimmed(MetricKind::Mae, errs, keep, options);
	if (stage1) {
		r.s1_mse = stage1->mse();
	}
	return r;
}

SeriesEvaluation evaluate_series(PointErrors errs, const MetricOptions& options, std::string series_id,
                                 std::optional<Stage1Errors> stage1) {
	SeriesEvaluation out;
	out.report = evaluate(errs, options, std::move(series_id), stage1);
	out.errors = std::move(errs);
	out.stage1 = stage1;
	return out;
}

std::string_view aggregation_name(AggregationMode mode) {
	return mode == AggregationMode::Macro ? "macro" : "pooled";
}

EvalReport aggregate(std::span<const SeriesEvaluation> series, AggregationMode mode, const MetricOptions& options) {
	if (series.empty()) {
		throw EmptyInputError("cannot aggregate zero series");
	}
	EvalReport out;
	out.series_id = "aggregate";
	const bool all_s1 = std::all_of(series.begin(), series.end(), [](const SeriesEvaluation& s) {
		return s.stage1 && s.stage1->count > 0;
	});

	if (mode == AggregationMode::Macro) {
		const double n = static_cast<double>(series.size());
		double s1 = 0.0;
		for (const auto& s : series) {
			const auto& r = s.report;
			out.mape += r.mape;
			out.mape95 += r.mape95;
			out.rmspe += r.rmspe;
			out.rmspe95 += r.rmspe95;
			out.rmse += r.rmse;
			out.rmse95 += r.rmse95;
			out.mae += r.mae;
			out.mae95 += r.mae95;
			if (all_s1) {
				s1 += *s.stage1->mse();
			}
		}
		out.mape /= n;
		out.mape95 /= n;
		out.rmspe /= n;
		out.rmspe95 /= n;
		out.rmse /= n;
		out.rmse95 /= n;
		out.mae /= n;
		out.mae95 /= n;
		if (all_s1) {
			out.s1_mse = s1 / n;
		}
		return out;
	}

	auto pooled = [&](MetricKind kind, double keep) {
		std::vector<double> terms;
		for (const auto& s : series) {
			const auto t = surviving_terms(kind, s.errors, keep, options);
			terms.insert(terms.end(), t.begin(), t.end());
		}
		return finalize_metric(kind, terms);
	};
	const double keep = options.keep_fraction;
	out.mape = pooled(MetricKind::Mape, 1.0);
	out.mape95 = pooled(MetricKind::Mape, keep);
	out.rmspe = pooled(MetricKind::Rmspe, 1.0);
	out.rmspe95 = pooled(MetricKind::Rmspe, keep);
	out.rmse = pooled(MetricKind::Rmse, 1.0);
	out.rmse95 = pooled(MetricKind::Rmse, keep);
	out.mae = pooled(MetricKind::Mae, 1.0);
	out.mae95 = pooled(MetricKind::Mae, keep);
	if (all_s1) {
		Stage1Errors total;
		for (const auto& s : series) {
			total.sum_squared += s.stage1->sum_squared;
			total.count += s.stage1->count;
		}
		out.s1_mse = total.mse();
	}
	return out;
}

} // namespace twostage
