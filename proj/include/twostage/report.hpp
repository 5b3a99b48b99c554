#pragma once

#include "twostage/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace twostage {

/// One aggregate line of a report.
struct ReportRow {
	std::string experiment;
	std::string model;
	std::size_t horizon = 0;
	std::size_t future = 0;
	EvalReport metrics;
	std::uint64_t seed = 0;
	/// Kept out of the CSV so reruns stay byte-identical.
	double wall_seconds = 0.0;
};

/// Model labels allowed in reports.
inline constexpr std::string_view kReportLabels[] = {"Two-Stage", "MLP+MAR", "MLP", "MAR", "Previous Period",
                                                     "BL",        "2S"};
bool is_report_label(std::string_view label);

/// Exact header of aggregate reports.
inline constexpr std::string_view kReportHeader =
    "experiment,model,h,H,mape,mape95,rmspe,rmspe95,rmse,rmse95,mae,mae95,s1_mse,seed";
/// Per-series reports insert a series column after H.
inline constexpr std::string_view kSeriesReportHeader =
    "experiment,model,h,H,series,mape,mape95,rmspe,rmspe95,rmse,rmse95,mae,mae95,s1_mse,seed";

/// Shortest "%.9g"-style rendering used in every report cell.
std::string format_value(double v);

/// Throws ParameterError on an unknown label or a negative metric.
std::string render_report_csv(std::span<const ReportRow> rows);

/// Rows whose metrics carry per-series ids.
std::string render_series_csv(std::span<const ReportRow> rows);

/// Structured sidecar: config echo plus both aggregations.
std::string render_report_json(std::string_view experiment, std::string_view config_text,
                               std::string_view headline, std::span<const ReportRow> macro,
                               std::span<const ReportRow> pooled);

std::string render_timing_json(std::span<const ReportRow> rows);

/// Writes the file atomically enough for our purposes (temp file + rename).
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace twostage
