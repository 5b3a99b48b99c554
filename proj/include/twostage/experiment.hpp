#pragma once

#include "twostage/config.hpp"
#include "twostage/report.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace twostage {

/// Rows of one experiment in both aggregations plus per-series detail.
struct ExperimentResult {
	std::string name;
	std::vector<ReportRow> macro;
	std::vector<ReportRow> pooled;
	std::vector<ReportRow> series;

	const std::vector<ReportRow>& rows(AggregationMode mode) const {
		return mode == AggregationMode::Macro ? macro : pooled;
	}
};

/// Two-Stage at (h, H) followed by each configured baseline at H = 0.
ExperimentResult run_compare(const ExperimentConfig& config, std::span<const TimeSeries> series);
/// BL and 2S rows for every h in the configured list.
ExperimentResult run_augment(const ExperimentConfig& config, std::span<const TimeSeries> series);
/// One Two-Stage row per H of the sweep list.
ExperimentResult run_sweep(const ExperimentConfig& config, std::span<const TimeSeries> series);

/// Writes <name>.csv (headline aggregation), <name>_<other>.csv,
/// <name>_series.csv, <name>.json and <name>.timing.json under out_dir.
std::vector<std::filesystem::path> write_result(const ExperimentConfig& config, const ExperimentResult& result);

/// Resolves and loads the configured data file.
std::vector<TimeSeries> load_data(const ExperimentConfig& config);

std::vector<std::filesystem::path> cmd_compare(const ExperimentConfig& config);
std::vector<std::filesystem::path> cmd_augment(const ExperimentConfig& config);
std::vector<std::filesystem::path> cmd_sweep(const ExperimentConfig& config);
/// Writes <out_dir>/synthetic.csv.
std::filesystem::path cmd_synth(const ExperimentConfig& config);

/// Trains at (h, H) on the training halves. Global scope saves
/// <out_dir>/model.tsp; per-series scope saves <out_dir>/<id>.tsp.
std::vector<std::filesystem::path> cmd_train(const ExperimentConfig& config);
/// Forecasts h points after the end of every series from its last L points.
/// `model` is a pair file or a directory of per-series files. Writes
/// <out_dir>/predictions.csv in the data-file row format.
std::filesystem::path cmd_predict(const ExperimentConfig& config, const std::filesystem::path& model,
                                  bool denormalize);
/// Scores saved models on the test halves; outputs as for write_result with
/// name "eval".
std::vector<std::filesystem::path> cmd_eval(const ExperimentConfig& config, const std::filesystem::path& model);

/// File name used for a per-series model.
std::string model_file_name(const std::string& series_id);

} // namespace twostage
