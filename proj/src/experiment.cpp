#include "twostage/experiment.hpp"

#include "twostage/errors.hpp"
#include "twostage/serialization.hpp"
#include "twostage/synthetic.hpp"

#include <chrono>
#include <cstdio>

namespace twostage {

namespace {

using Clock = std::chrono::steady_clock;

void add_rows(ExperimentResult& result, const std::string& label, std::size_t h, std::size_t future,
              std::vector<SeriesEvaluation> per_series, const ExperimentConfig& config, double seconds) {
	const auto& opts = config.run.protocol.metrics;
	ReportRow row;
	row.experiment = result.name;
	row.model = label;
	row.horizon = h;
	row.future = future;
	row.seed = config.run.master_seed;
	row.wall_seconds = seconds;
	row.metrics = aggregate(per_series, AggregationMode::Macro, opts);
	row.metrics.series_id = "aggregate";
	result.macro.push_back(row);
	row.metrics = aggregate(per_series, AggregationMode::Pooled, opts);
	row.metrics.series_id = "aggregate";
	result.pooled.push_back(row);
	for (auto& s : per_series) {
		ReportRow r = row;
		r.metrics = std::move(s.report);
		result.series.push_back(std::move(r));
	}
}

void timed(ExperimentResult& result, const std::string& label, std::size_t h, std::size_t future,
           std::span<const PreparedSeries> prepared, const RunConfig& run, const ExperimentConfig& config) {
	const auto start = Clock::now();
	auto evals = run_two_stage(prepared, h, future, run);
	const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
	add_rows(result, label, h, future, std::move(evals), config, seconds);
}

std::vector<PreparedSeries> prepare(const ExperimentConfig& config, std::span<const TimeSeries> series) {
	config.validate();
	return prepare_all(series, config.run.protocol, config.run.workers);
}

StagePair load_pair_for(const std::filesystem::path& model, const std::string& id) {
	if (std::filesystem::is_directory(model)) {
		return load_stage_pair(model / model_file_name(id));
	}
	return load_stage_pair(model);
}

} // namespace

std::string model_file_name(const std::string& series_id) {
	std::string name;
	for (char c : series_id) {
		const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
		                c == '_' || c == '.';
		name += ok ? c : '_';
	}
	if (name.empty() || name == "." || name == "..") {
		name = "_" + name;
	}
	return name + ".tsp";
}

ExperimentResult run_compare(const ExperimentConfig& config, std::span<const TimeSeries> series) {
	if (config.future == 0) {
		throw ConfigError("compare needs H >= 1 for the Two-Stage row");
	}
	const auto prepared = prepare(config, series);
	ExperimentResult result{"compare", {}, {}, {}};
	timed(result, "Two-Stage", config.horizon, config.future, prepared, config.run, config);
	for (ModelKind kind : config.compare_baselines) {
		RunConfig run = config.run;
		run.stage2.kind = kind;
		timed(result, std::string(model_label(kind)), config.horizon, 0, prepared, run, config);
	}
	return result;
}

ExperimentResult run_augment(const ExperimentConfig& config, std::span<const TimeSeries> series) {
	if (config.augment_baseline == ModelKind::PreviousPeriod) {
		throw ConfigError("augment baseline must be trainable");
	}
	const auto prepared = prepare(config, series);
	ExperimentResult result{"augment", {}, {}, {}};
	RunConfig run = config.run;
	run.stage2.kind = config.augment_baseline;
	for (std::size_t h : config.augment_horizons) {
		timed(result, "BL", h, 0, prepared, run, config);
		timed(result, "2S", h, config.augment_future.value_or(h), prepared, run, config);
	}
	return result;
}

ExperimentResult run_sweep(const ExperimentConfig& config, std::span<const TimeSeries> series) {
	if (config.future_sweep.empty()) {
		throw ConfigError("sweep needs at least one H value");
	}
	const auto prepared = prepare(config, series);
	ExperimentResult result{"sweep", {}, {}, {}};
	for (std::size_t future : config.future_sweep) {
		timed(result, "Two-Stage", config.horizon, future, prepared, config.run, config);
	}
	return result;
}

std::vector<std::filesystem::path> write_result(const ExperimentConfig& config, const ExperimentResult& result) {
	const auto& dir = config.out_dir;
	const AggregationMode other =
	    config.aggregation == AggregationMode::Macro ? AggregationMode::Pooled : AggregationMode::Macro;
	std::vector<std::filesystem::path> paths{
	    dir / (result.name + ".csv"),
	    dir / (result.name + "_" + std::string(aggregation_name(other)) + ".csv"),
	    dir / (result.name + "_series.csv"),
	    dir / (result.name + ".json"),
	    dir / (result.name + ".timing.json"),
	};
	write_text_file(paths[0], render_report_csv(result.rows(config.aggregation)));
	write_text_file(paths[1], render_report_csv(result.rows(other)));
	write_text_file(paths[2], render_series_csv(result.series));
	write_text_file(paths[3], render_report_json(result.name, render_config(config, false),
	                                             aggregation_name(config.aggregation), result.macro, result.pooled));
	write_text_file(paths[4], render_timing_json(result.macro));
	return paths;
}

std::vector<TimeSeries> load_data(const ExperimentConfig& config) {
	const auto path = resolve_data_path(config.data_path);
	if (!std::filesystem::exists(path)) {
		throw ConfigError("data file '" + path.string() + "' does not exist");
	}
	return load_series_csv(path);
}

std::vector<std::filesystem::path> cmd_compare(const ExperimentConfig& config) {
	return write_result(config, run_compare(config, load_data(config)));
}

std::vector<std::filesystem::path> cmd_augment(const ExperimentConfig& config) {
	return write_result(config, run_augment(config, load_data(config)));
}

std::vector<std::filesystem::path> cmd_sweep(const ExperimentConfig& config) {
	return write_result(config, run_sweep(config, load_data(config)));
}

std::filesystem::path cmd_synth(const ExperimentConfig& config) {
	const auto result = generate_synthetic(config.synth);
	std::filesystem::create_directories(config.out_dir);
	const auto path = config.out_dir / "synthetic.csv";
	write_series_csv(path, result.series);
	return path;
}

std::vector<std::filesystem::path> cmd_train(const ExperimentConfig& config) {
	const auto series = load_data(config);
	const auto prepared = prepare(config, series);
	std::filesystem::create_directories(config.out_dir);
	std::vector<std::filesystem::path> paths;
	const bool per_series =
	    config.run.scope == TrainingScope::PerSeries || config.run.stage2.kind == ModelKind::PreviousPeriod;
	if (!per_series) {
		const auto pair = train_pair(prepared, config.horizon, config.future, config.run);
		paths.push_back(config.out_dir / "model.tsp");
		save_stage_pair(paths.back(), pair);
		return paths;
	}
	RunConfig run = config.run;
	run.scope = TrainingScope::PerSeries;
	for (std::size_t i = 0; i < prepared.size(); ++i) {
		const auto pair = train_pair(std::span(prepared).subspan(i, 1), config.horizon, config.future, run);
		paths.push_back(config.out_dir / model_file_name(prepared[i].id));
		save_stage_pair(paths.back(), pair);
	}
	return paths;
}

std::filesystem::path cmd_predict(const ExperimentConfig& config, const std::filesystem::path& model,
                                  bool denormalize) {
	const auto series = load_data(config);
	std::string text;
	for (const auto& s : series) {
		const StagePair pair = load_pair_for(model, s.id());
		const std::size_t L = pair.spec.history;
		if (s.size() < L) {
			throw InsufficientDataError("series '" + s.id() + "' is shorter than the model window");
		}
		const NormStats stats = compute_norm_stats(split_half(s).first.values());
		Vector history(static_cast<Eigen::Index>(L));
		for (std::size_t i = 0; i < L; ++i) {
			history[static_cast<Eigen::Index>(i)] = stats.apply(s.values()[s.size() - L + i]);
		}
		const Vector out = predict(pair, history);
		std::vector<double> values(out.begin(), out.end());
		if (denormalize) {
			for (double& v : values) {
				v = stats.invert(v);
			}
		}
		std::string line = s.id();
		char buf[40];
		for (double v : values) {
			std::snprintf(buf, sizeof(buf), ",%.17g", v);
			line += buf;
		}
		text += line + "\n";
	}
	const auto path = config.out_dir / "predictions.csv";
	write_text_file(path, text);
	return path;
}

std::vector<std::filesystem::path> cmd_eval(const ExperimentConfig& config, const std::filesystem::path& model) {
	config.validate();
	const auto series = load_data(config);
	ExperimentResult result{"eval", {}, {}, {}};
	std::vector<SeriesEvaluation> evals;
	std::optional<HorizonSpec> spec;
	for (const auto& s : series) {
		const StagePair pair = load_pair_for(model, s.id());
		if (spec && !(*spec == pair.spec)) {
			throw ConfigError("saved models disagree on window lengths");
		}
		spec = pair.spec;
		ProtocolConfig protocol = config.run.protocol;
		protocol.history = pair.spec.history;
		evals.push_back(evaluate_pair(pair, prepare_series(s, protocol), protocol.metrics));
	}
	add_rows(result, "Two-Stage", spec->horizon, spec->future, std::move(evals), config, 0.0);
	return write_result(config, result);
}

} // namespace twostage
