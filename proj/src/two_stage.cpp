#include "twostage/two_stage.hpp"

#include "twostage/errors.hpp"
#include "twostage/parallel.hpp"
#include "twostage/periodicity.hpp"

#include <algorithm>

namespace twostage {

namespace {

Matrix stack_columns(const SampleSet& set, std::size_t rows, auto&& fill) {
	Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(set.size()));
	for (std::size_t c = 0; c < set.size(); ++c) {
		fill(set.samples[c], m.col(static_cast<Eigen::Index>(c)));
	}
	return m;
}

template <class Col>
void copy_into(const std::vector<double>& src, Col&& col, std::size_t offset) {
	for (std::size_t i = 0; i < src.size(); ++i) {
		col(static_cast<Eigen::Index>(offset + i)) = src[i];
	}
}

void require_samples(const SampleSet& set, const char* stage) {
	if (set.empty()) {
		throw InsufficientDataError(std::string(stage) + ": training set is empty");
	}
}

Model fit(ModelKind kind, const Matrix& inputs, const Matrix& targets, const StageSettings& settings,
          std::uint64_t init_seed, const BatchObserver& observer = {}) {
	Model model = make_model(kind, static_cast<std::size_t>(inputs.rows()), static_cast<std::size_t>(targets.rows()),
	                         settings.options, init_seed);
	if (model.trainable()) {
		train_loop(model, inputs, targets, settings.train, observer);
	}
	return model;
}

} // namespace

Matrix history_matrix(const SampleSet& set) {
	return stack_columns(set, set.spec.history, [](const WindowSample& s, auto col) { copy_into(s.history, col, 0); });
}

Matrix target_matrix(const SampleSet& set) {
	return stack_columns(set, set.spec.horizon, [](const WindowSample& s, auto col) { copy_into(s.target, col, 0); });
}

Matrix future_matrix(const SampleSet& set) {
	return stack_columns(set, set.spec.future, [](const WindowSample& s, auto col) { copy_into(s.future, col, 0); });
}

Matrix stage2_inputs(const SampleSet& set) {
	const std::size_t l = set.spec.history;
	return stack_columns(set, l + set.spec.future, [l](const WindowSample& s, auto col) {
		copy_into(s.history, col, 0);
		copy_into(s.future, col, l);
	});
}

Model train_stage1(const SampleSet& train_set, const StageSettings& settings, std::uint64_t init_seed) {
	if (train_set.spec.future == 0) {
		throw Stage1DisabledError("Stage 1 needs a future horizon H >= 1");
	}
	require_samples(train_set, "Stage 1");
	return fit(settings.kind, history_matrix(train_set), future_matrix(train_set), settings, init_seed);
}

Stage1Errors stage1_errors(const Model& stage1, const SampleSet& eval_set) {
	if (eval_set.spec.future == 0) {
		throw Stage1DisabledError("Stage-1 evaluation needs a future horizon H >= 1");
	}
	Stage1Errors out;
	if (eval_set.empty()) {
		return out;
	}
	const Matrix pred = stage1.forward(history_matrix(eval_set), nn::Mode::eval());
	const Matrix truth = future_matrix(eval_set);
	out.sum_squared = (pred - truth).squaredNorm();
	out.count = static_cast<std::size_t>(truth.size());
	return out;
}

Model train_stage2(const SampleSet& train_set, const StageSettings& settings, std::uint64_t init_seed,
                   const BatchObserver& observer) {
	require_samples(train_set, "Stage 2");
	return fit(settings.kind, stage2_inputs(train_set), target_matrix(train_set), settings, init_seed, observer);
}

Matrix predict(const StagePair& pair, const Matrix& histories) {
	const std::size_t l = pair.spec.history;
	require_same_size(static_cast<std::size_t>(histories.rows()), l, "history length");
	if (!pair.stage1) {
		return pair.stage2.forward(histories, nn::Mode::eval());
	}
	const Matrix future = pair.stage1->forward(histories, nn::Mode::eval());
	Matrix joined(static_cast<Eigen::Index>(l + pair.spec.future), histories.cols());
	joined.topRows(static_cast<Eigen::Index>(l)) = histories;
	joined.bottomRows(static_cast<Eigen::Index>(pair.spec.future)) = future;
	return pair.stage2.forward(joined, nn::Mode::eval());
}

Vector predict(const StagePair& pair, const Vector& history) {
	require_same_size(static_cast<std::size_t>(history.size()), pair.spec.history, "history length");
	return Vector(predict(pair, Matrix(history)).col(0));
}

StagePair train_two_stage(const SampleSet& train_set, const SampleSet* eval_set, const StageSettings& stage1,
                          const StageSettings& stage2, const StageSeeds& seeds) {
	const HorizonSpec& spec = train_set.spec;
	spec.validate();
	std::optional<Model> f1;
	std::optional<double> s1_mse;
	if (spec.future > 0) {
		f1 = train_stage1(train_set, stage1, seeds.stage1_init);
		if (eval_set) {
			s1_mse = stage1_errors(*f1, *eval_set).mse();
		}
	}
	Model f2 = train_stage2(train_set, stage2, seeds.stage2_init);
	return StagePair{std::move(f1), std::move(f2), spec, s1_mse};
}

StagePair augment_baseline(ModelKind baseline_kind, ModelKind stage1_kind, const SampleSet& train_set,
                           const SampleSet* eval_set, StageSettings stage1, StageSettings stage2,
                           const StageSeeds& seeds) {
	if (train_set.spec.future == 0) {
		throw Stage1DisabledError("augmentation needs a future horizon H >= 1");
	}
	stage1.kind = stage1_kind;
	stage2.kind = baseline_kind;
	return train_two_stage(train_set, eval_set, stage1, stage2, seeds);
}

std::size_t resolve_period(const TimeSeries& normalized_train, const ProtocolConfig& config) {
	if (config.period) {
		return *config.period;
	}
	if (normalized_train.period()) {
		return *normalized_train.period();
	}
	if (config.period_auto) {
		const std::size_t max_lag = std::min(config.max_lag, normalized_train.size() / 2);
		if (max_lag >= 2) {
			try {
				return shortest_period(estimate_periods(normalized_train, max_lag));
			} catch (const NoPeriodError&) {
				return config.default_period;
			}
		}
	}
	return config.default_period;
}

PreparedSeries prepare_series(const TimeSeries& series, const ProtocolConfig& config) {
	auto [train_raw, test_raw] = split_half(series);
	PreparedSeries p;
	p.id = series.id();
	p.stats = compute_norm_stats(train_raw.values());
	const TimeSeries train = apply_norm(train_raw, p.stats);
	const TimeSeries test = apply_norm(test_raw, p.stats);
	p.period = resolve_period(train, config);
	p.history = config.history.value_or(2 * p.period);
	if (p.history == 0) {
		throw ConfigError("history window length must be positive");
	}
	if (train.size() < p.history) {
		throw InsufficientDataError("series '" + p.id + "': training half shorter than the history window");
	}
	p.train = train.values();
	p.test_size = test.size();
	p.context.assign(p.train.end() - static_cast<std::ptrdiff_t>(p.history), p.train.end());
	p.context.insert(p.context.end(), test.values().begin(), test.values().end());
	return p;
}

SampleSet training_windows(const PreparedSeries& prepared, const HorizonSpec& spec, std::size_t stride) {
	return build_windows(TimeSeries(prepared.id, prepared.train), spec, stride);
}

SampleSet evaluation_windows(const PreparedSeries& prepared, const HorizonSpec& spec) {
	require_same_size(spec.history, prepared.history, "evaluation history length");
	return build_windows(TimeSeries(prepared.id, prepared.context), spec, spec.horizon);
}

PointErrors forecast_errors(const Forecaster& forecaster, const PreparedSeries& prepared, std::size_t horizon) {
	const HorizonSpec spec{prepared.history, horizon, 0};
	const SampleSet windows = evaluation_windows(prepared, spec);
	const Matrix pred = forecaster(history_matrix(windows));
	if (static_cast<std::size_t>(pred.rows()) != horizon || static_cast<std::size_t>(pred.cols()) != windows.size()) {
		throw ShapeError("forecaster returned a batch of the wrong shape");
	}
	PointErrors errs;
	for (std::size_t c = 0; c < windows.size(); ++c) {
		const auto& s = windows.samples[c];
		for (std::size_t k = 0; k < horizon; ++k) {
			const std::size_t t = s.anchor + 1 + k - prepared.history;
			errs.add(t, s.target[k], pred(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)));
		}
	}
	return errs;
}

std::uint64_t task_seed(std::uint64_t master, const std::string& series_id, std::uint64_t stage,
                        std::uint64_t future, std::uint64_t purpose) {
	return derive_seed(master, {fnv1a64(series_id), stage, future, purpose});
}

SampleSet pooled_training_windows(std::span<const PreparedSeries> prepared, const HorizonSpec& spec,
                                  std::size_t stride) {
	SampleSet pooled;
	pooled.spec = spec;
	pooled.source_id = kGlobalSeriesId;
	for (const auto& p : prepared) {
		if (p.history != spec.history) {
			throw ConfigError("global training needs a common history length; series '" + p.id + "' uses " +
			                  std::to_string(p.history) + ", expected " + std::to_string(spec.history) +
			                  " (fix the window or the period in the configuration)");
		}
		SampleSet w = training_windows(p, spec, stride);
		pooled.samples.insert(pooled.samples.end(), std::make_move_iterator(w.samples.begin()),
		                      std::make_move_iterator(w.samples.end()));
	}
	return pooled;
}

StagePair train_pair(std::span<const PreparedSeries> prepared, std::size_t horizon, std::size_t future,
                     const RunConfig& config) {
	if (prepared.empty()) {
		throw EmptyInputError("no series to train on");
	}
	const bool single = prepared.size() == 1;
	const std::string id = single && config.scope == TrainingScope::PerSeries ? prepared.front().id
	                                                                           : std::string(kGlobalSeriesId);
	const HorizonSpec spec{prepared.front().history, horizon, future};
	const SampleSet train = single ? training_windows(prepared.front(), spec, config.protocol.train_stride)
	                               : pooled_training_windows(prepared, spec, config.protocol.train_stride);
	StageSettings s1 = config.stage1;
	StageSettings s2 = config.stage2;
	s1.options.period = prepared.front().period;
	s2.options.period = prepared.front().period;
	s1.train.seed = task_seed(config.master_seed, id, 1, future, 1);
	s2.train.seed = task_seed(config.master_seed, id, 2, future, 1);
	const StageSeeds seeds{task_seed(config.master_seed, id, 1, future, 0),
	                       task_seed(config.master_seed, id, 2, future, 0)};
	return train_two_stage(train, nullptr, s1, s2, seeds);
}

SeriesEvaluation evaluate_pair(const StagePair& pair, const PreparedSeries& prepared, const MetricOptions& options) {
	PointErrors errs =
	    forecast_errors([&pair](const Matrix& x) { return predict(pair, x); }, prepared, pair.spec.horizon);
	std::optional<Stage1Errors> s1;
	if (pair.stage1) {
		s1 = stage1_errors(*pair.stage1, evaluation_windows(prepared, pair.spec));
	}
	return evaluate_series(std::move(errs), options, prepared.id, s1);
}

std::vector<SeriesEvaluation> run_two_stage(std::span<const PreparedSeries> prepared, std::size_t horizon,
                                            std::size_t future, const RunConfig& config) {
	std::vector<SeriesEvaluation> out(prepared.size());
	const bool per_series = config.scope == TrainingScope::PerSeries ||
	                        config.stage2.kind == ModelKind::PreviousPeriod;
	if (per_series) {
		parallel_for(prepared.size(), config.workers, [&](std::size_t i) {
			RunConfig local = config;
			local.scope = TrainingScope::PerSeries;
			const StagePair pair = train_pair(prepared.subspan(i, 1), horizon, future, local);
			out[i] = evaluate_pair(pair, prepared[i], config.protocol.metrics);
		});
		return out;
	}
	const StagePair pair = train_pair(prepared, horizon, future, config);
	parallel_for(prepared.size(), config.workers,
	             [&](std::size_t i) { out[i] = evaluate_pair(pair, prepared[i], config.protocol.metrics); });
	return out;
}

std::vector<PreparedSeries> prepare_all(std::span<const TimeSeries> series, const ProtocolConfig& config,
                                        std::size_t workers) {
	if (series.empty()) {
		throw EmptyInputError("no series given");
	}
	std::vector<PreparedSeries> prepared(series.size());
	parallel_for(series.size(), workers, [&](std::size_t i) { prepared[i] = prepare_series(series[i], config); });
	return prepared;
}

SweepRow summarize(std::size_t future, std::vector<SeriesEvaluation> per_series, const MetricOptions& options) {
	SweepRow row;
	row.future = future;
	row.per_series = std::move(per_series);
	row.macro = aggregate(row.per_series, AggregationMode::Macro, options);
	row.pooled = aggregate(row.per_series, AggregationMode::Pooled, options);
	return row;
}

std::vector<SweepRow> sweep_future_horizon(std::span<const TimeSeries> series, std::size_t horizon,
                                           std::span<const std::size_t> future_values, const RunConfig& config) {
	if (future_values.empty()) {
		throw ConfigError("future-horizon sweep needs at least one H value");
	}
	const auto prepared = prepare_all(series, config.protocol, config.workers);
	std::vector<std::vector<SeriesEvaluation>> results(future_values.size());
	// Rows run one after another; each row uses the worker pool internally.
	for (std::size_t hi = 0; hi < future_values.size(); ++hi) {
		results[hi] = run_two_stage(prepared, horizon, future_values[hi], config);
	}
	std::vector<SweepRow> rows;
	rows.reserve(future_values.size());
	for (std::size_t hi = 0; hi < future_values.size(); ++hi) {
		rows.push_back(summarize(future_values[hi], std::move(results[hi]), config.protocol.metrics));
	}
	return rows;
}

} // namespace twostage
