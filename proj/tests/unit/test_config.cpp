#include "twostage/config.hpp"
#include "twostage/errors.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace twostage;

namespace {

std::filesystem::path fs_root() { return TWOSTAGE_SOURCE_DIR; }

ExperimentConfig parse(const std::string& text) {
	std::istringstream in(text);
	return parse_config(in, "test.ini");
}

} // namespace

TEST_CASE("defaults carry the standard training setup") {
	const ExperimentConfig c;
	CHECK(c.run.stage1.train.epochs == 40);
	CHECK(c.run.stage2.train.epochs == 20);
	for (const auto* s : {&c.run.stage1, &c.run.stage2}) {
		CHECK(s->options.widths == std::vector<std::size_t>{200, 100, 50});
		CHECK(s->options.dropout_rate == 0.5);
		CHECK(s->options.layer_norm);
		CHECK(s->train.learning_rate == 0.01);
		CHECK(s->train.batch_size == 64);
		CHECK(s->kind == ModelKind::HybridMlpMar);
	}
	CHECK(c.horizon == 12);
	CHECK(c.future == 12);
	CHECK(c.future_sweep == std::vector<std::size_t>{0, 6, 12, 18, 24});
	CHECK(c.augment_horizons == std::vector<std::size_t>{6, 12, 24});
	CHECK(c.aggregation == AggregationMode::Macro);
	CHECK(c.run.protocol.period == 24u);
	CHECK_NOTHROW(c.validate());
}

TEST_CASE("parsing sections") {
	const auto c = parse(R"(
[data]
path = data/x.csv
period = auto
window = 36
[horizon]
h = 6
H = 3
H_sweep = 0, 3
h_list = 6
augment_baseline = mlp
compare_baselines = mar, previous-period
[stage1]
kind = mar
epochs = 5
[stage2]
layers = 32,16
dropout = 0.1
layer_norm = false
batch_size = 8
learning_rate = 0.05
shuffle = no
[run]
seed = 17
workers = 2
aggregation = pooled
scope = per-series
out = res
[metrics]
keep_fraction = 0.9
trim_rule = abs-error
zero_guard = 0
[synth]
count = 3
periods = 12,36
amplitudes = 1,0.5
noise_sigma = 0.2
id_prefix = Q
)");
	CHECK(c.data_path == "data/x.csv");
	CHECK_FALSE(c.run.protocol.period);
	CHECK(c.run.protocol.period_auto);
	CHECK(c.run.protocol.history == 36u);
	CHECK(c.horizon == 6);
	CHECK(c.future == 3);
	CHECK(c.future_sweep == std::vector<std::size_t>{0, 3});
	CHECK(c.augment_baseline == ModelKind::Mlp);
	CHECK(c.compare_baselines == std::vector<ModelKind>{ModelKind::Mar, ModelKind::PreviousPeriod});
	CHECK(c.run.stage1.kind == ModelKind::Mar);
	CHECK(c.run.stage1.train.epochs == 5);
	CHECK(c.run.stage2.options.widths == std::vector<std::size_t>{32, 16});
	CHECK(c.run.stage2.options.dropout_rate == 0.1);
	CHECK_FALSE(c.run.stage2.options.layer_norm);
	CHECK(c.run.stage2.train.batch_size == 8);
	CHECK_FALSE(c.run.stage2.train.shuffle);
	CHECK(c.run.master_seed == 17);
	CHECK(c.run.workers == 2);
	CHECK(c.aggregation == AggregationMode::Pooled);
	CHECK(c.run.scope == TrainingScope::PerSeries);
	CHECK(c.out_dir == "res");
	CHECK(c.run.protocol.metrics.keep_fraction == 0.9);
	CHECK(c.run.protocol.metrics.trim_rule == TrimRule::AbsoluteError);
	CHECK(c.synth.periods == std::vector<std::size_t>{12, 36});
	CHECK(c.synth.amplitudes == std::vector<double>{1, 0.5});
	CHECK(c.synth.id_prefix == "Q");
}

TEST_CASE("render round trips") {
	auto c = parse("[horizon]\nh = 6\n[stage2]\ndropout = 0.123456789\n[run]\nseed = 5\n");
	const auto text = render_config(c);
	const auto back = parse(text);
	CHECK(render_config(back) == text);
	CHECK(back.run.stage2.options.dropout_rate == 0.123456789);
	CHECK(render_config(ExperimentConfig{}) == render_config(parse(render_config(ExperimentConfig{}))));
}

TEST_CASE("errors carry context") {
	auto fails = [](const std::string& text, const std::string& needle) {
		try {
			parse(text);
		} catch (const ConfigError& e) {
			const std::string msg = e.what();
			CHECK_MESSAGE(msg.find(needle) != std::string::npos, msg);
			CHECK(msg.find("test.ini") != std::string::npos);
			return;
		}
		FAIL("no ConfigError for: " << text);
	};
	fails("[nope]\nx = 1\n", "unknown section");
	fails("[run]\ncolour = red\n", "unknown key");
	fails("[horizon]\nh = twelve\n", "[horizon] h");
	fails("[horizon]\nH_sweep =\n", "H_sweep");
	fails("[horizon]\nh = 0\n", "h must");
	fails("[stage2]\ndropout = 1\n", "dropout");
	fails("[stage1]\nkind = previous-period\n", "Stage 1");
	fails("[run]\naggregation = median\n", "macro or pooled");
	fails("[metrics]\nkeep_fraction = 0\n", "keep_fraction");
	fails("[data]\nperiod = -3\n", "period");
	fails("[stage1\n", "test.ini:1");
}

TEST_CASE("size lists") {
	CHECK(parse_size_list(" 0, 6 ,12", "x") == std::vector<std::size_t>{0, 6, 12});
	CHECK(parse_size_list("", "x").empty());
	CHECK_THROWS_AS(parse_size_list("1,,2", "x"), ConfigError);
	CHECK_THROWS_AS(parse_size_list("1.5", "x"), ConfigError);
}

TEST_CASE("data path resolution") {
	::unsetenv(kDataDirEnv);
	CHECK_THROWS_AS(resolve_data_path(""), ConfigError);
	CHECK(resolve_data_path("rel.csv") == "rel.csv");
	::setenv(kDataDirEnv, "/data/m4", 1);
	CHECK(resolve_data_path("") == "/data/m4/Hourly-train.csv");
	CHECK(resolve_data_path("rel.csv") == "/data/m4/rel.csv");
	CHECK(resolve_data_path("/abs/x.csv") == "/abs/x.csv");
	::unsetenv(kDataDirEnv);
}

TEST_CASE("shipped default config equals the built-in defaults") {
	const auto c = load_config(fs_root() / "configs" / "default.ini");
	CHECK(render_config(c) == render_config(ExperimentConfig{}));
	CHECK_NOTHROW(load_config(fs_root() / "configs" / "synthetic.ini"));
}
