#include "twostage/errors.hpp"
#include "twostage/experiment.hpp"
#include "twostage/serialization.hpp"
#include "twostage/synthetic.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace twostage;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
	std::ifstream in(p, std::ios::binary);
	std::ostringstream s;
	s << in.rdbuf();
	return s.str();
}

std::vector<std::string> lines(const std::string& text) {
	std::vector<std::string> out;
	std::istringstream in(text);
	for (std::string l; std::getline(in, l);) out.push_back(l);
	return out;
}

fs::path scratch(const std::string& name) {
	const auto dir = fs::temp_directory_path() / ("twostage_exp_" + name);
	fs::remove_all(dir);
	fs::create_directories(dir);
	return dir;
}

// Small, fast configuration on a 3-series synthetic set.
ExperimentConfig small_config(const fs::path& dir) {
	ExperimentConfig c;
	for (auto* s : {&c.run.stage1, &c.run.stage2}) {
		s->options.widths = {16, 8};
		s->train.epochs = 2;
	}
	c.synth.count = 3;
	c.synth.length = 480;
	c.synth.noise_sigma = 0.2;
	c.synth.seed = 5;
	c.out_dir = dir;
	c.data_path = cmd_synth(c);
	c.future_sweep = {0, 6, 12};
	c.augment_horizons = {6, 12};
	c.run.master_seed = 3;
	return c;
}

} // namespace

TEST_CASE("compare emits one row per model") {
	const auto dir = scratch("compare");
	const auto c = small_config(dir);
	const auto paths = cmd_compare(c);
	REQUIRE(paths.size() == 5);
	for (const auto& p : paths) CHECK(fs::exists(p));
	const auto rows = lines(slurp(dir / "compare.csv"));
	REQUIRE(rows.size() == 6);
	CHECK(rows[0] == kReportHeader);
	CHECK(rows[1].rfind("compare,Two-Stage,12,12,", 0) == 0);
	CHECK(rows[2].rfind("compare,MLP+MAR,12,0,", 0) == 0);
	CHECK(rows[3].rfind("compare,MLP,12,0,", 0) == 0);
	CHECK(rows[4].rfind("compare,MAR,12,0,", 0) == 0);
	CHECK(rows[5].rfind("compare,Previous Period,12,0,", 0) == 0);
	CHECK(lines(slurp(dir / "compare_pooled.csv")).size() == 6);
	CHECK(lines(slurp(dir / "compare_series.csv")).size() == 1 + 5 * 3);
}

TEST_CASE("augment rows and the H = 0 identity with the sweep") {
	const auto dir = scratch("augment");
	auto c = small_config(dir);
	const auto series = load_data(c);
	const auto aug = run_augment(c, series);
	REQUIRE(aug.macro.size() == 4);
	CHECK(aug.macro[0].model == "BL");
	CHECK(aug.macro[1].model == "2S");
	CHECK(aug.macro[1].future == 6);
	CHECK(aug.macro[3].future == 12);
	c.augment_horizons = {12};
	CHECK(run_augment(c, series).macro.size() == 2);
	c.augment_future = 6;
	CHECK(run_augment(c, series).macro[1].future == 6);

	c.horizon = 12;
	const auto sweep = run_sweep(c, series);
	REQUIRE(sweep.macro.size() == 3);
	CHECK_FALSE(sweep.macro[0].metrics.s1_mse);
	CHECK(sweep.macro[1].metrics.s1_mse);
	// H = 0 sweep row is the BL row at the same h
	CHECK(sweep.macro[0].metrics.values() == aug.macro[2].metrics.values());
}

TEST_CASE("reports are byte-identical across reruns and worker counts") {
	const auto dir = scratch("determinism");
	auto c = small_config(dir);
	c.run.workers = 1;
	cmd_sweep(c);
	const auto first = slurp(dir / "sweep.csv");
	const auto first_json = slurp(dir / "sweep.json");
	c.run.workers = 4;
	cmd_sweep(c);
	CHECK(slurp(dir / "sweep.csv") == first);
	CHECK(slurp(dir / "sweep.json") == first_json);
	c.run.master_seed = 4;
	cmd_sweep(c);
	CHECK(slurp(dir / "sweep.csv") != first);
}

TEST_CASE("empty sweep list and missing data") {
	const auto dir = scratch("errors");
	auto c = small_config(dir);
	c.future_sweep.clear();
	CHECK_THROWS_AS(cmd_sweep(c), ConfigError);
	auto d = small_config(dir);
	d.data_path = dir / "missing.csv";
	CHECK_THROWS_AS(cmd_compare(d), ConfigError);
}

TEST_CASE("train, predict and eval") {
	const auto dir = scratch("train");
	auto c = small_config(dir);
	c.out_dir = dir / "global";
	const auto saved = cmd_train(c);
	REQUIRE(saved.size() == 1);
	const auto pair = load_stage_pair(saved[0]);
	CHECK(pair.spec == HorizonSpec{48, 12, 12});

	const auto pred = cmd_predict(c, saved[0], false);
	const auto rows = lines(slurp(pred));
	REQUIRE(rows.size() == 3);
	CHECK(std::count(rows[0].begin(), rows[0].end(), ',') == 12);

	const auto ev = cmd_eval(c, saved[0]);
	const auto eval_rows = lines(slurp(ev[0]));
	REQUIRE(eval_rows.size() == 2);

	// the same numbers as the in-memory pipeline
	const auto series = load_data(c);
	const auto prepared = prepare_all(series, c.run.protocol, 1);
	const auto direct = aggregate(run_two_stage(prepared, 12, 12, c.run), AggregationMode::Macro);
	ExperimentResult r{"eval", {}, {}, {}};
	CHECK(eval_rows[1].find(format_value(direct.mae)) != std::string::npos);

	c.run.scope = TrainingScope::PerSeries;
	c.out_dir = dir / "per";
	const auto per = cmd_train(c);
	CHECK(per.size() == 3);
	CHECK(fs::exists(dir / "per" / "S1.tsp"));
	CHECK_NOTHROW(cmd_predict(c, dir / "per", true));
	CHECK_NOTHROW(cmd_eval(c, dir / "per"));
}

TEST_CASE("model file names are sanitised") {
	CHECK(model_file_name("H1") == "H1.tsp");
	CHECK(model_file_name("../x y") == ".._x_y.tsp");
	CHECK(model_file_name("..") == "_...tsp");
}

TEST_CASE("cli exit codes") {
	const auto dir = scratch("cli");
	const std::string cli = TWOSTAGE_CLI;
	CHECK(std::system((cli + " synth --out " + dir.string() + " > /dev/null").c_str()) == 0);
	CHECK(fs::exists(dir / "synthetic.csv"));
	CHECK(std::system((cli + " compare --data " + (dir / "nope.csv").string() + " 2> /dev/null").c_str()) != 0);
	CHECK(std::system((cli + " sweep --H '' 2> /dev/null").c_str()) != 0);
	CHECK(std::system((cli + " bogus 2> /dev/null > /dev/null").c_str()) != 0);
}
