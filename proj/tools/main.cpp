#include "twostage/config.hpp"
#include "twostage/errors.hpp"
#include "twostage/experiment.hpp"
#include "twostage/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

using namespace twostage;

namespace {

struct Flags {
	std::string config;
	std::string data;
	std::string out;
	std::optional<std::uint64_t> seed;
	std::string period;
	bool period_auto = false;
	std::optional<std::size_t> h;
	std::string future;
	std::optional<std::size_t> workers;
	std::string model;
	bool denormalize = false;
};

void add_common(CLI::App* cmd, Flags& f) {
	// -h would collide with --h
	cmd->set_help_flag("--help", "print this help");
	cmd->add_option("--config", f.config, "INI config file (defaults when omitted)");
	cmd->add_option("--data", f.data, "series CSV (id, values...)");
	cmd->add_option("--out", f.out, "output directory");
	cmd->add_option("--seed", f.seed, "master seed");
	cmd->add_option("--period", f.period, "period T, or 'auto'");
	cmd->add_flag("--period-auto", f.period_auto, "estimate T from the training half");
	cmd->add_option("--h", f.h, "forecast horizon h");
	cmd->add_option("--H", f.future, "future horizon H (sweep: comma list)");
	cmd->add_option("--workers", f.workers, "worker threads (0 = all cores)");
}

ExperimentConfig build_config(const Flags& f, bool sweep) {
	ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
	if (!f.data.empty()) {
		c.data_path = f.data;
	}
	if (!f.out.empty()) {
		c.out_dir = f.out;
	}
	if (f.seed) {
		c.run.master_seed = *f.seed;
	}
	if (f.period == "auto" || f.period_auto) {
		c.run.protocol.period.reset();
		c.run.protocol.period_auto = true;
	} else if (!f.period.empty()) {
		const auto v = parse_size_list(f.period, "--period");
		if (v.size() != 1) {
			throw ConfigError("--period takes one value");
		}
		c.run.protocol.period = v.front();
	}
	if (f.h) {
		c.horizon = *f.h;
		c.augment_horizons = {*f.h};
	}
	if (!f.future.empty()) {
		const auto v = parse_size_list(f.future, "--H");
		if (sweep) {
			c.future_sweep = v;
		} else if (v.size() != 1) {
			throw ConfigError("--H takes one value outside sweep");
		} else {
			c.future = v.front();
			c.augment_future = v.front();
		}
	}
	if (f.workers) {
		c.run.workers = *f.workers;
	}
	c.validate();
	return c;
}

void print_paths(const std::vector<std::filesystem::path>& paths) {
	for (const auto& p : paths) {
		std::cout << p.string() << "\n";
	}
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Two-stage multi-horizon forecasting experiments"};
	app.require_subcommand(1);
	app.set_help_flag("--help", "print this help");
	Flags f;

	auto* compare = app.add_subcommand("compare", "Two-Stage against the baselines");
	auto* augment = app.add_subcommand("augment", "baseline with and without a Stage-1 model");
	auto* sweep = app.add_subcommand("sweep", "Two-Stage over a list of future horizons");
	auto* synth = app.add_subcommand("synth", "write a seeded synthetic data set");
	auto* train = app.add_subcommand("train", "train and save models");
	auto* predict = app.add_subcommand("predict", "forecast past the end of each series");
	auto* eval = app.add_subcommand("eval", "score saved models on the test halves");
	for (auto* cmd : {compare, augment, sweep, synth, train, predict, eval}) {
		add_common(cmd, f);
	}
	for (auto* cmd : {predict, eval}) {
		cmd->add_option("--model", f.model, "model file or directory of per-series models")->required();
	}
	predict->add_flag("--denormalize", f.denormalize, "write forecasts on the original scale");

	CLI11_PARSE(app, argc, argv);

	try {
		if (compare->parsed()) {
			print_paths(cmd_compare(build_config(f, false)));
		} else if (augment->parsed()) {
			print_paths(cmd_augment(build_config(f, false)));
		} else if (sweep->parsed()) {
			print_paths(cmd_sweep(build_config(f, true)));
		} else if (synth->parsed()) {
			auto c = build_config(f, false);
			if (f.seed) {
				c.synth.seed = *f.seed;
			}
			std::cout << cmd_synth(c).string() << "\n";
		} else if (train->parsed()) {
			print_paths(cmd_train(build_config(f, false)));
		} else if (predict->parsed()) {
			std::cout << cmd_predict(build_config(f, false), f.model, f.denormalize).string() << "\n";
		} else if (eval->parsed()) {
			print_paths(cmd_eval(build_config(f, false), f.model));
		}
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return 1;
	}
	return 0;
}
