#include "twostage/config.hpp"

#include "twostage/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace twostage {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
	static const std::set<std::string> stage = {"kind",   "layers",        "dropout",    "layer_norm",
	                                            "epochs", "learning_rate", "batch_size", "shuffle"};
	static const std::map<std::string, std::set<std::string>> keys = {
	    {"data", {"path", "period", "default_period", "window", "max_lag", "stride"}},
	    {"horizon", {"h", "H", "H_sweep", "h_list", "augment_H", "augment_baseline", "compare_baselines"}},
	    {"stage1", stage},
	    {"stage2", stage},
	    {"run", {"seed", "workers", "aggregation", "scope", "out"}},
	    {"metrics", {"zero_guard", "keep_fraction", "trim_rule"}},
	    {"synth",
	     {"count", "length", "periods", "amplitudes", "noise_sigma", "ar_coefficient", "anomaly_rate",
	      "anomaly_scale", "seed", "id_prefix"}},
	};
	return keys;
}

std::string trim(const std::string& s) {
	const auto b = s.find_first_not_of(" \t\r");
	if (b == std::string::npos) {
		return {};
	}
	const auto e = s.find_last_not_of(" \t\r");
	return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& text, const std::string& what) {
	const std::string t = trim(text);
	std::uint64_t v = 0;
	const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
	if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
		throw ConfigError(what + ": expected a non-negative integer, got '" + text + "'");
	}
	return v;
}

double to_double(const std::string& text, const std::string& what) {
	const std::string t = trim(text);
	double v = 0.0;
	const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
	if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
		throw ConfigError(what + ": expected a number, got '" + text + "'");
	}
	return v;
}

bool to_bool(const std::string& text, const std::string& what) {
	const std::string t = trim(text);
	if (t == "true" || t == "1" || t == "yes" || t == "on") {
		return true;
	}
	if (t == "false" || t == "0" || t == "no" || t == "off") {
		return false;
	}
	throw ConfigError(what + ": expected true/false, got '" + text + "'");
}

std::vector<double> to_double_list(const std::string& text, const std::string& what) {
	std::vector<double> out;
	std::stringstream ss(text);
	std::string item;
	while (std::getline(ss, item, ',')) {
		out.push_back(to_double(item, what));
	}
	return out;
}

std::string fmt_double(double v) {
	char buf[40];
	std::snprintf(buf, sizeof(buf), "%.17g", v);
	return buf;
}

template <class T>
std::string join(const std::vector<T>& v, auto&& fmt) {
	std::string out;
	for (std::size_t i = 0; i < v.size(); ++i) {
		if (i) {
			out += ',';
		}
		out += fmt(v[i]);
	}
	return out;
}

std::string kind_token(ModelKind k) {
	switch (k) {
		case ModelKind::Mar:
			return "mar";
		case ModelKind::Mlp:
			return "mlp";
		case ModelKind::HybridMlpMar:
			return "mlp+mar";
		case ModelKind::PreviousPeriod:
			return "previous-period";
	}
	return "?";
}

void read_stage(const pt::ptree& section, const std::string& name, StageSettings& stage) {
	for (const auto& [key, node] : section) {
		const std::string v = node.get_value<std::string>();
		const std::string what = "[" + name + "] " + key;
		if (key == "kind") {
			try {
				stage.kind = parse_model_kind(trim(v));
			} catch (const ParameterError& e) {
				throw ConfigError(what + ": " + e.what());
			}
		} else if (key == "layers") {
			stage.options.widths = parse_size_list(v, what);
		} else if (key == "dropout") {
			stage.options.dropout_rate = to_double(v, what);
		} else if (key == "layer_norm") {
			stage.options.layer_norm = to_bool(v, what);
		} else if (key == "epochs") {
			stage.train.epochs = to_u64(v, what);
		} else if (key == "learning_rate") {
			stage.train.learning_rate = to_double(v, what);
		} else if (key == "batch_size") {
			stage.train.batch_size = to_u64(v, what);
		} else if (key == "shuffle") {
			stage.train.shuffle = to_bool(v, what);
		}
	}
}

void write_stage(std::ostream& out, const std::string& name, const StageSettings& s) {
	out << "[" << name << "]\n"
	    << "kind = " << kind_token(s.kind) << "\n"
	    << "layers = " << join(s.options.widths, [](std::size_t w) { return std::to_string(w); }) << "\n"
	    << "dropout = " << fmt_double(s.options.dropout_rate) << "\n"
	    << "layer_norm = " << (s.options.layer_norm ? "true" : "false") << "\n"
	    << "epochs = " << s.train.epochs << "\n"
	    << "learning_rate = " << fmt_double(s.train.learning_rate) << "\n"
	    << "batch_size = " << s.train.batch_size << "\n"
	    << "shuffle = " << (s.train.shuffle ? "true" : "false") << "\n\n";
}

} // namespace

ExperimentConfig::ExperimentConfig() {
	run.stage1.train.epochs = 40;
	run.stage2.train.epochs = 20;
	run.protocol.period = 24;
}

void ExperimentConfig::validate() const {
	if (horizon == 0) {
		throw ConfigError("h must be at least 1");
	}
	if (future_sweep.empty()) {
		throw ConfigError("H_sweep must list at least one value");
	}
	if (augment_horizons.empty()) {
		throw ConfigError("h_list must list at least one value");
	}
	for (std::size_t h : augment_horizons) {
		if (h == 0) {
			throw ConfigError("h_list values must be at least 1");
		}
	}
	if (augment_future && *augment_future == 0) {
		throw ConfigError("augment_H must be at least 1");
	}
	for (const auto* s : {&run.stage1, &run.stage2}) {
		try {
			s->train.validate();
		} catch (const ParameterError& e) {
			throw ConfigError(e.what());
		}
		if (!(s->options.dropout_rate >= 0.0 && s->options.dropout_rate < 1.0)) {
			throw ConfigError("dropout must lie in [0, 1)");
		}
		if (s->kind != ModelKind::Mar && s->kind != ModelKind::PreviousPeriod && s->options.widths.empty()) {
			throw ConfigError("MLP kinds need at least one hidden layer width");
		}
	}
	if (run.stage1.kind == ModelKind::PreviousPeriod) {
		throw ConfigError("Stage 1 cannot be a Previous Period model");
	}
	if (run.protocol.period && *run.protocol.period == 0) {
		throw ConfigError("period must be at least 1");
	}
	if (run.protocol.history && *run.protocol.history == 0) {
		throw ConfigError("window must be at least 1");
	}
	if (run.protocol.train_stride == 0) {
		throw ConfigError("stride must be at least 1");
	}
	const auto& m = run.protocol.metrics;
	if (!(m.keep_fraction > 0.0 && m.keep_fraction <= 1.0)) {
		throw ConfigError("keep_fraction must lie in (0, 1]");
	}
	if (!(m.zero_guard >= 0.0)) {
		throw ConfigError("zero_guard must be non-negative");
	}
	synth.validate();
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what) {
	std::vector<std::size_t> out;
	if (trim(text).empty()) {
		return out;
	}
	std::stringstream ss(text);
	std::string item;
	while (std::getline(ss, item, ',')) {
		out.push_back(static_cast<std::size_t>(to_u64(item, what)));
	}
	return out;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
	pt::ptree tree;
	try {
		pt::read_ini(in, tree);
	} catch (const pt::ini_parser_error& e) {
		throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
	}
	ExperimentConfig cfg;
	const auto& keys = known_keys();
	try {
		for (const auto& [section, node] : tree) {
			const auto it = keys.find(section);
			if (it == keys.end()) {
				throw ConfigError("unknown section [" + section + "]");
			}
			for (const auto& [key, value] : node) {
				if (!it->second.count(key)) {
					throw ConfigError("unknown key '" + key + "' in [" + section + "]");
				}
				(void)value;
			}
		}
		if (auto d = tree.get_child_optional("data")) {
			for (const auto& [key, node] : *d) {
				const std::string v = trim(node.get_value<std::string>());
				const std::string what = "[data] " + key;
				if (key == "path") {
					cfg.data_path = v;
				} else if (key == "period") {
					if (v == "auto") {
						cfg.run.protocol.period.reset();
						cfg.run.protocol.period_auto = true;
					} else {
						cfg.run.protocol.period = to_u64(v, what);
						cfg.run.protocol.period_auto = false;
					}
				} else if (key == "default_period") {
					cfg.run.protocol.default_period = to_u64(v, what);
				} else if (key == "window") {
					if (v == "auto") {
						cfg.run.protocol.history.reset();
					} else {
						cfg.run.protocol.history = to_u64(v, what);
					}
				} else if (key == "max_lag") {
					cfg.run.protocol.max_lag = to_u64(v, what);
				} else if (key == "stride") {
					cfg.run.protocol.train_stride = to_u64(v, what);
				}
			}
		}
		if (auto h = tree.get_child_optional("horizon")) {
			for (const auto& [key, node] : *h) {
				const std::string v = trim(node.get_value<std::string>());
				const std::string what = "[horizon] " + key;
				if (key == "h") {
					cfg.horizon = to_u64(v, what);
				} else if (key == "H") {
					cfg.future = to_u64(v, what);
				} else if (key == "H_sweep") {
					cfg.future_sweep = parse_size_list(v, what);
				} else if (key == "h_list") {
					cfg.augment_horizons = parse_size_list(v, what);
				} else if (key == "augment_H") {
					if (v == "auto") {
						cfg.augment_future.reset();
					} else {
						cfg.augment_future = to_u64(v, what);
					}
				} else if (key == "augment_baseline") {
					try {
						cfg.augment_baseline = parse_model_kind(v);
					} catch (const ParameterError& e) {
						throw ConfigError(what + ": " + e.what());
					}
				} else if (key == "compare_baselines") {
					cfg.compare_baselines.clear();
					std::stringstream ss(v);
					std::string item;
					while (std::getline(ss, item, ',')) {
						try {
							cfg.compare_baselines.push_back(parse_model_kind(trim(item)));
						} catch (const ParameterError& e) {
							throw ConfigError(what + ": " + e.what());
						}
					}
				}
			}
		}
		if (auto s = tree.get_child_optional("stage1")) {
			read_stage(*s, "stage1", cfg.run.stage1);
		}
		if (auto s = tree.get_child_optional("stage2")) {
			read_stage(*s, "stage2", cfg.run.stage2);
		}
		if (auto r = tree.get_child_optional("run")) {
			for (const auto& [key, node] : *r) {
				const std::string v = trim(node.get_value<std::string>());
				const std::string what = "[run] " + key;
				if (key == "seed") {
					cfg.run.master_seed = to_u64(v, what);
				} else if (key == "workers") {
					cfg.run.workers = to_u64(v, what);
				} else if (key == "aggregation") {
					if (v == "macro") {
						cfg.aggregation = AggregationMode::Macro;
					} else if (v == "pooled") {
						cfg.aggregation = AggregationMode::Pooled;
					} else {
						throw ConfigError(what + ": expected macro or pooled, got '" + v + "'");
					}
				} else if (key == "scope") {
					if (v == "global") {
						cfg.run.scope = TrainingScope::Global;
					} else if (v == "per-series") {
						cfg.run.scope = TrainingScope::PerSeries;
					} else {
						throw ConfigError(what + ": expected global or per-series, got '" + v + "'");
					}
				} else if (key == "out") {
					cfg.out_dir = v;
				}
			}
		}
		if (auto m = tree.get_child_optional("metrics")) {
			for (const auto& [key, node] : *m) {
				const std::string v = trim(node.get_value<std::string>());
				const std::string what = "[metrics] " + key;
				auto& opts = cfg.run.protocol.metrics;
				if (key == "zero_guard") {
					opts.zero_guard = to_double(v, what);
				} else if (key == "keep_fraction") {
					opts.keep_fraction = to_double(v, what);
				} else if (key == "trim_rule") {
					if (v == "per-metric") {
						opts.trim_rule = TrimRule::PerMetric;
					} else if (v == "abs-error") {
						opts.trim_rule = TrimRule::AbsoluteError;
					} else {
						throw ConfigError(what + ": expected per-metric or abs-error, got '" + v + "'");
					}
				}
			}
		}
		if (auto s = tree.get_child_optional("synth")) {
			for (const auto& [key, node] : *s) {
				const std::string v = trim(node.get_value<std::string>());
				const std::string what = "[synth] " + key;
				auto& sc = cfg.synth;
				if (key == "count") {
					sc.count = to_u64(v, what);
				} else if (key == "length") {
					sc.length = to_u64(v, what);
				} else if (key == "periods") {
					sc.periods = parse_size_list(v, what);
				} else if (key == "amplitudes") {
					sc.amplitudes = to_double_list(v, what);
				} else if (key == "noise_sigma") {
					sc.noise_sigma = to_double(v, what);
				} else if (key == "ar_coefficient") {
					sc.ar_coefficient = to_double(v, what);
				} else if (key == "anomaly_rate") {
					sc.anomaly_rate = to_double(v, what);
				} else if (key == "anomaly_scale") {
					sc.anomaly_scale = to_double(v, what);
				} else if (key == "seed") {
					sc.seed = to_u64(v, what);
				} else if (key == "id_prefix") {
					sc.id_prefix = v;
				}
			}
		}
		cfg.validate();
	} catch (const ConfigError& e) {
		throw ConfigError(origin + ": " + e.what());
	}
	return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in) {
		throw ConfigError("cannot open config file '" + path.string() + "'");
	}
	return parse_config(in, path.string());
}

std::string render_config(const ExperimentConfig& c, bool include_placement) {
	std::ostringstream out;
	const auto& p = c.run.protocol;
	const auto sz = [](std::size_t v) { return std::to_string(v); };
	out << "[data]\n"
	    << "path = " << c.data_path.string() << "\n"
	    << "period = " << (p.period ? std::to_string(*p.period) : std::string("auto")) << "\n"
	    << "default_period = " << p.default_period << "\n"
	    << "window = " << (p.history ? std::to_string(*p.history) : std::string("auto")) << "\n"
	    << "max_lag = " << p.max_lag << "\n"
	    << "stride = " << p.train_stride << "\n\n";
	out << "[horizon]\n"
	    << "h = " << c.horizon << "\n"
	    << "H = " << c.future << "\n"
	    << "H_sweep = " << join(c.future_sweep, sz) << "\n"
	    << "h_list = " << join(c.augment_horizons, sz) << "\n"
	    << "augment_H = " << (c.augment_future ? std::to_string(*c.augment_future) : std::string("auto")) << "\n"
	    << "augment_baseline = " << kind_token(c.augment_baseline) << "\n"
	    << "compare_baselines = " << join(c.compare_baselines, kind_token) << "\n\n";
	write_stage(out, "stage1", c.run.stage1);
	write_stage(out, "stage2", c.run.stage2);
	out << "[run]\n"
	    << "seed = " << c.run.master_seed << "\n";
	if (include_placement) {
		out << "workers = " << c.run.workers << "\n";
	}
	out << "aggregation = " << aggregation_name(c.aggregation) << "\n"
	    << "scope = " << (c.run.scope == TrainingScope::Global ? "global" : "per-series") << "\n";
	if (include_placement) {
		out << "out = " << c.out_dir.string() << "\n";
	}
	out << "\n";
	out << "[metrics]\n"
	    << "zero_guard = " << fmt_double(p.metrics.zero_guard) << "\n"
	    << "keep_fraction = " << fmt_double(p.metrics.keep_fraction) << "\n"
	    << "trim_rule = " << (p.metrics.trim_rule == TrimRule::PerMetric ? "per-metric" : "abs-error") << "\n\n";
	const auto& s = c.synth;
	out << "[synth]\n"
	    << "count = " << s.count << "\n"
	    << "length = " << s.length << "\n"
	    << "periods = " << join(s.periods, sz) << "\n"
	    << "amplitudes = " << join(s.amplitudes, fmt_double) << "\n"
	    << "noise_sigma = " << fmt_double(s.noise_sigma) << "\n"
	    << "ar_coefficient = " << fmt_double(s.ar_coefficient) << "\n"
	    << "anomaly_rate = " << fmt_double(s.anomaly_rate) << "\n"
	    << "anomaly_scale = " << fmt_double(s.anomaly_scale) << "\n"
	    << "seed = " << s.seed << "\n"
	    << "id_prefix = " << s.id_prefix << "\n";
	return out.str();
}

std::filesystem::path resolve_data_path(const std::filesystem::path& path) {
	const char* dir = std::getenv(kDataDirEnv);
	if (path.empty()) {
		if (dir && *dir) {
			return std::filesystem::path(dir) / "Hourly-train.csv";
		}
		throw ConfigError(std::string("no data file given (use --data, [data] path, or ") + kDataDirEnv + ")");
	}
	if (path.is_absolute() || std::filesystem::exists(path) || !dir || !*dir) {
		return path;
	}
	return std::filesystem::path(dir) / path;
}

} // namespace twostage
