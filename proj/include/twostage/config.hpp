#pragma once

#include "twostage/metrics.hpp"
#include "twostage/synthetic.hpp"
#include "twostage/two_stage.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace twostage {

/// Everything a command needs. Defaults are the standard training setup at
/// h = 12, H = 12.
struct ExperimentConfig {
	std::filesystem::path data_path;
	std::filesystem::path out_dir = "results";

	std::size_t horizon = 12;
	std::size_t future = 12;
	std::vector<std::size_t> future_sweep{0, 6, 12, 18, 24};
	std::vector<std::size_t> augment_horizons{6, 12, 24};
	/// H used by augment rows; unset means H = h.
	std::optional<std::size_t> augment_future;
	ModelKind augment_baseline = ModelKind::HybridMlpMar;
	std::vector<ModelKind> compare_baselines{ModelKind::HybridMlpMar, ModelKind::Mlp, ModelKind::Mar,
	                                         ModelKind::PreviousPeriod};

	RunConfig run;
	AggregationMode aggregation = AggregationMode::Macro;
	SynthConfig synth;

	ExperimentConfig();

	/// Throws ConfigError on inconsistent values.
	void validate() const;
};

/// INI-style document with [data], [horizon], [stage1], [stage2], [run],
/// [metrics], [synth] sections; see configs/default.ini. Unknown sections or
/// keys are rejected. `origin` prefixes error messages.
ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Round-trippable INI rendering of a config. Without `include_placement` the
/// worker count and output directory (neither changes results) are left out,
/// so report sidecars do not depend on them.
std::string render_config(const ExperimentConfig& config, bool include_placement = true);

/// Parses "0,6,12" (whitespace tolerated). Throws ConfigError.
std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what);

/// Environment variable naming the default data directory.
inline constexpr const char* kDataDirEnv = "TWOSTAGE_DATA_DIR";

/// Resolves a data path: absolute or existing paths are returned as is;
/// otherwise it is looked up under $TWOSTAGE_DATA_DIR. An empty path maps to
/// $TWOSTAGE_DATA_DIR/Hourly-train.csv.
std::filesystem::path resolve_data_path(const std::filesystem::path& path);

} // namespace twostage
