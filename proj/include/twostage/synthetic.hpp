#pragma once

#include "twostage/series_data.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace twostage {

/// Seeded seasonal generator:
///   x_t = sum_i a_i sin(2 pi (t mod P_i) / P_i + phase_i) + e_t + spike_t
/// with AR(1) noise e_t = ar * e_{t-1} + sigma * N(0, 1) started from its
/// stationary distribution, and spikes of +-anomaly_scale at rate
/// anomaly_rate. Phases are drawn per series. Using t mod P_i makes the
/// noiseless series bitwise periodic with period lcm(P_i).
struct SynthConfig {
	std::size_t count = 10;
	std::size_t length = 960;
	std::vector<std::size_t> periods{24, 168};
	/// One per period; missing entries default to 0.3.
	std::vector<double> amplitudes{1.0, 0.3};
	double noise_sigma = 0.0;
	double ar_coefficient = 0.5;
	double anomaly_rate = 0.0;
	double anomaly_scale = 3.0;
	std::uint64_t seed = 0;
	std::string id_prefix = "S";

	/// Throws ConfigError on empty periods, zero length, |ar| >= 1, or a
	/// rate outside [0, 1].
	void validate() const;
};

struct SynthResult {
	std::vector<TimeSeries> series;
	std::vector<std::size_t> anomaly_counts;
};

SynthResult generate_synthetic(const SynthConfig& config);

/// Least common multiple of the configured periods.
std::size_t exact_period(const SynthConfig& config);

} // namespace twostage
