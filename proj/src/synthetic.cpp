#include "twostage/synthetic.hpp"

#include "twostage/errors.hpp"
#include "twostage/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace twostage {

void SynthConfig::validate() const {
	if (count == 0 || length < 2) {
		throw ConfigError("synthetic data needs count >= 1 and length >= 2");
	}
	if (periods.empty()) {
		throw ConfigError("synthetic data needs at least one period");
	}
	for (std::size_t p : periods) {
		if (p < 2) {
			throw ConfigError("synthetic periods must be at least 2");
		}
	}
	if (!(std::abs(ar_coefficient) < 1.0)) {
		throw ConfigError("AR coefficient must satisfy |ar| < 1");
	}
	if (!(noise_sigma >= 0.0)) {
		throw ConfigError("noise sigma must be non-negative");
	}
	if (!(anomaly_rate >= 0.0 && anomaly_rate <= 1.0)) {
		throw ConfigError("anomaly rate must lie in [0, 1]");
	}
}

std::size_t exact_period(const SynthConfig& config) {
	std::size_t l = 1;
	for (std::size_t p : config.periods) {
		l = std::lcm(l, p);
	}
	return l;
}

SynthResult generate_synthetic(const SynthConfig& config) {
	config.validate();
	SynthResult out;
	for (std::size_t s = 0; s < config.count; ++s) {
		// Separate streams so toggling noise or spikes leaves the other parts unchanged.
		Rng phase_rng(derive_seed(config.seed, {s, 0}));
		Rng noise_rng(derive_seed(config.seed, {s, 1}));
		Rng spike_rng(derive_seed(config.seed, {s, 2}));

		std::vector<std::vector<double>> tables;
		for (std::size_t i = 0; i < config.periods.size(); ++i) {
			const std::size_t p = config.periods[i];
			const double amp = i < config.amplitudes.size() ? config.amplitudes[i] : 0.3;
			const double phase = phase_rng.uniform(0.0, 2.0 * std::numbers::pi);
			std::vector<double> table(p);
			for (std::size_t k = 0; k < p; ++k) {
				table[k] = amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(p) + phase);
			}
			tables.push_back(std::move(table));
		}

		const double phi = config.ar_coefficient;
		double e = 0.0;
		if (config.noise_sigma > 0.0) {
			e = noise_rng.normal() * config.noise_sigma / std::sqrt(1.0 - phi * phi);
		}
		std::vector<double> values(config.length);
		std::size_t spikes = 0;
		for (std::size_t t = 0; t < config.length; ++t) {
			double x = 0.0;
			for (std::size_t i = 0; i < tables.size(); ++i) {
				x += tables[i][t % config.periods[i]];
			}
			if (config.noise_sigma > 0.0) {
				if (t > 0) {
					e = phi * e + config.noise_sigma * noise_rng.normal();
				}
				x += e;
			}
			if (config.anomaly_rate > 0.0 && spike_rng.bernoulli(config.anomaly_rate)) {
				x += spike_rng.bernoulli(0.5) ? config.anomaly_scale : -config.anomaly_scale;
				++spikes;
			}
			values[t] = x;
		}
		out.series.emplace_back(config.id_prefix + std::to_string(s + 1), std::move(values));
		out.anomaly_counts.push_back(spikes);
	}
	return out;
}

} // namespace twostage
