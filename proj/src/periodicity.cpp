#include "twostage/periodicity.hpp"

#include "twostage/errors.hpp"

#include <algorithm>

namespace twostage {

std::vector<double> autocorrelation(std::span<const double> values, std::size_t max_lag) {
	const std::size_t n = values.size();
	if (max_lag >= n) {
		throw ParameterError("max_lag must be smaller than the series length");
	}
	double mean = 0.0;
	for (double v : values) {
		mean += v;
	}
	mean /= static_cast<double>(n);
	std::vector<double> centered(n);
	for (std::size_t i = 0; i < n; ++i) {
		centered[i] = values[i] - mean;
	}
	double c0 = 0.0;
	for (double c : centered) {
		c0 += c * c;
	}
	if (!(c0 > 0.0)) {
		throw DegenerateSeriesError("autocorrelation of a constant series is undefined");
	}
	std::vector<double> acf(max_lag + 1);
	acf[0] = 1.0;
	for (std::size_t k = 1; k <= max_lag; ++k) {
		double ck = 0.0;
		for (std::size_t t = 0; t + k < n; ++t) {
			ck += centered[t] * centered[t + k];
		}
		acf[k] = ck / c0;
	}
	return acf;
}

std::vector<PeriodEstimate> estimate_periods(const TimeSeries& series, std::size_t max_lag, double threshold) {
	if (max_lag < 2) {
		throw ParameterError("max_lag must be at least 2");
	}
	if (series.size() < 2 * max_lag) {
		throw ParameterError("max_lag " + std::to_string(max_lag) + " too large for series of length " +
		                     std::to_string(series.size()));
	}
	// One extra lag so the neighborhood test at max_lag is defined.
	const auto acf = autocorrelation(series.values(), max_lag + 1);

	std::vector<PeriodEstimate> out;
	for (std::size_t k = 2; k <= max_lag; ++k) {
		if (acf[k] > threshold && acf[k] > acf[k - 1] && acf[k] >= acf[k + 1]) {
			out.push_back({k, acf[k]});
		}
	}
	std::stable_sort(out.begin(), out.end(), [](const PeriodEstimate& a, const PeriodEstimate& b) {
		if (a.acf_score != b.acf_score) {
			return a.acf_score > b.acf_score;
		}
		return a.period < b.period;
	});
	return out;
}

std::size_t shortest_period(std::span<const PeriodEstimate> candidates) {
	if (candidates.empty()) {
		throw NoPeriodError("no period candidates");
	}
	return std::min_element(candidates.begin(), candidates.end(),
	                        [](const PeriodEstimate& a, const PeriodEstimate& b) { return a.period < b.period; })
	    ->period;
}

} // namespace twostage
