#pragma once

#include "twostage/series_data.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace twostage {

struct PeriodEstimate {
	std::size_t period = 0;
	double acf_score = 0.0;
};

inline constexpr double kDefaultAcfThreshold = 0.3;

/// Sample autocorrelation r(0..max_lag), normalized by the lag-0
/// autocovariance (biased estimator). Throws DegenerateSeriesError for a
/// constant series.
std::vector<double> autocorrelation(std::span<const double> values, std::size_t max_lag);

/// Candidate periods: lags in [2, max_lag] that are local maxima of the ACF
/// over a +-1 lag neighborhood and exceed `threshold`, sorted by descending
/// score (ties toward the shorter lag). Throws ParameterError when
/// n < 2 * max_lag or max_lag < 2.
std::vector<PeriodEstimate> estimate_periods(const TimeSeries& series, std::size_t max_lag,
                                             double threshold = kDefaultAcfThreshold);

/// The shortest candidate period. Throws NoPeriodError when empty.
std::size_t shortest_period(std::span<const PeriodEstimate> candidates);

} // namespace twostage
