#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace twostage {

/// A named univariate series with an optional known period (in samples).
class TimeSeries {
public:
	/// Throws LengthError for fewer than 2 values, ParameterError for
	/// non-finite values or a period outside [1, size).
	TimeSeries(std::string id, std::vector<double> values, std::optional<std::size_t> period = std::nullopt);

	const std::string& id() const { return id_; }
	const std::vector<double>& values() const { return values_; }
	std::optional<std::size_t> period() const { return period_; }
	std::size_t size() const { return values_.size(); }

	TimeSeries with_period(std::optional<std::size_t> period) const;

private:
	std::string id_;
	std::vector<double> values_;
	std::optional<std::size_t> period_;
};

struct NormStats {
	double mean = 0.0;
	double std = 1.0;

	double apply(double x) const { return (x - mean) / std; }
	double invert(double z) const { return z * std + mean; }
};

/// Window lengths: `history` (L) observed points in, `horizon` (h) points to
/// forecast, `future` (H) points beyond the forecast horizon for Stage 1.
struct HorizonSpec {
	std::size_t history = 1;
	std::size_t horizon = 1;
	std::size_t future = 0;

	std::size_t span() const { return history + horizon + future; }
	/// Throws ParameterError when history or horizon is zero.
	void validate() const;

	bool operator==(const HorizonSpec&) const = default;
};

/// Three contiguous slices of a series: history | target | future.
struct WindowSample {
	std::vector<double> history;
	std::vector<double> target;
	std::vector<double> future;
	/// Index of the last history point in the source series.
	std::size_t anchor = 0;
};

struct SampleSet {
	std::vector<WindowSample> samples;
	HorizonSpec spec;
	std::string source_id;

	std::size_t size() const { return samples.size(); }
	bool empty() const { return samples.empty(); }
};

/// Reads one series per row: id, then comma-separated values. Quoted cells
/// are unquoted, trailing empty cells are ignored, blank lines are skipped,
/// and a leading header row whose value cells are all non-numeric is
/// skipped. Throws ParseError naming row and column (1-based, id is column 1)
/// and EmptyInputError when no series are found.
std::vector<TimeSeries> load_series_csv(const std::filesystem::path& path);
std::vector<TimeSeries> parse_series_csv(std::istream& in);

/// Writes the same row format (no header), values printed with 17
/// significant digits.
void write_series_csv(const std::filesystem::path& path, std::span<const TimeSeries> series);

/// Mean and population standard deviation. Throws DegenerateSeriesError for
/// a constant series.
NormStats compute_norm_stats(std::span<const double> values);
TimeSeries apply_norm(const TimeSeries& series, const NormStats& stats);
/// Standardizes the series with its own statistics.
std::pair<TimeSeries, NormStats> normalize(const TimeSeries& series);

/// First floor(n/2) points and the remainder. Throws LengthError when n < 4.
std::pair<TimeSeries, TimeSeries> split_half(const TimeSeries& series);

/// Number of windows build_windows would produce; 0 when the series is too
/// short.
std::size_t window_count(std::size_t length, const HorizonSpec& spec, std::size_t stride);

/// Windows anchored at t = L-1, L-1+stride, ... while t + h + H < n.
/// Throws InsufficientDataError when n < L + h + H.
SampleSet build_windows(const TimeSeries& series, const HorizonSpec& spec, std::size_t stride = 1);

} // namespace twostage
