#include "twostage/series_data.hpp"

#include "twostage/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace twostage {

TimeSeries::TimeSeries(std::string id, std::vector<double> values, std::optional<std::size_t> period)
    : id_(std::move(id)), values_(std::move(values)), period_(period) {
	if (values_.size() < 2) {
		throw LengthError("series '" + id_ + "' needs at least 2 values, got " + std::to_string(values_.size()));
	}
	for (std::size_t i = 0; i < values_.size(); ++i) {
		if (!std::isfinite(values_[i])) {
			throw ParameterError("series '" + id_ + "' has a non-finite value at index " + std::to_string(i));
		}
	}
	if (period_ && (*period_ < 1 || *period_ >= values_.size())) {
		throw ParameterError("series '" + id_ + "': period " + std::to_string(*period_) + " outside [1, " +
		                     std::to_string(values_.size()) + ")");
	}
}

TimeSeries TimeSeries::with_period(std::optional<std::size_t> period) const {
	return TimeSeries(id_, values_, period);
}

void HorizonSpec::validate() const {
	if (history < 1) {
		throw ParameterError("history window length must be at least 1");
	}
	if (horizon < 1) {
		throw ParameterError("forecast horizon must be at least 1");
	}
}

namespace {

std::string_view trim(std::string_view s) {
	while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
		s.remove_prefix(1);
	}
	while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
		s.remove_suffix(1);
	}
	if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
		s = s.substr(1, s.size() - 2);
	}
	return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
	std::vector<std::string_view> cells;
	std::size_t start = 0;
	while (true) {
		const auto comma = line.find(',', start);
		if (comma == std::string_view::npos) {
			cells.push_back(trim(line.substr(start)));
			break;
		}
		cells.push_back(trim(line.substr(start, comma - start)));
		start = comma + 1;
	}
	while (cells.size() > 1 && cells.back().empty()) {
		cells.pop_back();
	}
	return cells;
}

std::optional<double> parse_number(std::string_view cell) {
	if (cell.empty()) {
		return std::nullopt;
	}
	if (cell.front() == '+') {
		cell.remove_prefix(1);
	}
	double v = 0.0;
	const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
	if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
		return std::nullopt;
	}
	return v;
}

} // namespace

std::vector<TimeSeries> parse_series_csv(std::istream& in) {
	std::vector<TimeSeries> out;
	std::string line;
	std::size_t row = 0;
	bool first_content_row = true;
	while (std::getline(in, line)) {
		++row;
		const auto cells = split_cells(line);
		if (cells.size() == 1 && cells[0].empty()) {
			continue;
		}
		if (first_content_row) {
			first_content_row = false;
			bool any_numeric = false;
			for (std::size_t c = 1; c < cells.size(); ++c) {
				any_numeric = any_numeric || parse_number(cells[c]).has_value();
			}
			if (cells.size() > 1 && !any_numeric) {
				continue; // header
			}
		}
		std::vector<double> values;
		values.reserve(cells.size());
		for (std::size_t c = 1; c < cells.size(); ++c) {
			const auto v = parse_number(cells[c]);
			if (!v) {
				throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
				                 ": invalid number '" + std::string(cells[c]) + "'");
			}
			values.push_back(*v);
		}
		try {
			out.emplace_back(std::string(cells[0]), std::move(values));
		} catch (const Error& e) {
			throw ParseError("row " + std::to_string(row) + ": " + e.what());
		}
	}
	if (out.empty()) {
		throw EmptyInputError("no series found in input");
	}
	return out;
}

std::vector<TimeSeries> load_series_csv(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in) {
		throw ParseError("cannot open '" + path.string() + "'");
	}
	try {
		return parse_series_csv(in);
	} catch (const ParseError& e) {
		throw ParseError(path.string() + ": " + e.what());
	} catch (const EmptyInputError& e) {
		throw EmptyInputError(path.string() + ": " + e.what());
	}
}

void write_series_csv(const std::filesystem::path& path, std::span<const TimeSeries> series) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw Error("cannot write '" + path.string() + "'");
	}
	char buf[40];
	for (const auto& s : series) {
		out << s.id();
		for (double v : s.values()) {
			std::snprintf(buf, sizeof(buf), ",%.17g", v);
			out << buf;
		}
		out << '\n';
	}
}

NormStats compute_norm_stats(std::span<const double> values) {
	if (values.empty()) {
		throw EmptyInputError("cannot normalize an empty series");
	}
	double mean = 0.0;
	for (double v : values) {
		mean += v;
	}
	mean /= static_cast<double>(values.size());
	double var = 0.0;
	for (double v : values) {
		var += (v - mean) * (v - mean);
	}
	var /= static_cast<double>(values.size());
	const double sd = std::sqrt(var);
	if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
		throw DegenerateSeriesError("series has zero variance");
	}
	return {mean, sd};
}

TimeSeries apply_norm(const TimeSeries& series, const NormStats& stats) {
	std::vector<double> z(series.values());
	for (double& v : z) {
		v = stats.apply(v);
	}
	return TimeSeries(series.id(), std::move(z), series.period());
}

std::pair<TimeSeries, NormStats> normalize(const TimeSeries& series) {
	const NormStats stats = compute_norm_stats(series.values());
	return {apply_norm(series, stats), stats};
}

std::pair<TimeSeries, TimeSeries> split_half(const TimeSeries& series) {
	const std::size_t n = series.size();
	if (n < 4) {
		throw LengthError("series '" + series.id() + "' too short to split: " + std::to_string(n) + " < 4");
	}
	const std::size_t half = n / 2;
	const auto& v = series.values();
	auto keep_period = [&](std::size_t len) -> std::optional<std::size_t> {
		if (series.period() && *series.period() < len) {
			return series.period();
		}
		return std::nullopt;
	};
	TimeSeries train(series.id(), std::vector<double>(v.begin(), v.begin() + half), keep_period(half));
	TimeSeries test(series.id(), std::vector<double>(v.begin() + half, v.end()), keep_period(n - half));
	return {std::move(train), std::move(test)};
}

std::size_t window_count(std::size_t length, const HorizonSpec& spec, std::size_t stride) {
	if (stride == 0) {
		throw ParameterError("stride must be positive");
	}
	if (length < spec.span()) {
		return 0;
	}
	return (length - spec.span()) / stride + 1;
}

SampleSet build_windows(const TimeSeries& series, const HorizonSpec& spec, std::size_t stride) {
	spec.validate();
	const std::size_t n = series.size();
	if (n < spec.span()) {
		throw InsufficientDataError("series '" + series.id() + "' has " + std::to_string(n) +
		                            " points, windows need " + std::to_string(spec.span()));
	}
	const std::size_t count = window_count(n, spec, stride);
	const auto& v = series.values();
	SampleSet set;
	set.spec = spec;
	set.source_id = series.id();
	set.samples.reserve(count);
	for (std::size_t k = 0; k < count; ++k) {
		const std::size_t t = spec.history - 1 + k * stride;
		const auto his_begin = v.begin() + static_cast<std::ptrdiff_t>(t + 1 - spec.history);
		const auto f_begin = v.begin() + static_cast<std::ptrdiff_t>(t + 1);
		const auto fut_begin = f_begin + static_cast<std::ptrdiff_t>(spec.horizon);
		WindowSample s;
		s.history.assign(his_begin, f_begin);
		s.target.assign(f_begin, fut_begin);
		s.future.assign(fut_begin, fut_begin + static_cast<std::ptrdiff_t>(spec.future));
		s.anchor = t;
		set.samples.push_back(std::move(s));
	}
	return set;
}

} // namespace twostage
