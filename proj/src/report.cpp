#include "twostage/report.hpp"

#include "twostage/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace twostage {

namespace {

void check_row(const ReportRow& row) {
	if (!is_report_label(row.model)) {
		throw ParameterError("unknown report label '" + row.model + "'");
	}
	for (double v : row.metrics.values()) {
		if (!(v >= 0.0)) {
			throw ParameterError("report metric must be a non-negative number");
		}
	}
}

std::string csv_cell(const std::string& s) {
	if (s.find_first_of(",\"\n") == std::string::npos) {
		return s;
	}
	std::string out = "\"";
	for (char c : s) {
		if (c == '"') {
			out += '"';
		}
		out += c;
	}
	return out + "\"";
}

void append_tail(std::string& line, const ReportRow& row) {
	for (double v : row.metrics.values()) {
		line += ',';
		line += format_value(v);
	}
	line += ',';
	if (row.metrics.s1_mse) {
		line += format_value(*row.metrics.s1_mse);
	}
	line += ',';
	line += std::to_string(row.seed);
	line += '\n';
}

nlohmann::ordered_json row_json(const ReportRow& row) {
	nlohmann::ordered_json j;
	j["experiment"] = row.experiment;
	j["model"] = row.model;
	j["h"] = row.horizon;
	j["H"] = row.future;
	const auto& m = row.metrics;
	j["mape"] = m.mape;
	j["mape95"] = m.mape95;
	j["rmspe"] = m.rmspe;
	j["rmspe95"] = m.rmspe95;
	j["rmse"] = m.rmse;
	j["rmse95"] = m.rmse95;
	j["mae"] = m.mae;
	j["mae95"] = m.mae95;
	j["s1_mse"] = m.s1_mse ? nlohmann::ordered_json(*m.s1_mse) : nlohmann::ordered_json(nullptr);
	j["seed"] = row.seed;
	return j;
}

} // namespace

bool is_report_label(std::string_view label) {
	return std::find(std::begin(kReportLabels), std::end(kReportLabels), label) != std::end(kReportLabels);
}

std::string format_value(double v) {
	char buf[32];
	std::snprintf(buf, sizeof(buf), "%.9g", v);
	return buf;
}

std::string render_report_csv(std::span<const ReportRow> rows) {
	std::string out(kReportHeader);
	out += '\n';
	for (const auto& row : rows) {
		check_row(row);
		std::string line = csv_cell(row.experiment) + ',' + row.model + ',' + std::to_string(row.horizon) + ',' +
		                   std::to_string(row.future);
		append_tail(line, row);
		out += line;
	}
	return out;
}

std::string render_series_csv(std::span<const ReportRow> rows) {
	std::string out(kSeriesReportHeader);
	out += '\n';
	for (const auto& row : rows) {
		check_row(row);
		std::string line = csv_cell(row.experiment) + ',' + row.model + ',' + std::to_string(row.horizon) + ',' +
		                   std::to_string(row.future) + ',' + csv_cell(row.metrics.series_id);
		append_tail(line, row);
		out += line;
	}
	return out;
}

std::string render_report_json(std::string_view experiment, std::string_view config_text,
                               std::string_view headline, std::span<const ReportRow> macro,
                               std::span<const ReportRow> pooled) {
	nlohmann::ordered_json j;
	j["experiment"] = experiment;
	j["headline_aggregation"] = headline;
	j["config"] = config_text;
	auto& m = j["rows"]["macro"] = nlohmann::ordered_json::array();
	for (const auto& r : macro) {
		check_row(r);
		m.push_back(row_json(r));
	}
	auto& p = j["rows"]["pooled"] = nlohmann::ordered_json::array();
	for (const auto& r : pooled) {
		check_row(r);
		p.push_back(row_json(r));
	}
	return j.dump(2) + "\n";
}

std::string render_timing_json(std::span<const ReportRow> rows) {
	nlohmann::json arr = nlohmann::ordered_json::array();
	for (const auto& r : rows) {
		arr.push_back({{"model", r.model}, {"h", r.horizon}, {"H", r.future}, {"wall_seconds", r.wall_seconds}});
	}
	return arr.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
	if (path.has_parent_path()) {
		std::filesystem::create_directories(path.parent_path());
	}
	auto tmp = path;
	tmp += ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if (!out) {
			throw Error("cannot write '" + path.string() + "'");
		}
		out.write(text.data(), static_cast<std::streamsize>(text.size()));
		if (!out) {
			throw Error("write failed for '" + path.string() + "'");
		}
	}
	std::filesystem::rename(tmp, path);
}

} // namespace twostage
