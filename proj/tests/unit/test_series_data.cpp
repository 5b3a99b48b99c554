#include "twostage/errors.hpp"
#include "twostage/rng.hpp"
#include "twostage/series_data.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

using namespace twostage;

namespace {

std::vector<TimeSeries> parse(const std::string& text) {
	std::istringstream in(text);
	return parse_series_csv(in);
}

std::vector<double> iota(std::size_t n) {
	std::vector<double> v(n);
	std::iota(v.begin(), v.end(), 0.0);
	return v;
}

} // namespace

TEST_CASE("TimeSeries invariants") {
	CHECK_THROWS_AS(TimeSeries("a", {1.0}), LengthError);
	CHECK_THROWS_AS(TimeSeries("a", {1.0, NAN}), ParameterError);
	CHECK_THROWS_AS(TimeSeries("a", {1.0, INFINITY}), ParameterError);
	CHECK_THROWS_AS(TimeSeries("a", {1.0, 2.0}, 2), ParameterError);
	CHECK_THROWS_AS(TimeSeries("a", {1.0, 2.0}, 0), ParameterError);
	CHECK(TimeSeries("a", {1.0, 2.0, 3.0}, 2).period() == 2);
}

TEST_CASE("csv parsing") {
	const auto s = parse("H1,1.0,2.0,3.0\n");
	REQUIRE(s.size() == 1);
	CHECK(s[0].id() == "H1");
	CHECK(s[0].values() == std::vector<double>{1, 2, 3});
	CHECK_FALSE(s[0].period());

	SUBCASE("bad cell names row and column") {
		try {
			parse("H1,1,2\nH2,1.0,x,3.0\n");
			FAIL("expected ParseError");
		} catch (const ParseError& e) {
			const std::string msg = e.what();
			CHECK(msg.find("row 2") != std::string::npos);
			CHECK(msg.find("column 3") != std::string::npos);
		}
	}
	SUBCASE("ragged rows, trailing empties, quotes, blank lines and header") {
		const auto r = parse("V1,V2,V3,V4\n\"H1\",\"1\",2,,\n\nH2,5,6,7,8\r\n");
		REQUIRE(r.size() == 2);
		CHECK(r[0].values() == std::vector<double>{1, 2});
		CHECK(r[1].values() == std::vector<double>{5, 6, 7, 8});
	}
	SUBCASE("empty input") {
		CHECK_THROWS_AS(parse(""), EmptyInputError);
		CHECK_THROWS_AS(parse("\n\n"), EmptyInputError);
	}
	SUBCASE("missing file") {
		CHECK_THROWS_AS(load_series_csv("/nonexistent/file.csv"), Error);
	}
}

TEST_CASE("csv round trip is exact") {
	Rng rng(5);
	std::vector<TimeSeries> in;
	for (int s = 0; s < 3; ++s) {
		std::vector<double> v(10 + s);
		for (double& x : v) x = rng.normal() * 1e3;
		in.emplace_back("S" + std::to_string(s), v);
	}
	const auto path = std::filesystem::temp_directory_path() / "twostage_roundtrip.csv";
	write_series_csv(path, in);
	const auto out = load_series_csv(path);
	REQUIRE(out.size() == in.size());
	for (std::size_t i = 0; i < in.size(); ++i) {
		CHECK(out[i].id() == in[i].id());
		CHECK(out[i].values() == in[i].values());
	}
	std::filesystem::remove(path);
}

TEST_CASE("normalize") {
	auto [a, sa] = normalize(TimeSeries("a", {1, 3}));
	CHECK(sa.mean == 2.0);
	CHECK(sa.std == 1.0);
	CHECK(a.values() == std::vector<double>{-1, 1});
	CHECK_THROWS_AS(normalize(TimeSeries("z", {0, 0, 0})), DegenerateSeriesError);
	auto [b, sb] = normalize(TimeSeries("b", {2, 4, 6, 8}));
	CHECK(sb.mean == 5.0);
	CHECK(sb.std == doctest::Approx(2.23607).epsilon(1e-5));
	const double expect[] = {-1.3416, -0.4472, 0.4472, 1.3416};
	for (int i = 0; i < 4; ++i) CHECK(b.values()[i] == doctest::Approx(expect[i]).epsilon(1e-4));
	CHECK(sb.invert(sb.apply(3.25)) == doctest::Approx(3.25));
}

TEST_CASE("normalized training half has zero mean and unit variance") {
	Rng rng(11);
	std::vector<double> v(501);
	for (double& x : v) x = 10.0 + 4.0 * rng.normal();
	const auto [train, test] = split_half(TimeSeries("r", v));
	const auto stats = compute_norm_stats(train.values());
	const auto z = apply_norm(train, stats);
	double m = 0.0, var = 0.0;
	for (double x : z.values()) m += x;
	m /= static_cast<double>(z.size());
	for (double x : z.values()) var += (x - m) * (x - m);
	var /= static_cast<double>(z.size());
	CHECK(std::fabs(m) < 1e-9);
	CHECK(std::fabs(var - 1.0) < 1e-9);
}

TEST_CASE("split_half") {
	auto [a, b] = split_half(TimeSeries("s", iota(10)));
	CHECK(a.size() == 5);
	CHECK(b.size() == 5);
	auto [c, d] = split_half(TimeSeries("s", iota(9)));
	CHECK(c.size() == 4);
	CHECK(d.size() == 5);
	std::vector<double> joined = c.values();
	joined.insert(joined.end(), d.values().begin(), d.values().end());
	CHECK(joined == iota(9));
	CHECK_THROWS_AS(split_half(TimeSeries("s", iota(3))), LengthError);
}

TEST_CASE("build_windows examples") {
	const TimeSeries s("s", iota(10));
	const auto set = build_windows(s, {3, 2, 2}, 1);
	REQUIRE(set.size() == 4);
	CHECK(set.samples[0].history == std::vector<double>{0, 1, 2});
	CHECK(set.samples[0].target == std::vector<double>{3, 4});
	CHECK(set.samples[0].future == std::vector<double>{5, 6});
	CHECK(set.samples[3].future == std::vector<double>{8, 9});

	const auto h0 = build_windows(s, {3, 2, 0}, 1);
	for (const auto& w : h0.samples) CHECK(w.future.empty());

	CHECK(build_windows(TimeSeries("s", iota(7)), {3, 2, 2}, 1).size() == 1);
	CHECK_THROWS_AS(build_windows(TimeSeries("s", iota(6)), {3, 2, 2}, 1), InsufficientDataError);
	CHECK_THROWS_AS(build_windows(s, {0, 2, 2}, 1), ParameterError);
}

TEST_CASE("window slices are contiguous and counts follow the formula") {
	Rng rng(2);
	for (int trial = 0; trial < 200; ++trial) {
		const std::size_t n = 5 + rng.index(60);
		const HorizonSpec spec{1 + rng.index(6), 1 + rng.index(4), rng.index(4)};
		const std::size_t stride = 1 + rng.index(3);
		const TimeSeries s("s", iota(n));
		if (n < spec.span()) {
			CHECK(window_count(n, spec, stride) == 0);
			CHECK_THROWS_AS(build_windows(s, spec, stride), InsufficientDataError);
			continue;
		}
		const auto set = build_windows(s, spec, stride);
		CHECK(set.size() == (n - spec.span()) / stride + 1);
		CHECK(set.size() == window_count(n, spec, stride));
		for (const auto& w : set.samples) {
			std::vector<double> cat = w.history;
			cat.insert(cat.end(), w.target.begin(), w.target.end());
			cat.insert(cat.end(), w.future.begin(), w.future.end());
			const double first = static_cast<double>(w.anchor + 1 - spec.history);
			for (std::size_t i = 0; i < cat.size(); ++i) REQUIRE(cat[i] == first + static_cast<double>(i));
			CHECK(w.anchor + spec.horizon + spec.future < n);
		}
	}
}
