#include "oracles.hpp"

#include "twostage/errors.hpp"
#include "twostage/metrics.hpp"
#include "twostage/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace twostage;

namespace {

PointErrors make(const std::vector<double>& x, const std::vector<double>& xh) {
	PointErrors e;
	for (std::size_t i = 0; i < x.size(); ++i) e.add(i, x[i], xh[i]);
	return e;
}

oracle::Kind to_oracle(MetricKind k) {
	switch (k) {
		case MetricKind::Mape: return oracle::Kind::Mape;
		case MetricKind::Rmspe: return oracle::Kind::Rmspe;
		case MetricKind::Rmse: return oracle::Kind::Rmse;
		case MetricKind::Mae: return oracle::Kind::Mae;
	}
	return oracle::Kind::Mae;
}

constexpr MetricKind kAll[] = {MetricKind::Mape, MetricKind::Rmspe, MetricKind::Rmse, MetricKind::Mae};

bool close(double a, double b, double tol = 1e-12) { return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b)); }

} // namespace

TEST_CASE("mape examples") {
	CHECK(mape(make({1, 2, 4}, {1, 2, 4})) == 0.0);
	CHECK(mape(make({1, 2, 4}, {1, 1, 2})) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
	CHECK_THROWS_AS(mape(make({1e-12}, {1})), UndefinedMetricError);
}

TEST_CASE("rmspe examples") {
	CHECK(rmspe(make({1, 2}, {1, 2})) == 0.0);
	CHECK(rmspe(make({1, 2}, {2, 1})) == doctest::Approx(std::sqrt(0.625)).epsilon(1e-15));
	CHECK(rmspe(make({2}, {1})) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("rmse and mae examples") {
	CHECK(rmse(make({0, 0}, {3, 4})) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
	CHECK(mae(make({1, -1}, {0, 0})) == 1.0);
	CHECK(mae(make({1, 2, 3}, {2, 2, 2})) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
	CHECK(rmse(make({1, 2, 3}, {1, 2, 3})) == 0.0);
	CHECK_THROWS_AS(mae(PointErrors{}), UndefinedMetricError);
}

TEST_CASE("zero guard keeps the point for rmse and mae") {
	const auto e = make({0.0, 2.0}, {1.0, 1.0});
	CHECK(mape(e) == 0.5);
	CHECK(mae(e) == 1.0);
	MetricOptions opts;
	opts.zero_guard = 0.0;
	CHECK(std::isinf(mape(e, opts)));
}

TEST_CASE("trim examples") {
	std::vector<double> x(20, 1.0), xh(20, 1.0);
	xh[7] = 101.0;
	const auto e = make(x, xh);
	CHECK(trimmed(MetricKind::Mae, e, 0.95) == 0.0);
	CHECK(mae(e) == doctest::Approx(5.0));
	for (MetricKind k : kAll) CHECK(trimmed(k, e, 1.0) == metric(k, e));
	CHECK_THROWS_AS(trimmed(MetricKind::Mae, e, 0.0), ParameterError);
	CHECK_THROWS_AS(trimmed(MetricKind::Mae, e, 1.5), ParameterError);
	// n = 19 drops floor(0.95) = 0 points
	const auto e19 = make(std::vector<double>(x.begin(), x.begin() + 19), std::vector<double>(xh.begin(), xh.begin() + 19));
	CHECK(trimmed(MetricKind::Mae, e19, 0.95) == mae(e19));
}

TEST_CASE("absolute-error trim drops the same points for every metric") {
	MetricOptions opts;
	opts.trim_rule = TrimRule::AbsoluteError;
	std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 0.01};
	std::vector<double> xh = x;
	xh[3] += 5.0;      // biggest absolute error
	xh[19] += 0.5;     // biggest relative error
	const auto e = make(x, xh);
	// per-metric MAPE trim drops point 19; absolute-error trim drops point 3
	CHECK(trimmed(MetricKind::Mape, e, 0.95) == doctest::Approx(5.0 / 4.0 / 19.0));
	CHECK(trimmed(MetricKind::Mape, e, 0.95, opts) == doctest::Approx(50.0 / 19.0));
}

TEST_CASE("metrics match the naive oracle on random instances") {
	Rng rng(42);
	for (int trial = 0; trial < 300; ++trial) {
		const std::size_t n = 1 + rng.index(60);
		std::vector<double> x(n), xh(n);
		for (std::size_t i = 0; i < n; ++i) {
			x[i] = rng.normal() * 3.0;
			xh[i] = x[i] + rng.normal();
		}
		const auto e = make(x, xh);
		for (MetricKind k : kAll) {
			const auto ok = to_oracle(k);
			CHECK(close(metric(k, e), oracle::metric(ok, x, xh)));
			CHECK(close(trimmed(k, e, 0.95), oracle::trimmed(ok, x, xh, 950000)));
			CHECK(close(trimmed(k, e, 0.8), oracle::trimmed(ok, x, xh, 800000)));
			CHECK(trimmed(k, e, 0.95) <= metric(k, e));
		}
		CHECK(rmse(e) >= mae(e));
		CHECK(rmspe(e) >= mape(e));
	}
}

TEST_CASE("single point: rmspe equals mape exactly") {
	Rng rng(11);
	for (int i = 0; i < 2000; ++i) {
		const double x = rng.normal() * 2.0 + 3.0, xh = x + rng.normal() * 0.5;
		const auto e = make({x}, {xh});
		CHECK(rmspe(e) == mape(e));
		CHECK(rmse(e) == mae(e));
	}
}

TEST_CASE("scale behaviour") {
	Rng rng(3);
	std::vector<double> x(50), xh(50), cx(50), cxh(50);
	const double c = 3.7;
	for (int i = 0; i < 50; ++i) {
		x[i] = rng.normal() + 0.2;
		xh[i] = rng.normal();
		cx[i] = c * x[i];
		cxh[i] = c * xh[i];
	}
	const auto a = make(x, xh), b = make(cx, cxh);
	CHECK(std::fabs(mape(a) - mape(b)) <= 1e-12 * mape(a));
	CHECK(std::fabs(rmspe(a) - rmspe(b)) <= 1e-12 * rmspe(a));
	CHECK(std::fabs(c * rmse(a) - rmse(b)) <= 1e-12 * rmse(b));
	CHECK(std::fabs(c * mae(a) - mae(b)) <= 1e-12 * mae(b));
}

TEST_CASE("evaluate fills all eight values in column order") {
	const auto e = make({1, 2, 4}, {1, 1, 2});
	const auto r = evaluate(e, {}, "s");
	const auto v = r.values();
	REQUIRE(v.size() == 8);
	CHECK(v[0] == mape(e));
	CHECK(v[2] == rmspe(e));
	CHECK(v[4] == rmse(e));
	CHECK(v[6] == mae(e));
	CHECK(r.series_id == "s");
	CHECK_FALSE(r.s1_mse);
	const auto r2 = evaluate(e, {}, "s", Stage1Errors{6.0, 3});
	CHECK(*r2.s1_mse == 2.0);
}

TEST_CASE("aggregate") {
	auto one = evaluate_series(make({1, 2}, {1.1, 2.0}), {}, "a");
	std::vector<SeriesEvaluation> single{one};
	for (auto mode : {AggregationMode::Macro, AggregationMode::Pooled}) {
		const auto agg = aggregate(single, mode);
		CHECK(agg.values() == one.report.values());
	}

	auto a = evaluate_series(make({1, 1}, {1.1, 1.1}), {}, "a");
	auto b = evaluate_series(make({1, 1}, {1.3, 1.3}), {}, "b");
	std::vector<SeriesEvaluation> two{a, b};
	CHECK(aggregate(two, AggregationMode::Macro).mae == doctest::Approx(0.2));
	CHECK_THROWS_AS(aggregate(std::span<const SeriesEvaluation>{}, AggregationMode::Macro), EmptyInputError);

	// unequal lengths: pooled weights points, macro weights series
	auto c = evaluate_series(make({1}, {2.0}), {}, "c");
	auto d = evaluate_series(make({1, 1, 1}, {1, 1, 1}), {}, "d");
	std::vector<SeriesEvaluation> cd{c, d};
	CHECK(aggregate(cd, AggregationMode::Macro).mae == doctest::Approx(0.5));
	CHECK(aggregate(cd, AggregationMode::Pooled).mae == doctest::Approx(0.25));
}

TEST_CASE("aggregates match the oracle") {
	Rng rng(9);
	for (int trial = 0; trial < 50; ++trial) {
		const std::size_t m = 1 + rng.index(5);
		std::vector<std::vector<double>> xs(m), xhs(m);
		std::vector<SeriesEvaluation> evals;
		for (std::size_t s = 0; s < m; ++s) {
			const std::size_t n = 1 + rng.index(40);
			for (std::size_t i = 0; i < n; ++i) {
				xs[s].push_back(rng.normal() * 2.0);
				xhs[s].push_back(xs[s].back() + rng.normal());
			}
			evals.push_back(evaluate_series(make(xs[s], xhs[s]), {}, "s"));
		}
		const auto pooled = aggregate(evals, AggregationMode::Pooled);
		const auto macro = aggregate(evals, AggregationMode::Macro);
		CHECK(close(pooled.mae, oracle::pooled(oracle::Kind::Mae, xs, xhs, 1000000)));
		CHECK(close(pooled.mae95, oracle::pooled(oracle::Kind::Mae, xs, xhs, 950000)));
		CHECK(close(pooled.rmspe95, oracle::pooled(oracle::Kind::Rmspe, xs, xhs, 950000)));
		double mean_rmse = 0.0;
		for (std::size_t s = 0; s < m; ++s) mean_rmse += oracle::metric(oracle::Kind::Rmse, xs[s], xhs[s]);
		CHECK(close(macro.rmse, mean_rmse / static_cast<double>(m)));
	}
}

TEST_CASE("stage-1 mse is aggregated only when every series has it") {
	auto a = evaluate_series(make({1}, {1}), {}, "a", Stage1Errors{1.0, 1});
	auto b = evaluate_series(make({1}, {1}), {}, "b", Stage1Errors{3.0, 1});
	auto c = evaluate_series(make({1}, {1}), {}, "c");
	std::vector<SeriesEvaluation> ab{a, b}, ac{a, c};
	CHECK(*aggregate(ab, AggregationMode::Macro).s1_mse == 2.0);
	CHECK(*aggregate(ab, AggregationMode::Pooled).s1_mse == 2.0);
	CHECK_FALSE(aggregate(ac, AggregationMode::Macro).s1_mse);
}
