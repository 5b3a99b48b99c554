#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace twostage {

/// Seeded random stream. Distributions are computed by hand from the raw
/// mt19937_64 output so that sequences do not depend on the standard
/// library's distribution implementations.
class Rng {
public:
	explicit Rng(std::uint64_t seed) : engine_(seed) {}

	std::uint64_t next_u64() { return engine_(); }

	/// Uniform in [0, 1) with 53 bits of resolution.
	double uniform();

	/// Uniform in [lo, hi).
	double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

	/// Uniform integer in [0, n). n must be positive.
	std::uint64_t index(std::uint64_t n);

	/// Standard normal via Box-Muller (no cached second variate).
	double normal();

	bool bernoulli(double p) { return uniform() < p; }

private:
	std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives a child seed from a master seed and a path of integer labels:
/// s = mix64(master); for each label l: s = mix64(s ^ mix64(l + 1)).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view text);

} // namespace twostage
