#include "twostage/rng.hpp"

#include <cmath>
#include <numbers>

namespace twostage {

double Rng::uniform() {
	return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::index(std::uint64_t n) {
	// Rejection sampling avoids modulo bias.
	const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
	std::uint64_t r = engine_();
	while (r >= limit) {
		r = engine_();
	}
	return r % n;
}

double Rng::normal() {
	double u1 = uniform();
	while (u1 <= 0.0) {
		u1 = uniform();
	}
	const double u2 = uniform();
	return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix64(std::uint64_t x) {
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
	std::uint64_t s = mix64(master);
	for (std::uint64_t label : path) {
		s = mix64(s ^ mix64(label + 1));
	}
	return s;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t state) {
	for (unsigned char b : bytes) {
		state ^= b;
		state *= 0x100000001b3ULL;
	}
	return state;
}

std::uint64_t fnv1a64(std::string_view text) {
	return fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

} // namespace twostage
