#pragma once

#include "oracles.hpp"

#include "twostage/neuralnet.hpp"
#include "twostage/rng.hpp"

#include <algorithm>
#include <cmath>

namespace gradcheck {

using namespace twostage;

struct Outcome {
	double worst_relative = 0.0; // max over tensors of |a - n| / max(|a|, |n|)
	std::size_t tensors = 0;
};

// Relative error of two gradient tensors in the Euclidean norm.
inline double relative(const std::vector<double>& a, const std::vector<double>& n) {
	double diff = 0.0, na = 0.0, nn = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		diff += (a[i] - n[i]) * (a[i] - n[i]);
		na += a[i] * a[i];
		nn += n[i] * n[i];
	}
	const double scale = std::max(std::sqrt(na), std::sqrt(nn));
	return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

// Compares mlp_backward with central differences of the MSE loss for one
// random batch. Dropout (if any) uses a fixed mask by replaying the same seed.
inline Outcome check_stack(nn::MlpStack& stack, Rng& rng, std::size_t batch, double eps = 1e-5) {
	const auto in = static_cast<Eigen::Index>(stack.input_dim());
	const auto out = static_cast<Eigen::Index>(stack.output_dim());
	nn::Matrix x(in, static_cast<Eigen::Index>(batch)), y(out, static_cast<Eigen::Index>(batch));
	for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
	for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
	const std::uint64_t mask_seed = rng.next_u64();

	auto loss_of = [&](nn::ForwardCache* cache) {
		Rng mask(mask_seed);
		const auto mode = stack.dropout_rate > 0.0 ? nn::Mode::train(mask) : nn::Mode::eval();
		return nn::mse_loss(nn::mlp_forward(stack, x, mode, cache), y);
	};
	nn::ForwardCache cache;
	const auto loss = loss_of(&cache);
	const auto grads = nn::mlp_backward(stack, cache, loss.grad);

	Outcome o;
	auto spans = nn::parameter_spans(stack);
	for (std::size_t t = 0; t < spans.size(); ++t) {
		std::vector<double*> ptrs;
		for (double& v : spans[t]) ptrs.push_back(&v);
		const auto numeric = oracle::central_difference(ptrs, [&] { return loss_of(nullptr).loss; }, eps);
		const std::vector<double> analytic(grads.params[t].data(), grads.params[t].data() + grads.params[t].size());
		o.worst_relative = std::max(o.worst_relative, relative(analytic, numeric));
		++o.tensors;
	}
	// input gradient
	std::vector<double*> ptrs;
	for (Eigen::Index i = 0; i < x.size(); ++i) ptrs.push_back(x.data() + i);
	const auto numeric = oracle::central_difference(ptrs, [&] { return loss_of(nullptr).loss; }, eps);
	const std::vector<double> analytic(grads.input.data(), grads.input.data() + grads.input.size());
	o.worst_relative = std::max(o.worst_relative, relative(analytic, numeric));
	++o.tensors;
	return o;
}

// A random stack of 1..3 layers with widths 1..16.
inline nn::MlpStack random_stack(Rng& rng, bool layer_norm, double dropout) {
	nn::MlpShape shape;
	shape.input_dim = 1 + rng.index(16);
	const std::size_t layers = 1 + rng.index(3);
	for (std::size_t i = 0; i + 1 < layers; ++i) shape.hidden.push_back(2 + rng.index(15));
	shape.output_dim = 1 + rng.index(16);
	shape.layer_norm = layer_norm;
	shape.dropout_rate = dropout;
	auto stack = nn::make_mlp(shape, rng);
	// non-trivial biases and gains so every parameter matters
	for (auto& l : stack.layers) {
		for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = 0.3 * rng.normal();
		if (l.norm) {
			for (Eigen::Index i = 0; i < l.norm->gain.size(); ++i) {
				l.norm->gain[i] = 1.0 + 0.3 * rng.normal();
				l.norm->bias[i] = 0.3 * rng.normal();
			}
		}
	}
	return stack;
}

} // namespace gradcheck
