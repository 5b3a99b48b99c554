#pragma once

#include "twostage/neuralnet.hpp"
#include "twostage/rng.hpp"

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace twostage {

struct TrainConfig {
	std::size_t epochs = 20;
	double learning_rate = 0.01;
	std::size_t batch_size = 64;
	std::uint64_t seed = 0;
	bool shuffle = true;

	/// Throws ParameterError on zero epochs/batch or a non-positive rate.
	void validate() const;
};

struct TrainResult {
	/// Mean training loss of each epoch (sample-weighted over minibatches).
	std::vector<double> loss_trace;
	std::size_t steps = 0;
};

/// Anything with a cached forward, a backward producing a GradientSet in its
/// own parameter order, and an in-place gradient step.
template <class M>
concept Trainable = requires(M& m, const M& cm, const nn::Matrix& x, typename M::Cache& cache,
                             const nn::GradientSet& g, Rng& rng) {
	{ cm.forward(x, nn::Mode::train(rng), &cache) } -> std::convertible_to<nn::Matrix>;
	{ cm.backward(cache, x) } -> std::convertible_to<nn::GradientSet>;
	{ m.apply_gradients(g, 0.1) };
};

/// Called with each minibatch's input matrix before its forward pass.
using BatchObserver = std::function<void(const nn::Matrix& inputs)>;

/// Epoch order: identity, or a Fisher-Yates shuffle drawn from `rng`.
std::vector<std::size_t> epoch_order(std::size_t n, bool shuffle, Rng& rng);

/// Copies the selected columns into a dense batch.
nn::Matrix gather_columns(const nn::Matrix& source, std::span<const std::size_t> columns);

/// Minibatch SGD on MSE: epochs x ceil(N / batch_size) steps, one Rng
/// (seeded from config.seed) drives both shuffling and dropout.
/// `inputs` and `targets` hold one sample per column.
template <Trainable M>
TrainResult train_loop(M& model, const nn::Matrix& inputs, const nn::Matrix& targets, const TrainConfig& config,
                       const BatchObserver& observer = {});

} // namespace twostage

#include "twostage/errors.hpp"

namespace twostage {

template <Trainable M>
TrainResult train_loop(M& model, const nn::Matrix& inputs, const nn::Matrix& targets, const TrainConfig& config,
                       const BatchObserver& observer) {
	config.validate();
	if (inputs.cols() == 0) {
		throw InsufficientDataError("training set is empty");
	}
	if (inputs.cols() != targets.cols()) {
		throw ShapeError("inputs and targets have different sample counts");
	}
	const auto n = static_cast<std::size_t>(inputs.cols());
	Rng rng(config.seed);
	TrainResult result;
	result.loss_trace.reserve(config.epochs);
	typename M::Cache cache;
	for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
		const auto order = epoch_order(n, config.shuffle, rng);
		double weighted_loss = 0.0;
		for (std::size_t start = 0; start < n; start += config.batch_size) {
			const std::size_t stop = std::min(n, start + config.batch_size);
			const std::span<const std::size_t> cols(order.data() + start, stop - start);
			const nn::Matrix x = gather_columns(inputs, cols);
			const nn::Matrix y = gather_columns(targets, cols);
			if (observer) {
				observer(x);
			}
			const nn::Matrix pred = model.forward(x, nn::Mode::train(rng), &cache);
			const auto loss = nn::mse_loss(pred, y);
			model.apply_gradients(model.backward(cache, loss.grad), config.learning_rate);
			weighted_loss += loss.loss * static_cast<double>(cols.size());
			++result.steps;
		}
		result.loss_trace.push_back(weighted_loss / static_cast<double>(n));
	}
	return result;
}

} // namespace twostage
