#include "twostage/training.hpp"

#include <numeric>

namespace twostage {

void TrainConfig::validate() const {
	if (epochs == 0) {
		throw ParameterError("epochs must be positive");
	}
	if (batch_size == 0) {
		throw ParameterError("batch size must be positive");
	}
	if (!(learning_rate > 0.0)) {
		throw ParameterError("learning rate must be positive");
	}
}

std::vector<std::size_t> epoch_order(std::size_t n, bool shuffle, Rng& rng) {
	std::vector<std::size_t> order(n);
	std::iota(order.begin(), order.end(), std::size_t{0});
	if (shuffle) {
		for (std::size_t i = n; i > 1; --i) {
			const auto j = static_cast<std::size_t>(rng.index(i));
			std::swap(order[i - 1], order[j]);
		}
	}
	return order;
}

nn::Matrix gather_columns(const nn::Matrix& source, std::span<const std::size_t> columns) {
	nn::Matrix out(source.rows(), static_cast<Eigen::Index>(columns.size()));
	for (std::size_t i = 0; i < columns.size(); ++i) {
		out.col(static_cast<Eigen::Index>(i)) = source.col(static_cast<Eigen::Index>(columns[i]));
	}
	return out;
}

} // namespace twostage
