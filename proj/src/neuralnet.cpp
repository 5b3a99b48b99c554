#include "twostage/neuralnet.hpp"

#include "twostage/errors.hpp"

#include <cmath>
#include <string>

namespace twostage::nn {

namespace {

bool all_finite(const Matrix& m) {
	return m.allFinite();
}

void require_rows(const Matrix& m, std::size_t rows, const char* what) {
	require_same_size(static_cast<std::size_t>(m.rows()), rows, what);
}

} // namespace

void MlpStack::validate() const {
	if (layers.empty()) {
		throw ParameterError("MLP stack has no layers");
	}
	if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
		throw ParameterError("dropout rate must lie in [0, 1)");
	}
	for (std::size_t i = 0; i < layers.size(); ++i) {
		const auto& l = layers[i];
		require_same_size(static_cast<std::size_t>(l.bias.size()), l.out_dim(), "layer bias");
		if (i > 0) {
			require_same_size(l.in_dim(), layers[i - 1].out_dim(), "layer chaining");
		}
		if (!all_finite(l.weight) || !l.bias.allFinite()) {
			throw ParameterError("layer " + std::to_string(i) + " has non-finite parameters");
		}
		if (l.norm) {
			require_same_size(static_cast<std::size_t>(l.norm->gain.size()), l.out_dim(), "layer norm gain");
			require_same_size(static_cast<std::size_t>(l.norm->bias.size()), l.out_dim(), "layer norm bias");
		}
	}
}

void xavier_uniform(Matrix& weight, Rng& rng) {
	const double a = std::sqrt(6.0 / static_cast<double>(weight.rows() + weight.cols()));
	// Row-major fill order so the draw sequence matches the serialized layout.
	for (Eigen::Index r = 0; r < weight.rows(); ++r) {
		for (Eigen::Index c = 0; c < weight.cols(); ++c) {
			weight(r, c) = rng.uniform(-a, a);
		}
	}
}

MlpStack make_mlp(const MlpShape& shape, Rng& rng) {
	if (shape.input_dim == 0 || shape.output_dim == 0) {
		throw ParameterError("MLP input and output dimensions must be positive");
	}
	for (std::size_t w : shape.hidden) {
		if (w == 0) {
			throw ParameterError("MLP hidden widths must be positive");
		}
	}
	MlpStack stack;
	stack.dropout_rate = shape.dropout_rate;
	stack.use_layer_norm = shape.layer_norm;
	std::size_t in = shape.input_dim;
	auto add_layer = [&](std::size_t out, bool hidden) {
		DenseLayer layer;
		layer.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
		xavier_uniform(layer.weight, rng);
		layer.bias = Vector::Zero(static_cast<Eigen::Index>(out));
		layer.activation = hidden ? Activation::ReLU : Activation::Identity;
		if (hidden && shape.layer_norm) {
			layer.norm = LayerNormParams{Vector::Ones(static_cast<Eigen::Index>(out)),
			                             Vector::Zero(static_cast<Eigen::Index>(out))};
		}
		stack.layers.push_back(std::move(layer));
		in = out;
	};
	for (std::size_t w : shape.hidden) {
		add_layer(w, true);
	}
	add_layer(shape.output_dim, false);
	stack.validate();
	return stack;
}

Matrix layer_norm_forward(const Matrix& x, const Vector& gain, const Vector& bias, double eps,
                          LayerNormCache* cache) {
	require_same_size(static_cast<std::size_t>(gain.size()), static_cast<std::size_t>(x.rows()), "layer norm gain");
	require_same_size(static_cast<std::size_t>(bias.size()), static_cast<std::size_t>(x.rows()), "layer norm bias");
	if (x.rows() == 0) {
		throw ShapeError("layer norm over an empty vector");
	}
	const double n = static_cast<double>(x.rows());
	const Eigen::RowVectorXd mean = x.colwise().sum() / n;
	Matrix centered = x.rowwise() - mean;
	const Eigen::RowVectorXd var = centered.array().square().colwise().sum() / n;
	Eigen::RowVectorXd inv_std(x.cols());
	for (Eigen::Index c = 0; c < x.cols(); ++c) {
		const double denom = var(c) + eps;
		inv_std(c) = denom > 0.0 ? 1.0 / std::sqrt(denom) : 0.0;
	}
	Matrix normalized = centered.array().rowwise() * inv_std.array();
	Matrix y = (normalized.array().colwise() * gain.array()).colwise() + bias.array();
	if (cache) {
		cache->normalized = std::move(normalized);
		cache->inv_std = inv_std.transpose();
	}
	return y;
}

std::pair<Vector, LayerNormCache> layer_norm_forward(const Vector& x, const Vector& gain, const Vector& bias,
                                                     double eps) {
	LayerNormCache cache;
	Matrix y = layer_norm_forward(Matrix(x), gain, bias, eps, &cache);
	return {Vector(y.col(0)), std::move(cache)};
}

LayerNormGrads layer_norm_backward(const LayerNormCache& cache, const Vector& gain, const Matrix& upstream) {
	const Matrix& xhat = cache.normalized;
	if (upstream.rows() != xhat.rows() || upstream.cols() != xhat.cols()) {
		throw ShapeError("layer norm upstream gradient does not match cached batch");
	}
	const double n = static_cast<double>(xhat.rows());
	LayerNormGrads g;
	g.gain = (upstream.array() * xhat.array()).rowwise().sum();
	g.bias = upstream.rowwise().sum();
	const Matrix dxhat = upstream.array().colwise() * gain.array();
	const Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
	const Eigen::RowVectorXd sum_dx = (dxhat.array() * xhat.array()).colwise().sum();
	Matrix dx = (n * dxhat).rowwise() - sum_d;
	dx -= (xhat.array().rowwise() * sum_dx.array()).matrix();
	dx = dx.array().rowwise() * (cache.inv_std.transpose().array() / n);
	g.input = std::move(dx);
	return g;
}

std::pair<Matrix, Matrix> dropout(const Matrix& x, double rate, Rng& rng) {
	if (!(rate >= 0.0 && rate < 1.0)) {
		throw ParameterError("dropout rate must lie in [0, 1)");
	}
	if (rate == 0.0) {
		return {x, Matrix::Ones(x.rows(), x.cols())};
	}
	const double scale = 1.0 / (1.0 - rate);
	Matrix mask(x.rows(), x.cols());
	Matrix y(x.rows(), x.cols());
	for (Eigen::Index c = 0; c < x.cols(); ++c) {
		for (Eigen::Index r = 0; r < x.rows(); ++r) {
			const bool keep = rng.uniform() >= rate;
			mask(r, c) = keep ? 1.0 : 0.0;
			y(r, c) = keep ? x(r, c) * scale : 0.0;
		}
	}
	return {std::move(y), std::move(mask)};
}

std::pair<Vector, Vector> dropout(const Vector& x, double rate, Rng& rng) {
	auto [y, mask] = dropout(Matrix(x), rate, rng);
	return {Vector(y.col(0)), Vector(mask.col(0))};
}

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
	if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
		throw ShapeError("mse_loss: prediction and target shapes differ");
	}
	if (pred.size() == 0) {
		throw ShapeError("mse_loss: empty input");
	}
	const Matrix diff = pred - target;
	const double count = static_cast<double>(diff.size());
	return {diff.squaredNorm() / count, (2.0 / count) * diff};
}

std::pair<double, Vector> mse_loss(const Vector& pred, const Vector& target) {
	require_same_size(static_cast<std::size_t>(pred.size()), static_cast<std::size_t>(target.size()), "mse_loss");
	auto r = mse_loss(Matrix(pred), Matrix(target));
	return {r.loss, Vector(r.grad.col(0))};
}

Matrix mlp_forward(const MlpStack& stack, const Matrix& x, Mode mode, ForwardCache* cache) {
	if (stack.layers.empty()) {
		throw ParameterError("MLP stack has no layers");
	}
	require_rows(x, stack.input_dim(), "MLP input");
	if (cache) {
		cache->layers.clear();
		cache->layers.reserve(stack.layers.size());
		cache->revision = stack.revision;
		cache->batch = static_cast<std::size_t>(x.cols());
		cache->valid = false;
	}
	Matrix a = x;
	for (std::size_t i = 0; i < stack.layers.size(); ++i) {
		const DenseLayer& layer = stack.layers[i];
		const bool last = i + 1 == stack.layers.size();
		LayerCache lc;
		Matrix z = layer.weight * a;
		z.colwise() += layer.bias;
		if (layer.norm) {
			LayerNormCache nc;
			z = layer_norm_forward(z, layer.norm->gain, layer.norm->bias, kLayerNormEps, cache ? &nc : nullptr);
			if (cache) {
				lc.norm = std::move(nc);
			}
		}
		Matrix out = layer.activation == Activation::ReLU ? Matrix(z.cwiseMax(0.0)) : z;
		if (!last && mode.training() && stack.dropout_rate > 0.0) {
			auto [dropped, mask] = dropout(out, stack.dropout_rate, mode.rng());
			out = std::move(dropped);
			if (cache) {
				lc.dropout_mask = std::move(mask);
			}
		}
		if (cache) {
			lc.input = std::move(a);
			lc.pre_activation = std::move(z);
			cache->layers.push_back(std::move(lc));
		}
		a = std::move(out);
	}
	if (cache) {
		cache->valid = true;
	}
	return a;
}

Vector mlp_forward(const MlpStack& stack, const Vector& x, Mode mode, ForwardCache* cache) {
	require_same_size(static_cast<std::size_t>(x.size()), stack.input_dim(), "MLP input");
	return Vector(mlp_forward(stack, Matrix(x), mode, cache).col(0));
}

MlpGradients mlp_backward(const MlpStack& stack, const ForwardCache& cache, const Matrix& upstream) {
	if (!cache.valid) {
		throw CacheError("backward pass without a completed forward pass");
	}
	if (cache.revision != stack.revision) {
		throw CacheError("forward cache is stale: parameters changed since the forward pass");
	}
	if (cache.layers.size() != stack.layers.size()) {
		throw CacheError("forward cache layer count does not match the stack");
	}
	if (static_cast<std::size_t>(upstream.cols()) != cache.batch ||
	    static_cast<std::size_t>(upstream.rows()) != stack.output_dim()) {
		throw CacheError("upstream gradient shape does not match the cached forward pass");
	}
	for (std::size_t i = 0; i < stack.layers.size(); ++i) {
		if (static_cast<std::size_t>(cache.layers[i].input.rows()) != stack.layers[i].in_dim() ||
		    static_cast<std::size_t>(cache.layers[i].pre_activation.rows()) != stack.layers[i].out_dim()) {
			throw CacheError("forward cache shapes do not match the stack");
		}
	}

	// Collected per layer in reverse, then flattened in canonical order.
	std::vector<std::vector<Vector>> per_layer(stack.layers.size());
	Matrix g = upstream;
	for (std::size_t idx = stack.layers.size(); idx-- > 0;) {
		const DenseLayer& layer = stack.layers[idx];
		const LayerCache& lc = cache.layers[idx];
		if (lc.dropout_mask) {
			g = g.cwiseProduct(*lc.dropout_mask) * (1.0 / (1.0 - stack.dropout_rate));
		}
		if (layer.activation == Activation::ReLU) {
			g = (lc.pre_activation.array() > 0.0).select(g, 0.0);
		}
		Vector dgain;
		Vector dnbias;
		if (layer.norm) {
			if (!lc.norm) {
				throw CacheError("forward cache lacks layer norm intermediates");
			}
			auto ng = layer_norm_backward(*lc.norm, layer.norm->gain, g);
			g = std::move(ng.input);
			dgain = std::move(ng.gain);
			dnbias = std::move(ng.bias);
		}
		Matrix dw = g * lc.input.transpose();
		Vector db = g.rowwise().sum();
		auto& out = per_layer[idx];
		out.emplace_back(Eigen::Map<const Vector>(dw.data(), dw.size()));
		out.push_back(std::move(db));
		if (layer.norm) {
			out.push_back(std::move(dgain));
			out.push_back(std::move(dnbias));
		}
		g = layer.weight.transpose() * g;
	}
	MlpGradients result;
	for (auto& tensors : per_layer) {
		for (auto& t : tensors) {
			result.params.push_back(std::move(t));
		}
	}
	result.input = std::move(g);
	return result;
}

std::vector<std::span<double>> parameter_spans(MlpStack& stack) {
	std::vector<std::span<double>> out;
	for (auto& l : stack.layers) {
		out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
		out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
		if (l.norm) {
			out.emplace_back(l.norm->gain.data(), static_cast<std::size_t>(l.norm->gain.size()));
			out.emplace_back(l.norm->bias.data(), static_cast<std::size_t>(l.norm->bias.size()));
		}
	}
	return out;
}

std::vector<std::span<const double>> parameter_spans(const MlpStack& stack) {
	std::vector<std::span<const double>> out;
	for (const auto& l : stack.layers) {
		out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
		out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
		if (l.norm) {
			out.emplace_back(l.norm->gain.data(), static_cast<std::size_t>(l.norm->gain.size()));
			out.emplace_back(l.norm->bias.data(), static_cast<std::size_t>(l.norm->bias.size()));
		}
	}
	return out;
}

void sgd_step(std::span<const std::span<double>> params, const GradientSet& grads, double lr) {
	require_same_size(params.size(), grads.size(), "sgd_step tensor count");
	for (std::size_t i = 0; i < params.size(); ++i) {
		require_same_size(params[i].size(), static_cast<std::size_t>(grads[i].size()), "sgd_step tensor size");
	}
	for (std::size_t i = 0; i < params.size(); ++i) {
		Eigen::Map<Vector> p(params[i].data(), static_cast<Eigen::Index>(params[i].size()));
		p -= lr * grads[i];
	}
}

void sgd_step(MlpStack& stack, const GradientSet& grads, double lr) {
	const auto spans = parameter_spans(stack);
	sgd_step(spans, grads, lr);
	++stack.revision;
}

std::size_t parameter_count(const MlpStack& stack) {
	std::size_t n = 0;
	for (auto s : parameter_spans(stack)) {
		n += s.size();
	}
	return n;
}

} // namespace twostage::nn
