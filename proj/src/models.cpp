#include "twostage/models.hpp"

#include "twostage/errors.hpp"

#include <algorithm>
#include <cctype>

namespace twostage {

std::string_view model_label(ModelKind kind) {
	switch (kind) {
		case ModelKind::Mar:
			return "MAR";
		case ModelKind::Mlp:
			return "MLP";
		case ModelKind::HybridMlpMar:
			return "MLP+MAR";
		case ModelKind::PreviousPeriod:
			return "Previous Period";
	}
	return "?";
}

ModelKind parse_model_kind(std::string_view text) {
	std::string s(text);
	std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
	if (s == "mar") {
		return ModelKind::Mar;
	}
	if (s == "mlp") {
		return ModelKind::Mlp;
	}
	if (s == "mlp+mar" || s == "hybrid" || s == "mar+mlp") {
		return ModelKind::HybridMlpMar;
	}
	if (s == "previous period" || s == "previous-period" || s == "previous_period") {
		return ModelKind::PreviousPeriod;
	}
	throw ParameterError("unknown model kind '" + std::string(text) + "'");
}

Matrix mar_forward(const MarParams& params, const Matrix& x) {
	require_same_size(static_cast<std::size_t>(x.rows()), params.input_dim(), "MAR input");
	require_same_size(static_cast<std::size_t>(params.bias.size()), params.output_dim(), "MAR bias");
	Matrix y = params.weight * x;
	y.colwise() += params.bias;
	return y;
}

Vector mar_forward(const MarParams& params, const Vector& x) {
	require_same_size(static_cast<std::size_t>(x.size()), params.input_dim(), "MAR input");
	return Vector(mar_forward(params, Matrix(x)).col(0));
}

Vector hybrid_forward(const HybridParams& params, const Vector& x, nn::Mode mode) {
	require_same_size(params.mar.input_dim(), params.mlp.input_dim(), "hybrid input dims");
	require_same_size(params.mar.output_dim(), params.mlp.output_dim(), "hybrid output dims");
	const Vector linear = mar_forward(params.mar, x);
	const Vector nonlinear = nn::mlp_forward(params.mlp, x, mode);
	return linear + nonlinear;
}

Vector previous_period_forecast(std::span<const double> history, std::size_t period, std::size_t horizon) {
	if (period == 0) {
		throw ParameterError("period must be positive");
	}
	if (history.size() < period) {
		throw InsufficientDataError("previous-period forecast needs history of at least one period (" +
		                            std::to_string(history.size()) + " < " + std::to_string(period) + ")");
	}
	const std::size_t base = history.size() - period;
	Vector out(static_cast<Eigen::Index>(horizon));
	for (std::size_t k = 0; k < horizon; ++k) {
		out(static_cast<Eigen::Index>(k)) = history[base + k % period];
	}
	return out;
}

Model::Model(ModelKind kind, std::size_t input_dim, std::size_t output_dim, std::optional<MarParams> mar,
             std::optional<nn::MlpStack> mlp, std::optional<std::size_t> period)
    : kind_(kind), input_dim_(input_dim), output_dim_(output_dim), mar_(std::move(mar)), mlp_(std::move(mlp)),
      period_(period) {
	if (input_dim_ == 0 || output_dim_ == 0) {
		throw ParameterError("model dimensions must be positive");
	}
	const bool wants_mar = kind_ == ModelKind::Mar || kind_ == ModelKind::HybridMlpMar;
	const bool wants_mlp = kind_ == ModelKind::Mlp || kind_ == ModelKind::HybridMlpMar;
	if (wants_mar != mar_.has_value() || wants_mlp != mlp_.has_value()) {
		throw ParameterError("parameter branches do not match model kind " + std::string(model_label(kind_)));
	}
	if (mar_) {
		require_same_size(mar_->input_dim(), input_dim_, "MAR input dim");
		require_same_size(mar_->output_dim(), output_dim_, "MAR output dim");
		require_same_size(static_cast<std::size_t>(mar_->bias.size()), output_dim_, "MAR bias");
	}
	if (mlp_) {
		mlp_->validate();
		require_same_size(mlp_->input_dim(), input_dim_, "MLP input dim");
		require_same_size(mlp_->output_dim(), output_dim_, "MLP output dim");
	}
	if (kind_ == ModelKind::PreviousPeriod) {
		if (!period_ || *period_ == 0) {
			throw ParameterError("Previous Period model requires a known period");
		}
		if (*period_ > input_dim_) {
			throw InsufficientDataError("Previous Period model needs history length >= period");
		}
	}
}

Matrix Model::forward(const Matrix& x, nn::Mode mode, Cache* cache) const {
	require_same_size(static_cast<std::size_t>(x.rows()), input_dim_, "model input");
	if (cache) {
		cache->valid = false;
	}
	Matrix y;
	switch (kind_) {
		case ModelKind::PreviousPeriod: {
			y.resize(static_cast<Eigen::Index>(output_dim_), x.cols());
			for (Eigen::Index c = 0; c < x.cols(); ++c) {
				const Vector col = x.col(c);
				y.col(c) = previous_period_forecast(std::span<const double>(col.data(), input_dim_), *period_,
				                                    output_dim_);
			}
			return y;
		}
		case ModelKind::Mar:
			y = mar_forward(*mar_, x);
			break;
		case ModelKind::Mlp:
			y = nn::mlp_forward(*mlp_, x, mode, cache ? &cache->mlp : nullptr);
			break;
		case ModelKind::HybridMlpMar: {
			const Matrix linear = mar_forward(*mar_, x);
			const Matrix nonlinear = nn::mlp_forward(*mlp_, x, mode, cache ? &cache->mlp : nullptr);
			y = linear + nonlinear;
			break;
		}
	}
	if (cache) {
		cache->input = x;
		cache->valid = true;
	}
	return y;
}

Vector Model::forward(const Vector& x, nn::Mode mode) const {
	require_same_size(static_cast<std::size_t>(x.size()), input_dim_, "model input");
	return Vector(forward(Matrix(x), mode, nullptr).col(0));
}

nn::GradientSet Model::backward(const Cache& cache, const Matrix& upstream) const {
	if (!cache.valid) {
		throw CacheError("backward pass without a completed forward pass");
	}
	if (upstream.cols() != cache.input.cols() || static_cast<std::size_t>(upstream.rows()) != output_dim_) {
		throw CacheError("upstream gradient shape does not match the cached forward pass");
	}
	nn::GradientSet grads;
	if (mar_) {
		Matrix da = upstream * cache.input.transpose();
		grads.emplace_back(Eigen::Map<const Vector>(da.data(), da.size()));
		grads.emplace_back(upstream.rowwise().sum());
	}
	if (mlp_) {
		auto mg = nn::mlp_backward(*mlp_, cache.mlp, upstream);
		for (auto& g : mg.params) {
			grads.push_back(std::move(g));
		}
	}
	return grads;
}

std::vector<std::span<double>> Model::parameters() {
	std::vector<std::span<double>> out;
	if (mar_) {
		out.emplace_back(mar_->weight.data(), static_cast<std::size_t>(mar_->weight.size()));
		out.emplace_back(mar_->bias.data(), static_cast<std::size_t>(mar_->bias.size()));
	}
	if (mlp_) {
		for (auto s : nn::parameter_spans(*mlp_)) {
			out.push_back(s);
		}
	}
	return out;
}

std::vector<std::span<const double>> Model::parameters() const {
	std::vector<std::span<const double>> out;
	if (mar_) {
		out.emplace_back(mar_->weight.data(), static_cast<std::size_t>(mar_->weight.size()));
		out.emplace_back(mar_->bias.data(), static_cast<std::size_t>(mar_->bias.size()));
	}
	if (mlp_) {
		for (auto s : nn::parameter_spans(*mlp_)) {
			out.push_back(s);
		}
	}
	return out;
}

void Model::apply_gradients(const nn::GradientSet& grads, double lr) {
	const auto spans = parameters();
	nn::sgd_step(spans, grads, lr);
	if (mlp_) {
		++mlp_->revision;
	}
}

Model make_model(ModelKind kind, std::size_t input_dim, std::size_t output_dim, const ModelOptions& options,
                 std::uint64_t seed) {
	if (input_dim == 0 || output_dim == 0) {
		throw ParameterError("model dimensions must be positive");
	}
	Rng rng(seed);
	std::optional<MarParams> mar;
	std::optional<nn::MlpStack> mlp;
	if (kind == ModelKind::Mar || kind == ModelKind::HybridMlpMar) {
		MarParams p;
		p.weight.resize(static_cast<Eigen::Index>(output_dim), static_cast<Eigen::Index>(input_dim));
		nn::xavier_uniform(p.weight, rng);
		p.bias = Vector::Zero(static_cast<Eigen::Index>(output_dim));
		mar = std::move(p);
	}
	if (kind == ModelKind::Mlp || kind == ModelKind::HybridMlpMar) {
		if (options.widths.empty()) {
			throw ParameterError("MLP kinds need at least one hidden width");
		}
		nn::MlpShape shape{input_dim, options.widths, output_dim, options.dropout_rate, options.layer_norm};
		mlp = nn::make_mlp(shape, rng);
	}
	std::optional<std::size_t> period;
	if (kind == ModelKind::PreviousPeriod) {
		period = options.period;
	}
	return Model(kind, input_dim, output_dim, std::move(mar), std::move(mlp), period);
}

} // namespace twostage
