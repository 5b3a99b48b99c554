#pragma once

#include "twostage/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace twostage::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Batched tensors hold one sample per column.

enum class Activation : std::uint8_t { ReLU = 0, Identity = 1 };

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormParams {
	Vector gain;
	Vector bias;
};

struct DenseLayer {
	Matrix weight; // out x in
	Vector bias;   // out
	Activation activation = Activation::Identity;
	/// Present on hidden layers when the stack uses layer normalization.
	std::optional<LayerNormParams> norm;

	std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
	std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

/// Hidden layers: affine -> layer norm (optional) -> ReLU -> dropout.
/// Output layer: affine only.
struct MlpStack {
	std::vector<DenseLayer> layers;
	double dropout_rate = 0.0;
	bool use_layer_norm = false;
	/// Bumped on every parameter update; forward caches remember it so a
	/// backward pass against updated weights is rejected.
	std::uint64_t revision = 0;

	std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
	std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
	/// Throws ShapeError/ParameterError on broken chaining, non-finite
	/// entries, or a dropout rate outside [0, 1).
	void validate() const;
};

struct MlpShape {
	std::size_t input_dim = 0;
	std::vector<std::size_t> hidden;
	std::size_t output_dim = 0;
	double dropout_rate = 0.0;
	bool layer_norm = false;
};

/// Xavier-uniform weights, zero biases, unit layer-norm gains.
MlpStack make_mlp(const MlpShape& shape, Rng& rng);

/// Fills `weight` with uniform(-a, a), a = sqrt(6 / (fan_in + fan_out)).
void xavier_uniform(Matrix& weight, Rng& rng);

/// Forward-pass mode. Train carries the dropout stream; Eval never drops.
class Mode {
public:
	static Mode eval() { return Mode(nullptr); }
	static Mode train(Rng& rng) { return Mode(&rng); }
	bool training() const { return rng_ != nullptr; }
	Rng& rng() const { return *rng_; }

private:
	explicit Mode(Rng* rng) : rng_(rng) {}
	Rng* rng_;
};

/// Flattened per-tensor gradients in the canonical parameter order of the
/// owning parameter set (see parameter_spans).
using GradientSet = std::vector<Vector>;

struct LayerNormCache {
	Matrix normalized; // (x - mean) / sqrt(var + eps), before gain/bias
	Vector inv_std;    // one per column
};

struct LayerCache {
	Matrix input;
	Matrix pre_activation; // after affine and layer norm
	std::optional<LayerNormCache> norm;
	std::optional<Matrix> dropout_mask; // 0/1 keep indicator
};

struct ForwardCache {
	std::vector<LayerCache> layers;
	std::uint64_t revision = 0;
	std::size_t batch = 0;
	bool valid = false;
};

// ---- primitives -----------------------------------------------------------

/// Column-wise layer normalization: y = gain * (x - mean) / sqrt(var + eps) + bias.
Matrix layer_norm_forward(const Matrix& x, const Vector& gain, const Vector& bias, double eps,
                          LayerNormCache* cache);
std::pair<Vector, LayerNormCache> layer_norm_forward(const Vector& x, const Vector& gain, const Vector& bias,
                                                     double eps = kLayerNormEps);

struct LayerNormGrads {
	Matrix input;
	Vector gain;
	Vector bias;
};
LayerNormGrads layer_norm_backward(const LayerNormCache& cache, const Vector& gain, const Matrix& upstream);

/// Inverted dropout: elements are zeroed with probability `rate`, survivors
/// are scaled by 1 / (1 - rate). Returns the output and the 0/1 keep mask.
/// Throws ParameterError unless 0 <= rate < 1.
std::pair<Matrix, Matrix> dropout(const Matrix& x, double rate, Rng& rng);
std::pair<Vector, Vector> dropout(const Vector& x, double rate, Rng& rng);

struct LossResult {
	double loss = 0.0;
	Matrix grad;
};
/// Mean squared error over every element and its gradient 2 (pred - target) / count.
LossResult mse_loss(const Matrix& pred, const Matrix& target);
std::pair<double, Vector> mse_loss(const Vector& pred, const Vector& target);

// ---- stacks ---------------------------------------------------------------

Matrix mlp_forward(const MlpStack& stack, const Matrix& x, Mode mode, ForwardCache* cache = nullptr);
Vector mlp_forward(const MlpStack& stack, const Vector& x, Mode mode, ForwardCache* cache = nullptr);

struct MlpGradients {
	GradientSet params;
	Matrix input;
};
/// Gradients of a scalar loss given dLoss/dOutput for the cached batch.
/// Throws CacheError for a missing, stale, or mismatched cache.
MlpGradients mlp_backward(const MlpStack& stack, const ForwardCache& cache, const Matrix& upstream);

/// Views over every parameter tensor: per layer W, b, then gain, bias when
/// the layer is normalized.
std::vector<std::span<double>> parameter_spans(MlpStack& stack);
std::vector<std::span<const double>> parameter_spans(const MlpStack& stack);

/// p <- p - lr * g elementwise. Throws ShapeError on incongruent shapes.
void sgd_step(std::span<const std::span<double>> params, const GradientSet& grads, double lr);
void sgd_step(MlpStack& stack, const GradientSet& grads, double lr);

std::size_t parameter_count(const MlpStack& stack);

} // namespace twostage::nn
