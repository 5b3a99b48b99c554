#pragma once

#include "twostage/neuralnet.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace twostage {

using nn::Matrix;
using nn::Vector;

enum class ModelKind : std::uint8_t { Mar = 0, Mlp = 1, HybridMlpMar = 2, PreviousPeriod = 3 };

/// "MAR", "MLP", "MLP+MAR", "Previous Period".
std::string_view model_label(ModelKind kind);
/// Accepts the labels above case-insensitively plus "mar", "mlp",
/// "mlp+mar", "hybrid", "previous-period". Throws ParameterError otherwise.
ModelKind parse_model_kind(std::string_view text);

/// Direct multi-horizon linear map: y = A x + b.
struct MarParams {
	Matrix weight; // output_dim x input_dim
	Vector bias;

	std::size_t input_dim() const { return static_cast<std::size_t>(weight.cols()); }
	std::size_t output_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

Vector mar_forward(const MarParams& params, const Vector& x);
Matrix mar_forward(const MarParams& params, const Matrix& x);

/// Sum of a MAR branch and an MLP branch sharing input and output.
struct HybridParams {
	MarParams mar;
	nn::MlpStack mlp;
};

Vector hybrid_forward(const HybridParams& params, const Vector& x, nn::Mode mode);

/// Repeats the last observed period: y_k = x_his[L - T + (k - 1) mod T].
/// Throws InsufficientDataError when the history is shorter than T.
Vector previous_period_forecast(std::span<const double> history, std::size_t period, std::size_t horizon);

struct ModelOptions {
	std::vector<std::size_t> widths{200, 100, 50};
	double dropout_rate = 0.5;
	bool layer_norm = true;
	/// Needed by PreviousPeriod only.
	std::optional<std::size_t> period;
};

struct ModelCache {
	Matrix input;
	nn::ForwardCache mlp;
	bool valid = false;
};

/// One trainable forecaster of any ModelKind. Parameters are the MAR
/// branch (when present) followed by the MLP branch (when present).
class Model {
public:
	using Cache = ModelCache;

	Model(ModelKind kind, std::size_t input_dim, std::size_t output_dim, std::optional<MarParams> mar,
	      std::optional<nn::MlpStack> mlp, std::optional<std::size_t> period);

	ModelKind kind() const { return kind_; }
	std::size_t input_dim() const { return input_dim_; }
	std::size_t output_dim() const { return output_dim_; }
	const std::optional<MarParams>& mar() const { return mar_; }
	const std::optional<nn::MlpStack>& mlp() const { return mlp_; }
	std::optional<std::size_t> period() const { return period_; }
	bool trainable() const { return kind_ != ModelKind::PreviousPeriod; }

	Matrix forward(const Matrix& x, nn::Mode mode, Cache* cache = nullptr) const;
	Vector forward(const Vector& x, nn::Mode mode) const;
	/// Eval-mode forward.
	Vector predict(const Vector& x) const { return forward(x, nn::Mode::eval()); }

	nn::GradientSet backward(const Cache& cache, const Matrix& upstream) const;
	std::vector<std::span<double>> parameters();
	std::vector<std::span<const double>> parameters() const;
	void apply_gradients(const nn::GradientSet& grads, double lr);

	/// Direct access for tests and hand-built models.
	MarParams& mutable_mar() { return mar_.value(); }
	nn::MlpStack& mutable_mlp() { return mlp_.value(); }

private:
	ModelKind kind_;
	std::size_t input_dim_;
	std::size_t output_dim_;
	std::optional<MarParams> mar_;
	std::optional<nn::MlpStack> mlp_;
	std::optional<std::size_t> period_;
};

/// Seeded construction. MAR weights use the same Xavier-uniform rule as the
/// MLP; all biases start at zero. Throws ParameterError for empty or zero
/// widths on MLP kinds and for PreviousPeriod without a period.
Model make_model(ModelKind kind, std::size_t input_dim, std::size_t output_dim, const ModelOptions& options,
                 std::uint64_t seed);

} // namespace twostage
