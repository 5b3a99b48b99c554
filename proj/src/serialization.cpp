#include "twostage/serialization.hpp"

#include "twostage/errors.hpp"
#include "twostage/rng.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace twostage {

namespace {

static_assert(std::endian::native == std::endian::little, "serialization assumes a little-endian host");

constexpr char kPairMagic[8] = {'T', 'S', 'F', 'P', 'A', 'I', 'R', '\0'};
constexpr char kModelMagic[4] = {'T', 'S', 'F', 'M'};

class Writer {
public:
	template <class T>
	void put(T value) {
		const auto* p = reinterpret_cast<const unsigned char*>(&value);
		bytes_.insert(bytes_.end(), p, p + sizeof(T));
	}
	void raw(const void* data, std::size_t n) {
		const auto* p = static_cast<const unsigned char*>(data);
		bytes_.insert(bytes_.end(), p, p + n);
	}
	void u8(std::uint8_t v) { put(v); }
	void u32(std::size_t v) { put(static_cast<std::uint32_t>(v)); }
	void f64(double v) { put(v); }

	void matrix(const Matrix& m) {
		u32(static_cast<std::size_t>(m.rows()));
		u32(static_cast<std::size_t>(m.cols()));
		for (Eigen::Index r = 0; r < m.rows(); ++r) {
			for (Eigen::Index c = 0; c < m.cols(); ++c) {
				f64(m(r, c));
			}
		}
	}
	void vector(const Vector& v) {
		u32(static_cast<std::size_t>(v.size()));
		for (Eigen::Index i = 0; i < v.size(); ++i) {
			f64(v(i));
		}
	}

	std::vector<unsigned char>& bytes() { return bytes_; }

private:
	std::vector<unsigned char> bytes_;
};

class Reader {
public:
	explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

	template <class T>
	T get() {
		need(sizeof(T));
		T value;
		std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
		pos_ += sizeof(T);
		return value;
	}
	void expect(const void* data, std::size_t n, const char* what) {
		need(n);
		if (std::memcmp(bytes_.data() + pos_, data, n) != 0) {
			throw LoadError(std::string("bad ") + what);
		}
		pos_ += n;
	}
	std::uint8_t u8() { return get<std::uint8_t>(); }
	std::uint32_t u32() { return get<std::uint32_t>(); }
	double f64() { return get<double>(); }

	bool flag() {
		const auto v = u8();
		if (v > 1) {
			throw LoadError("bad boolean flag");
		}
		return v == 1;
	}

	Matrix matrix() {
		const std::size_t rows = u32();
		const std::size_t cols = u32();
		if (cols != 0 && rows > remaining() / sizeof(double) / cols) {
			throw LoadError("truncated model data");
		}
		Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
		for (std::size_t r = 0; r < rows; ++r) {
			for (std::size_t c = 0; c < cols; ++c) {
				m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f64();
			}
		}
		return m;
	}
	Vector vector() {
		const std::size_t n = u32();
		if (n > remaining() / sizeof(double)) {
			throw LoadError("truncated model data");
		}
		Vector v(static_cast<Eigen::Index>(n));
		for (std::size_t i = 0; i < n; ++i) {
			v(static_cast<Eigen::Index>(i)) = f64();
		}
		return v;
	}

	std::size_t position() const { return pos_; }
	std::size_t remaining() const { return bytes_.size() - pos_; }

private:
	void need(std::size_t n) const {
		if (n > bytes_.size() - pos_) {
			throw LoadError("truncated model data");
		}
	}

	std::span<const unsigned char> bytes_;
	std::size_t pos_ = 0;
};

void write_model(Writer& w, const Model& model) {
	w.raw(kModelMagic, sizeof(kModelMagic));
	w.u8(static_cast<std::uint8_t>(model.kind()));
	w.u32(model.input_dim());
	w.u32(model.output_dim());
	w.u32(model.period().value_or(0));
	w.u8(model.mar() ? 1 : 0);
	if (model.mar()) {
		w.matrix(model.mar()->weight);
		w.vector(model.mar()->bias);
	}
	w.u8(model.mlp() ? 1 : 0);
	if (model.mlp()) {
		const auto& mlp = *model.mlp();
		w.f64(mlp.dropout_rate);
		w.u8(mlp.use_layer_norm ? 1 : 0);
		w.u32(mlp.layers.size());
		for (const auto& layer : mlp.layers) {
			w.u8(static_cast<std::uint8_t>(layer.activation));
			w.matrix(layer.weight);
			w.vector(layer.bias);
			w.u8(layer.norm ? 1 : 0);
			if (layer.norm) {
				w.vector(layer.norm->gain);
				w.vector(layer.norm->bias);
			}
		}
	}
}

Model read_model(Reader& r) {
	r.expect(kModelMagic, sizeof(kModelMagic), "model magic");
	const auto kind_raw = r.u8();
	if (kind_raw > static_cast<std::uint8_t>(ModelKind::PreviousPeriod)) {
		throw LoadError("unknown model kind " + std::to_string(kind_raw));
	}
	const auto kind = static_cast<ModelKind>(kind_raw);
	const std::size_t in = r.u32();
	const std::size_t out = r.u32();
	const std::size_t period = r.u32();
	std::optional<MarParams> mar;
	if (r.flag()) {
		MarParams p;
		p.weight = r.matrix();
		p.bias = r.vector();
		mar = std::move(p);
	}
	std::optional<nn::MlpStack> mlp;
	if (r.flag()) {
		nn::MlpStack stack;
		stack.dropout_rate = r.f64();
		stack.use_layer_norm = r.flag();
		const std::size_t layers = r.u32();
		for (std::size_t i = 0; i < layers; ++i) {
			nn::DenseLayer layer;
			const auto act = r.u8();
			if (act > static_cast<std::uint8_t>(nn::Activation::Identity)) {
				throw LoadError("unknown activation " + std::to_string(act));
			}
			layer.activation = static_cast<nn::Activation>(act);
			layer.weight = r.matrix();
			layer.bias = r.vector();
			if (r.flag()) {
				nn::LayerNormParams norm;
				norm.gain = r.vector();
				norm.bias = r.vector();
				layer.norm = std::move(norm);
			}
			stack.layers.push_back(std::move(layer));
		}
		mlp = std::move(stack);
	}
	try {
		return Model(kind, in, out, std::move(mar), std::move(mlp),
		             period > 0 ? std::optional<std::size_t>(period) : std::nullopt);
	} catch (const Error& e) {
		throw LoadError(std::string("inconsistent model data: ") + e.what());
	}
}

void append_checksum(std::vector<unsigned char>& bytes) {
	const std::uint64_t sum = fnv1a64(bytes);
	const auto* p = reinterpret_cast<const unsigned char*>(&sum);
	bytes.insert(bytes.end(), p, p + sizeof(sum));
}

std::span<const unsigned char> verify_checksum(std::span<const unsigned char> bytes) {
	if (bytes.size() < sizeof(std::uint64_t)) {
		throw LoadError("truncated model data");
	}
	const auto body = bytes.first(bytes.size() - sizeof(std::uint64_t));
	std::uint64_t stored = 0;
	std::memcpy(&stored, bytes.data() + body.size(), sizeof(stored));
	if (fnv1a64(body) != stored) {
		throw LoadError("checksum mismatch: file is corrupted or truncated");
	}
	return body;
}

} // namespace

std::vector<unsigned char> encode_model(const Model& model) {
	Writer w;
	write_model(w, model);
	append_checksum(w.bytes());
	return std::move(w.bytes());
}

Model decode_model(std::span<const unsigned char> bytes) {
	Reader r(verify_checksum(bytes));
	Model m = read_model(r);
	if (r.remaining() != 0) {
		throw LoadError("trailing bytes after model");
	}
	return m;
}

std::vector<unsigned char> encode_stage_pair(const StagePair& pair) {
	Writer w;
	w.raw(kPairMagic, sizeof(kPairMagic));
	w.u32(kModelFormatVersion);
	w.u32(pair.spec.history);
	w.u32(pair.spec.horizon);
	w.u32(pair.spec.future);
	w.u8(pair.stage1 ? 1 : 0);
	if (pair.stage1) {
		write_model(w, *pair.stage1);
	}
	write_model(w, pair.stage2);
	w.u8(pair.stage1_eval_mse ? 1 : 0);
	w.f64(pair.stage1_eval_mse.value_or(0.0));
	append_checksum(w.bytes());
	return std::move(w.bytes());
}

StagePair decode_stage_pair(std::span<const unsigned char> bytes) {
	if (bytes.size() < sizeof(kPairMagic) || std::memcmp(bytes.data(), kPairMagic, sizeof(kPairMagic)) != 0) {
		throw LoadError("not a stage-pair file (bad magic)");
	}
	Reader r(verify_checksum(bytes));
	r.expect(kPairMagic, sizeof(kPairMagic), "stage-pair magic");
	const auto version = r.u32();
	if (version != kModelFormatVersion) {
		throw LoadError("unsupported format version " + std::to_string(version));
	}
	HorizonSpec spec;
	spec.history = r.u32();
	spec.horizon = r.u32();
	spec.future = r.u32();
	std::optional<Model> f1;
	if (r.flag()) {
		f1 = read_model(r);
	}
	Model f2 = read_model(r);
	const bool has_mse = r.flag();
	const double mse = r.f64();
	if (r.remaining() != 0) {
		throw LoadError("trailing bytes after stage pair");
	}
	if (f1.has_value() != (spec.future > 0)) {
		throw LoadError("Stage-1 presence does not match the future horizon");
	}
	if (f1 && (f1->input_dim() != spec.history || f1->output_dim() != spec.future)) {
		throw LoadError("Stage-1 shape does not match the horizon spec");
	}
	if (f2.input_dim() != spec.history + spec.future || f2.output_dim() != spec.horizon) {
		throw LoadError("Stage-2 shape does not match the horizon spec");
	}
	return StagePair{std::move(f1), std::move(f2), spec, has_mse ? std::optional<double>(mse) : std::nullopt};
}

void save_stage_pair(const std::filesystem::path& path, const StagePair& pair) {
	const auto bytes = encode_stage_pair(pair);
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw Error("cannot write '" + path.string() + "'");
	}
	out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
	if (!out) {
		throw Error("failed writing '" + path.string() + "'");
	}
}

StagePair load_stage_pair(const std::filesystem::path& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw LoadError("cannot open '" + path.string() + "'");
	}
	const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
	try {
		return decode_stage_pair(bytes);
	} catch (const LoadError& e) {
		throw LoadError(path.string() + ": " + e.what());
	}
}

} // namespace twostage
