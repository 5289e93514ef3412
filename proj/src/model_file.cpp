#include "fflp/model_file.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

#include "fflp/errors.hpp"

namespace fflp {

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'F', 'L', 'P'};

class LeWriter {
 public:
  explicit LeWriter(std::ostream& os) : os_(os) {}

  void u16(std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
    os_.write(b, 2);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os_.put(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) os_.put(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void half(Half h) { u16(h.bits()); }
  void matrix(const HalfMatrix& m) {
    for (Half h : m.values()) half(h);
  }

 private:
  std::ostream& os_;
};

class LeReader {
 public:
  explicit LeReader(std::istream& is) : is_(is) {}

  std::uint64_t offset() const { return offset_; }

  void bytes(char* out, std::size_t n, const char* what) {
    is_.read(out, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) {
      throw FormatError(std::string("truncated model file while reading ") + what, offset_ + is_.gcount());
    }
    offset_ += n;
  }
  std::uint16_t u16(const char* what) {
    unsigned char b[2];
    bytes(reinterpret_cast<char*>(b), 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  Half half(const char* what) { return Half::from_bits(u16(what)); }
  HalfMatrix matrix(std::size_t rows, std::size_t cols, const char* what) {
    HalfMatrix m(rows, cols);
    for (Half& h : m.values()) h = half(what);
    return m;
  }

 private:
  std::istream& is_;
  std::uint64_t offset_ = 0;
};

void write_layer(LeWriter& w, const HalfMatrix& weights, const LayerRule& rule) {
  w.matrix(weights);
  w.matrix(rule.alpha);
  w.matrix(rule.beta);
  w.matrix(rule.gamma);
  w.matrix(rule.delta);
}

void read_layer(LeReader& r, std::size_t rows, std::size_t cols, HalfMatrix& weights, LayerRule& rule) {
  weights = r.matrix(rows, cols, "weights");
  rule.alpha = r.matrix(rows, cols, "alpha");
  rule.beta = r.matrix(rows, cols, "beta");
  rule.gamma = r.matrix(rows, cols, "gamma");
  rule.delta = r.matrix(rows, cols, "delta");
}

// Guards against allocating absurd matrices from a corrupted header.
constexpr std::uint64_t kMaxSynapses = std::uint64_t{1} << 28;

}  // namespace

ModelFile ModelFile::zeros(const NetworkConfig& config) {
  return from_rule(config, PlasticityRule::zeros(config));
}

ModelFile ModelFile::from_rule(const NetworkConfig& config, const PlasticityRule& rule) {
  config.validate();
  rule.check_shape(config);
  return {config, HalfMatrix(config.n_hidden, config.n_in), HalfMatrix(config.n_out, config.n_hidden), rule};
}

NetworkState ModelFile::initial_state() const {
  NetworkState net = NetworkState::zeros(config);
  net.w_input_hidden = w_input_hidden;
  net.w_hidden_output = w_hidden_output;
  return net;
}

void write_model(std::ostream& os, const ModelFile& model) {
  model.config.validate();
  model.rule.check_shape(model.config);
  LeWriter w(os);
  os.write(kMagic.data(), kMagic.size());
  w.u16(kModelFormatVersion);
  w.u32(model.config.n_in);
  w.u32(model.config.n_hidden);
  w.u32(model.config.n_out);
  w.half(model.config.v_th);
  w.half(model.config.lambda);
  write_layer(w, model.w_input_hidden, model.rule.input_hidden);
  write_layer(w, model.w_hidden_output, model.rule.hidden_output);
}

ModelFile read_model(std::istream& is) {
  LeReader r(is);
  std::array<char, 4> magic{};
  r.bytes(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw FormatError("bad model magic, expected FFLP", 0);
  const std::uint16_t version = r.u16("version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version), 4);
  }
  ModelFile model;
  const std::uint64_t config_offset = r.offset();
  model.config.n_in = r.u32("n_in");
  model.config.n_hidden = r.u32("n_hidden");
  model.config.n_out = r.u32("n_out");
  model.config.v_th = r.half("v_th");
  model.config.lambda = r.half("lambda");
  try {
    model.config.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid network config: ") + e.what(), config_offset);
  }
  if (model.config.synapse_count() > kMaxSynapses) throw FormatError("network too large", config_offset);

  read_layer(r, model.config.n_hidden, model.config.n_in, model.w_input_hidden, model.rule.input_hidden);
  read_layer(r, model.config.n_out, model.config.n_hidden, model.w_hidden_output, model.rule.hidden_output);
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after model", r.offset());
  return model;
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_model(os, model);
  os.flush();
  if (!os) throw IoError("failed writing " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_model(is);
}

std::uint64_t pack_coefficients(const SynapseCoefficients& c) {
  return std::uint64_t{c.alpha.bits()} | (std::uint64_t{c.beta.bits()} << 16) |
         (std::uint64_t{c.gamma.bits()} << 32) | (std::uint64_t{c.delta.bits()} << 48);
}

SynapseCoefficients unpack_coefficients(std::uint64_t word) {
  auto lane = [word](int k) { return Half::from_bits(static_cast<std::uint16_t>(word >> (16 * k))); };
  return {lane(0), lane(1), lane(2), lane(3)};
}

std::vector<std::uint64_t> pack_layer_rule(const LayerRule& rule) {
  std::vector<std::uint64_t> words;
  words.reserve(rule.rows() * rule.cols());
  for (std::size_t i = 0; i < rule.rows(); ++i) {
    for (std::size_t j = 0; j < rule.cols(); ++j) words.push_back(pack_coefficients(rule.at(i, j)));
  }
  return words;
}

LayerRule unpack_layer_rule(std::span<const std::uint64_t> words, std::size_t n_post, std::size_t n_pre) {
  if (words.size() != n_post * n_pre) throw std::invalid_argument("packed coefficient count mismatch");
  LayerRule rule = LayerRule::zeros(n_post, n_pre);
  for (std::size_t i = 0; i < n_post; ++i) {
    for (std::size_t j = 0; j < n_pre; ++j) {
      const SynapseCoefficients c = unpack_coefficients(words[i * n_pre + j]);
      rule.alpha(i, j) = c.alpha;
      rule.beta(i, j) = c.beta;
      rule.gamma(i, j) = c.gamma;
      rule.delta(i, j) = c.delta;
    }
  }
  return rule;
}

void write_packed_coefficients(std::ostream& os, const PlasticityRule& rule) {
  LeWriter w(os);
  for (const LayerRule* layer : {&rule.input_hidden, &rule.hidden_output}) {
    for (std::uint64_t word : pack_layer_rule(*layer)) w.u64(word);
  }
}

}  // namespace fflp
