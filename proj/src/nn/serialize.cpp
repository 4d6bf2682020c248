#include "rulfdia/nn/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rulfdia/errors.hpp"
#include "rulfdia/textio.hpp"

namespace rulfdia::nn {

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; add byte swapping for this target");

namespace {

constexpr char kMagic[8] = {'R', 'U', 'L', 'F', 'D', 'I', 'A', 'W'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }
  void put_bytes(const void* p, std::size_t n) { bytes_.append(static_cast<const char*>(p), n); }
  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError("weight file truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_params(std::ostream& out, const ModelParams& params, std::string_view metadata) {
  const auto& spec = params.spec;
  Writer w;
  w.put_bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kWeightFormatVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(spec.kind));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(spec.activation));
  w.put<std::uint16_t>(0);
  w.put<std::uint64_t>(spec.seq_len);
  w.put<std::uint64_t>(spec.input_dim);
  w.put<std::uint64_t>(spec.kernel_len);
  w.put<std::uint64_t>(spec.dense_width);
  w.put<double>(spec.dropout_rate);
  w.put<double>(spec.output_scale);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(spec.layer_widths.size()));
  for (auto width : spec.layer_widths) w.put<std::uint64_t>(width);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(metadata.size()));
  w.put_bytes(metadata.data(), metadata.size());

  std::uint32_t n_arrays = 0;
  params.for_each([&](std::string_view, const Matrix&) { ++n_arrays; });
  w.put<std::uint32_t>(n_arrays);
  params.for_each([&](std::string_view name, const Matrix& m) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.put_bytes(name.data(), name.size());
    w.put<std::uint64_t>(m.rows());
    w.put<std::uint64_t>(m.cols());
    w.put_bytes(m.values().data(), m.size() * sizeof(double));
  });
  w.put<std::uint64_t>(text::fnv1a(w.bytes()));
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw std::runtime_error("save_params: write failed");
}

ModelParams load_params(std::istream& in, std::string* metadata) {
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.size() < sizeof kMagic + sizeof(std::uint64_t)) throw ParseError("weight file truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw ParseError("not a weight file");

  const std::string_view body(bytes.data(), bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);

  Reader r(body);
  r.get_bytes(sizeof kMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kWeightFormatVersion)
    throw ParseError("unsupported weight format version " + std::to_string(version));
  if (stored != text::fnv1a(body)) throw ParseError("weight file truncated or corrupt (checksum)");

  ModelSpec spec;
  const auto kind = r.get<std::uint8_t>();
  const auto act = r.get<std::uint8_t>();
  if (kind > 2 || act > 1) throw ParseError("weight file: bad model kind/activation");
  spec.kind = static_cast<ModelKind>(kind);
  spec.activation = static_cast<Activation>(act);
  r.get<std::uint16_t>();
  spec.seq_len = r.get<std::uint64_t>();
  spec.input_dim = r.get<std::uint64_t>();
  spec.kernel_len = r.get<std::uint64_t>();
  spec.dense_width = r.get<std::uint64_t>();
  spec.dropout_rate = r.get<double>();
  spec.output_scale = r.get<double>();
  const auto n_layers = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_layers; ++i) spec.layer_widths.push_back(r.get<std::uint64_t>());
  const auto meta = r.get_bytes(r.get<std::uint32_t>());
  if (metadata) *metadata = std::string(meta);

  ModelParams params;
  try {
    params = ModelParams::zeros(spec);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("weight file: invalid model spec: ") + e.what());
  }
  std::uint32_t expected = 0;
  params.for_each([&](std::string_view, Matrix&) { ++expected; });
  if (r.get<std::uint32_t>() != expected) throw ShapeError("weight file: array count mismatch");
  params.for_each([&](std::string_view name, Matrix& m) {
    const auto len = r.get<std::uint32_t>();
    const auto got = r.get_bytes(len);
    if (got != name) throw ShapeError("weight file: expected array " + std::string(name) + ", found " +
                                      std::string(got));
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (rows != m.rows() || cols != m.cols())
      throw ShapeError("weight file: shape mismatch for " + std::string(name));
    const auto data = r.get_bytes(m.size() * sizeof(double));
    std::memcpy(m.values().data(), data.data(), data.size());
  });
  if (!r.done()) throw ParseError("weight file: trailing bytes");
  return params;
}

void save_params_file(const std::filesystem::path& path, const ModelParams& params,
                      std::string_view metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_params(out, params, metadata);
}

ModelParams load_params_file(const std::filesystem::path& path, std::string* metadata) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_params(in, metadata);
}

}  // namespace rulfdia::nn
