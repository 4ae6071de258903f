#include <bit>
#include <fstream>
#include <iterator>

#include "pcup/error.hpp"
#include "pcup/persistence.hpp"

namespace pcup {
namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'C', 'U', 'P'};
constexpr std::uint32_t kMaxLayers = 64;
constexpr std::uint32_t kMaxWidth = 1u << 20;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t position() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw Error(ErrorCode::TruncatedFile, "checkpoint ends early");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(int v, const char* what) {
  if (v < 0) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is negative");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint) {
  const auto& shape = checkpoint.params.shape;
  const auto& cfg = checkpoint.config;

  Writer header;
  header.u32(checked_u32(shape.input_dim, "input_dim"));
  header.u32(checked_u32(shape.n_out, "n_out"));
  header.u32(static_cast<std::uint32_t>(shape.encoder_widths.size()));
  for (int w : shape.encoder_widths) header.u32(checked_u32(w, "encoder width"));
  header.u32(static_cast<std::uint32_t>(shape.decoder_hidden.size()));
  for (int w : shape.decoder_hidden) header.u32(checked_u32(w, "decoder width"));
  header.u32(checked_u32(cfg.batch_size, "batch_size"));
  header.u32(checked_u32(cfg.epochs, "epochs"));
  header.u32(checked_u32(cfg.af, "af"));
  header.u32(checked_u32(cfg.validate_every, "validate_every"));
  header.f64(cfg.learning_rate);
  header.f64(cfg.beta1);
  header.f64(cfg.beta2);
  header.f64(cfg.epsilon);
  header.u64(cfg.seed);

  Writer out;
  out.bytes.assign(std::begin(kMagic), std::end(kMagic));
  out.u32(kCheckpointVersion);
  out.u32(static_cast<std::uint32_t>(header.bytes.size()));
  out.bytes.insert(out.bytes.end(), header.bytes.begin(), header.bytes.end());

  auto params = checkpoint.params;  // all_tensors needs a mutable view
  for (const auto& t : all_tensors(params)) {
    for (float v : t.values) out.f32(v);
  }
  out.u64(fnv1a64(out.bytes.data(), out.bytes.size()));
  return std::move(out.bytes);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::TruncatedFile, "checkpoint shorter than its magic");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorCode::BadMagic, "not a PCUP checkpoint");
  }
  Reader in(bytes, bytes.size());
  in.seek(4);
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::VersionUnsupported,
                "checkpoint version " + std::to_string(version) + " is not supported");
  }
  const std::uint32_t header_bytes = in.u32();
  const std::size_t header_start = in.position();

  NetworkShape shape;
  shape.input_dim = static_cast<int>(in.u32());
  shape.n_out = static_cast<int>(in.u32());
  auto read_widths = [&](const char* what) {
    const std::uint32_t count = in.u32();
    if (count > kMaxLayers) {
      throw Error(ErrorCode::Parse, std::string("implausible ") + what + " layer count");
    }
    std::vector<int> widths;
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t w = in.u32();
      if (w == 0 || w > kMaxWidth) {
        throw Error(ErrorCode::Parse, std::string("implausible ") + what + " width");
      }
      widths.push_back(static_cast<int>(w));
    }
    return widths;
  };
  shape.encoder_widths = read_widths("encoder");
  shape.decoder_hidden = read_widths("decoder");
  if (shape.n_out < 1 || static_cast<std::uint32_t>(shape.n_out) > kMaxWidth) {
    throw Error(ErrorCode::Parse, "implausible n_out");
  }

  Checkpoint cp;
  cp.config.batch_size = static_cast<int>(in.u32());
  cp.config.epochs = static_cast<int>(in.u32());
  cp.config.af = static_cast<int>(in.u32());
  cp.config.validate_every = static_cast<int>(in.u32());
  cp.config.learning_rate = in.f64();
  cp.config.beta1 = in.f64();
  cp.config.beta2 = in.f64();
  cp.config.epsilon = in.f64();
  cp.config.seed = in.u64();
  if (in.position() - header_start != header_bytes) {
    throw Error(ErrorCode::Parse, "checkpoint header length disagrees with its contents");
  }
  try {
    shape.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, std::string("checkpoint shape: ") + e.what());
  }

  // Size the payload from the header before touching it.
  std::uint64_t floats = 0;
  std::uint64_t in_dim = static_cast<std::uint64_t>(shape.input_dim);
  for (int w : shape.encoder_widths) {
    floats += in_dim * static_cast<std::uint64_t>(w) + 5ull * static_cast<std::uint64_t>(w);
    in_dim = static_cast<std::uint64_t>(w);
  }
  std::vector<int> dense = shape.decoder_hidden;
  dense.push_back(3 * shape.n_out);
  for (int w : dense) {
    floats += in_dim * static_cast<std::uint64_t>(w) + static_cast<std::uint64_t>(w);
    in_dim = static_cast<std::uint64_t>(w);
  }
  const std::uint64_t expected = in.position() + 4 * floats + 8;
  if (bytes.size() < expected) {
    throw Error(ErrorCode::TruncatedFile, "checkpoint has " + std::to_string(bytes.size()) +
                                              " bytes, header implies " +
                                              std::to_string(expected));
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::Parse, "trailing bytes after checkpoint payload");
  }
  const std::size_t body = bytes.size() - 8;
  Reader tail(bytes, bytes.size());
  tail.seek(body);
  if (tail.u64() != fnv1a64(bytes.data(), body)) {
    throw Error(ErrorCode::ChecksumMismatch, "checkpoint checksum does not match its contents");
  }

  cp.params = zero_params<float>(shape);
  cp.config.shape = shape;
  for (auto& t : all_tensors(cp.params)) {
    for (auto& v : t.values) v = in.f32();
  }
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = encode_checkpoint(checkpoint);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace pcup
