#include "skillforge/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "skillforge/error.hpp"

namespace skillforge {

namespace {

constexpr char kMagic[4] = {'S', 'K', 'F', 'C'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  void expect_magic() {
    need(4);
    for (char c : kMagic) {
      if (bytes_[pos_++] != static_cast<std::uint8_t>(c)) throw CheckpointError("corrupt checkpoint: bad magic");
    }
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("corrupt checkpoint: truncated");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void write_shape(Writer& w, const DenseLayer& l) {
  w.u32(static_cast<std::uint32_t>(l.inputs));
  w.u32(static_cast<std::uint32_t>(l.outputs));
  w.u8(static_cast<std::uint8_t>(l.activation));
}

DenseLayer read_shape(Reader& r) {
  const std::uint32_t in = r.u32();
  const std::uint32_t out = r.u32();
  const std::uint8_t act = r.u8();
  if (in == 0 || out == 0) throw CheckpointError("corrupt checkpoint: zero-sized layer");
  if (act > static_cast<std::uint8_t>(Activation::identity)) {
    throw CheckpointError("corrupt checkpoint: unknown activation tag");
  }
  // Guard against absurd shapes before allocating.
  if (static_cast<std::uint64_t>(in) * out > (std::uint64_t{1} << 32)) {
    throw CheckpointError("corrupt checkpoint: layer too large");
  }
  return DenseLayer::zeros(in, out, static_cast<Activation>(act));
}

void write_params(Writer& w, const std::vector<DenseLayer>& layers) {
  std::uint64_t count = 0;
  for (const auto& l : layers) count += l.parameter_count();
  w.u64(count);
  for (const auto& l : layers) {
    for (double v : l.weights) w.f64(v);
    for (double v : l.bias) w.f64(v);
  }
}

void read_params(Reader& r, std::vector<DenseLayer>& layers) {
  std::uint64_t expected = 0;
  for (const auto& l : layers) expected += l.parameter_count();
  const std::uint64_t count = r.u64();
  if (count != expected) throw CheckpointError("corrupt checkpoint: parameter count does not match shape table");
  for (auto& l : layers) {
    for (double& v : l.weights) v = r.f64();
    for (double& v : l.bias) v = r.f64();
  }
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.head_names.size() != ckpt.heads.size()) throw CheckpointError("head names and heads differ in count");
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.layers.size()));
  for (const auto& l : ckpt.layers) write_shape(w, l);
  write_params(w, ckpt.layers);
  w.u32(static_cast<std::uint32_t>(ckpt.metadata.size()));
  for (const auto& [k, v] : ckpt.metadata) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.heads.size()));
  for (std::size_t h = 0; h < ckpt.heads.size(); ++h) {
    w.str(ckpt.head_names[h]);
    write_shape(w, ckpt.heads[h]);
  }
  if (!ckpt.heads.empty()) write_params(w, ckpt.heads);
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.expect_magic();
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const std::uint32_t layer_count = r.u32();
  if (layer_count == 0 || layer_count > 64) throw CheckpointError("corrupt checkpoint: bad layer count");
  for (std::uint32_t i = 0; i < layer_count; ++i) ckpt.layers.push_back(read_shape(r));
  for (std::size_t i = 0; i + 1 < ckpt.layers.size(); ++i) {
    if (ckpt.layers[i].outputs != ckpt.layers[i + 1].inputs) {
      throw CheckpointError("checkpoint shape mismatch between consecutive layers");
    }
  }
  read_params(r, ckpt.layers);
  const std::uint32_t meta = r.u32();
  for (std::uint32_t i = 0; i < meta; ++i) {
    std::string k = r.str();
    ckpt.metadata[k] = r.str();
  }
  const std::uint32_t heads = r.u32();
  if (heads > 1024) throw CheckpointError("corrupt checkpoint: bad head count");
  for (std::uint32_t h = 0; h < heads; ++h) {
    ckpt.head_names.push_back(r.str());
    ckpt.heads.push_back(read_shape(r));
    if (ckpt.heads.back().inputs != ckpt.layers.back().outputs) {
      throw CheckpointError("checkpoint shape mismatch between trunk and head");
    }
  }
  if (heads > 0) read_params(r, ckpt.heads);
  if (!r.at_end()) throw CheckpointError("corrupt checkpoint: trailing bytes");
  return ckpt;
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void save_checkpoint(const QNetwork& net, const std::filesystem::path& path, const Metadata& metadata) {
  Checkpoint ckpt;
  ckpt.layers.assign(net.layers().begin(), net.layers().end());
  ckpt.metadata = metadata;
  write_checkpoint(ckpt, path);
}

QNetwork load_checkpoint(const std::filesystem::path& path, Metadata* metadata) {
  Checkpoint ckpt = read_checkpoint(path);
  if (!ckpt.heads.empty()) throw CheckpointError("checkpoint holds a multi-head network: " + path.string());
  if (metadata) *metadata = ckpt.metadata;
  return QNetwork(std::move(ckpt.layers));
}

void save_multi_head(const MultiHeadNetwork& net, const std::vector<std::string>& head_names,
                     const std::filesystem::path& path, const Metadata& metadata) {
  Checkpoint ckpt;
  ckpt.layers.assign(net.trunk().begin(), net.trunk().end());
  ckpt.heads.assign(net.heads().begin(), net.heads().end());
  ckpt.head_names = head_names;
  ckpt.metadata = metadata;
  write_checkpoint(ckpt, path);
}

MultiHeadNetwork load_multi_head(const std::filesystem::path& path, std::vector<std::string>* head_names,
                                 Metadata* metadata) {
  Checkpoint ckpt = read_checkpoint(path);
  if (ckpt.heads.empty()) throw CheckpointError("checkpoint has no head table: " + path.string());
  if (head_names) *head_names = ckpt.head_names;
  if (metadata) *metadata = ckpt.metadata;
  return MultiHeadNetwork(std::move(ckpt.layers), std::move(ckpt.heads));
}

}  // namespace skillforge
