#include "laneforge/nn/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "laneforge/errors.hpp"

namespace laneforge::nn {
namespace {

constexpr char kMagic[4] = {'L', 'F', 'W', '1'};

class Writer {
 public:
  void U16(uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void F32(float f) { U32(std::bit_cast<uint32_t>(f)); }
  void Raw(const void* p, size_t n) {
    auto* b = static_cast<const uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const uint8_t* data, size_t size) : data_(data), size_(size) {}
  uint16_t U16() {
    Need(2);
    uint16_t v = static_cast<uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float F32() { return std::bit_cast<float>(U32()); }
  std::string Str(size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  size_t pos() const { return pos_; }

 private:
  void Need(size_t n) const {
    if (pos_ + n > size_) throw ChecksumMismatch("weight file truncated");
  }
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

uint32_t Crc32(const uint8_t* data, size_t n) {
  return static_cast<uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

}  // namespace

std::vector<uint8_t> EncodeWeights(const std::vector<NamedTensor>& tensors) {
  Writer w;
  w.Raw(kMagic, 4);
  w.U16(kWeightFormatVersion);
  w.U32(static_cast<uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    w.U32(static_cast<uint32_t>(t.name.size()));
    w.Raw(t.name.data(), t.name.size());
    w.U32(static_cast<uint32_t>(t.tensor.rank()));
    for (int d : t.tensor.shape()) w.U32(static_cast<uint32_t>(d));
    for (float f : t.tensor.values()) w.F32(f);
  }
  uint32_t crc = Crc32(w.bytes().data(), w.bytes().size());
  w.U32(crc);
  return std::move(w.bytes());
}

std::vector<NamedTensor> DecodeWeights(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("not a weight file (bad magic)");
  }
  const uint16_t version = static_cast<uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kWeightFormatVersion) {
    throw VersionMismatch("weight file version " + std::to_string(version) +
                          ", expected " + std::to_string(kWeightFormatVersion));
  }
  if (bytes.size() < 4 + 2 + 4 + 4) throw ChecksumMismatch("weight file truncated");
  const size_t body = bytes.size() - 4;
  Reader crc_reader(bytes.data() + body, 4);
  if (crc_reader.U32() != Crc32(bytes.data(), body)) {
    throw ChecksumMismatch("CRC32 does not match file contents");
  }
  Reader r(bytes.data(), body);
  r.Str(4);
  r.U16();
  const uint32_t count = r.U32();
  std::vector<NamedTensor> out;
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.Str(r.U32());
    const uint32_t rank = r.U32();
    std::vector<int> shape;
    for (uint32_t k = 0; k < rank; ++k) shape.push_back(static_cast<int>(r.U32()));
    t.tensor = Tensor<float>(shape);
    for (float& f : t.tensor.values()) f = r.F32();
    out.push_back(std::move(t));
  }
  if (r.pos() != body) throw IoError("trailing bytes in weight file");
  return out;
}

void SaveTensors(const std::vector<NamedTensor>& tensors, const std::string& path) {
  auto bytes = EncodeWeights(tensors);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path);
}

std::vector<NamedTensor> LoadTensors(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return DecodeWeights(bytes);
}

std::vector<NamedTensor> ExportParameters(const ParamList<float>& params) {
  std::vector<NamedTensor> out;
  for (const Param<float>* p : params) out.push_back({p->name, p->value});
  return out;
}

void ImportParameters(const std::vector<NamedTensor>& tensors, const ParamList<float>& params) {
  if (tensors.size() != params.size()) {
    throw ShapeMismatch("file holds " + std::to_string(tensors.size()) + " tensors, network has " +
                        std::to_string(params.size()));
  }
  for (Param<float>* p : params) {
    const NamedTensor* match = nullptr;
    for (const auto& t : tensors) {
      if (t.name == p->name) match = &t;
    }
    if (match == nullptr) throw ShapeMismatch("missing tensor " + p->name);
    if (match->tensor.shape() != p->value.shape()) throw ShapeMismatch("shape of " + p->name);
    p->value = match->tensor;
  }
}

void SaveWeights(PolicyNet<float>& net, const std::string& path) {
  SaveTensors(ExportParameters(net.Parameters()), path);
}
void LoadWeights(PolicyNet<float>& net, const std::string& path) {
  ImportParameters(LoadTensors(path), net.Parameters());
}
void SaveWeights(Discriminator<float>& net, const std::string& path) {
  SaveTensors(ExportParameters(net.Parameters()), path);
}
void LoadWeights(Discriminator<float>& net, const std::string& path) {
  ImportParameters(LoadTensors(path), net.Parameters());
}

PolicyNet<float> LoadPolicy(const std::string& path, const NetSpec& spec) {
  PolicyNet<float> net(spec, 0);
  LoadWeights(net, path);
  return net;
}

}  // namespace laneforge::nn
