#include "slump/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace slump {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  std::vector<std::uint8_t> bytes(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(b_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw Error(ErrorCode::kFormat, "checkpoint truncated");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

std::size_t dtype_size(DType d) { return d == DType::kF32 ? 4 : 8; }

template <typename T>
Checkpoint::Record make_record(const std::string& name, const Tensor<T>& t, bool trainable) {
  Checkpoint::Record r{name, t.shape(), dtype_of<T>::value, trainable, {}};
  r.bytes.resize(t.numel() * sizeof(T));
  std::memcpy(r.bytes.data(), t.data().data(), r.bytes.size());
  return r;
}

}  // namespace

template <typename T>
Checkpoint Checkpoint::from_model(const Model<T>& model, const std::map<std::string, double>& metadata) {
  Checkpoint c;
  c.model = model.id();
  for (const auto& p : model.parameters()) c.records.push_back(make_record<T>(p.name, p.tensor, p.trainable));
  for (const auto& [key, value] : metadata)
    c.records.push_back(make_record<double>("meta." + key, Tensor<double>(Shape{1}, {value}), false));
  return c;
}

template <typename T>
void Checkpoint::apply_to(Model<T>& model) const {
  if (model.id() != this->model)
    throw Error(ErrorCode::kShapeMismatch, std::string("checkpoint holds model ") + model_letter(this->model) +
                                               ", target is " + model_letter(model.id()));
  auto params = model.parameters();
  std::size_t ri = 0;
  for (auto& p : params) {
    while (ri < records.size() && records[ri].name.rfind("meta.", 0) == 0) ++ri;
    if (ri >= records.size()) throw Error(ErrorCode::kFormat, "checkpoint is missing " + p.name);
    const Record& r = records[ri++];
    if (r.name != p.name || r.shape != p.tensor.shape() || r.dtype != dtype_of<T>::value)
      throw Error(ErrorCode::kShapeMismatch, "checkpoint record " + r.name + shape_str(r.shape) +
                                                 " does not fit parameter " + p.name + shape_str(p.tensor.shape()));
    std::memcpy(p.tensor.mutable_data().data(), r.bytes.data(), r.bytes.size());
  }
}

std::map<std::string, double> Checkpoint::metadata() const {
  std::map<std::string, double> out;
  for (const auto& r : records) {
    if (r.name.rfind("meta.", 0) != 0 || r.dtype != DType::kF64 || r.bytes.size() != 8) continue;
    double v;
    std::memcpy(&v, r.bytes.data(), 8);
    out[r.name.substr(5)] = v;
  }
  return out;
}

std::size_t Checkpoint::trainable_count() const {
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.trainable) n += numel_of(r.shape);
  return n;
}

std::vector<std::uint8_t> Checkpoint::serialize() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint16_t>(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(model));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(r.name.size()));
    out.insert(out.end(), r.name.begin(), r.name.end());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(r.shape.size()));
    for (auto e : r.shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(e));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(static_cast<std::uint8_t>(r.dtype) |
                                                      (r.trainable ? 0 : kNonTrainableBit)));
    out.insert(out.end(), r.bytes.begin(), r.bytes.end());
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::vector<std::uint8_t>& bytes) {
  Reader rd(bytes);
  const auto magic = rd.bytes(8);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) throw Error(ErrorCode::kFormat, "bad checkpoint magic");
  const auto version = rd.get<std::uint16_t>();
  if (version != kVersion) throw Error(ErrorCode::kFormat, "unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  const auto id = rd.get<std::uint8_t>();
  c.model = parse_model_id(std::string(1, static_cast<char>(id)));
  const auto count = rd.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    Record r;
    const auto len = rd.get<std::uint16_t>();
    const auto name = rd.bytes(len);
    r.name.assign(name.begin(), name.end());
    const auto rank = rd.get<std::uint8_t>();
    for (std::uint8_t d = 0; d < rank; ++d) r.shape.push_back(rd.get<std::uint32_t>());
    const auto tag = rd.get<std::uint8_t>();
    const auto dt = static_cast<std::uint8_t>(tag & ~kNonTrainableBit);
    if (dt > 1) throw Error(ErrorCode::kFormat, "unknown dtype tag in record " + r.name);
    r.dtype = static_cast<DType>(dt);
    r.trainable = (tag & kNonTrainableBit) == 0;
    validate_shape(r.shape);
    r.bytes = rd.bytes(numel_of(r.shape) * dtype_size(r.dtype));
    c.records.push_back(std::move(r));
  }
  if (!rd.done()) throw Error(ErrorCode::kFormat, "trailing bytes after checkpoint records");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

template Checkpoint Checkpoint::from_model<float>(const Model<float>&, const std::map<std::string, double>&);
template Checkpoint Checkpoint::from_model<double>(const Model<double>&, const std::map<std::string, double>&);
template void Checkpoint::apply_to<float>(Model<float>&) const;
template void Checkpoint::apply_to<double>(Model<double>&) const;

}  // namespace slump
