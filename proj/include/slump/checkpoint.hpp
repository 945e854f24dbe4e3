#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "slump/models.hpp"

namespace slump {

// Binary layout, little-endian:
//   "SLMPCKPT" | u16 version | u8 model-id | u32 record count
//   per record: u16 name length | UTF-8 name | u8 rank | u32 extents... |
//               u8 dtype (bit 7 set = non-trainable) | raw element bytes
// Trainable tensors come first, then moving statistics, then "meta." scalars.
struct Checkpoint {
  static constexpr char kMagic[8] = {'S', 'L', 'M', 'P', 'C', 'K', 'P', 'T'};
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::uint8_t kNonTrainableBit = 0x80;

  struct Record {
    std::string name;
    Shape shape;
    DType dtype = DType::kF32;
    bool trainable = true;
    std::vector<std::uint8_t> bytes;
  };

  ModelId model = ModelId::kC;
  std::vector<Record> records;

  template <typename T>
  static Checkpoint from_model(const Model<T>& model, const std::map<std::string, double>& metadata = {});

  // Copies values into a model of the same architecture; throws on any
  // name, shape, or dtype mismatch.
  template <typename T>
  void apply_to(Model<T>& model) const;

  std::map<std::string, double> metadata() const;
  std::size_t trainable_count() const;

  std::vector<std::uint8_t> serialize() const;
  static Checkpoint deserialize(const std::vector<std::uint8_t>& bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace slump
