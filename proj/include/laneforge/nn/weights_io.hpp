#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "laneforge/nn/networks.hpp"
#include "laneforge/nn/tensor.hpp"

namespace laneforge::nn {

// Weight file layout (all integers little-endian):
//   "LFW1" | u16 version | u32 tensor count |
//   per tensor: u32 name length | name | u32 rank | u32 dims[rank] | f32 data |
//   u32 CRC32 of every preceding byte
inline constexpr uint16_t kWeightFormatVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor<float> tensor;
};

std::vector<uint8_t> EncodeWeights(const std::vector<NamedTensor>& tensors);
// Throws VersionMismatch, ChecksumMismatch or IoError.
std::vector<NamedTensor> DecodeWeights(const std::vector<uint8_t>& bytes);

void SaveTensors(const std::vector<NamedTensor>& tensors, const std::string& path);
std::vector<NamedTensor> LoadTensors(const std::string& path);

std::vector<NamedTensor> ExportParameters(const ParamList<float>& params);
// Copies tensors into parameters by name; ShapeMismatch on any disagreement.
void ImportParameters(const std::vector<NamedTensor>& tensors, const ParamList<float>& params);

void SaveWeights(PolicyNet<float>& net, const std::string& path);
void LoadWeights(PolicyNet<float>& net, const std::string& path);
void SaveWeights(Discriminator<float>& net, const std::string& path);
void LoadWeights(Discriminator<float>& net, const std::string& path);

PolicyNet<float> LoadPolicy(const std::string& path, const NetSpec& spec = {});

}  // namespace laneforge::nn
