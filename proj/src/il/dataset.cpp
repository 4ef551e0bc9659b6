#include "laneforge/il/dataset.hpp"

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "laneforge/errors.hpp"

namespace laneforge {
namespace {

constexpr int kDatasetFormatVersion = 1;

void WriteFloats(const std::string& path, const float* data, size_t n) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  std::vector<uint8_t> bytes(n * 4);
  for (size_t i = 0; i < n; ++i) {
    const uint32_t u = std::bit_cast<uint32_t>(data[i]);
    for (int k = 0; k < 4; ++k) bytes[i * 4 + k] = static_cast<uint8_t>(u >> (8 * k));
  }
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path);
}

std::vector<float> ReadFloats(const std::string& path, size_t expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<uint8_t> bytes(expected * 4);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<size_t>(f.gcount()) != bytes.size() || f.peek() != EOF) {
    throw IoError(path + " does not hold " + std::to_string(expected) + " floats");
  }
  std::vector<float> out(expected);
  for (size_t i = 0; i < expected; ++i) {
    uint32_t u = 0;
    for (int k = 0; k < 4; ++k) u |= static_cast<uint32_t>(bytes[i * 4 + k]) << (8 * k);
    out[i] = std::bit_cast<float>(u);
  }
  return out;
}

}  // namespace

void Dataset::Add(const Observation* obs, const Action& action) {
  if (obs == nullptr) throw DimensionMismatch("dataset record needs an observation");
  if (obs->values.size() != static_cast<size_t>(kObsSize)) {
    throw DimensionMismatch("observation has " + std::to_string(obs->values.size()) + " values");
  }
  obs_.insert(obs_.end(), obs->values.begin(), obs->values.end());
  // Stored at file precision so a saved and reloaded dataset compares equal.
  actions_.emplace_back(static_cast<float>(action.throttle()), static_cast<float>(action.steering()));
}

void Dataset::Append(const Dataset& other) {
  obs_.insert(obs_.end(), other.obs_.begin(), other.obs_.end());
  actions_.insert(actions_.end(), other.actions_.begin(), other.actions_.end());
}

void Dataset::Reserve(size_t records) {
  obs_.reserve(records * kObsSize);
  actions_.reserve(records);
}

Observation Dataset::observation(size_t i) const {
  Observation o;
  std::copy(obs(i), obs(i) + kObsSize, o.values.begin());
  return o;
}

SplitIndices ShuffleSplit(size_t n, uint64_t seed) {
  if (n < kMinSplitRecords) {
    throw TooFewRecords("split needs at least " + std::to_string(kMinSplitRecords) +
                        " records, have " + std::to_string(n));
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  // Explicit Fisher-Yates so the permutation does not depend on the standard
  // library's shuffle.
  std::mt19937_64 rng(seed);
  for (size_t i = n - 1; i > 0; --i) {
    const size_t j = static_cast<size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  const size_t n_train = static_cast<size_t>(std::llround(kTrainFraction * static_cast<double>(n)));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return out;
}

void Dataset::Split(uint64_t seed) {
  SplitIndices s = ShuffleSplit(size(), seed);
  train_ = std::move(s.train);
  val_ = std::move(s.val);
  split_seed_ = seed;
}

Dataset SplitDataset(Dataset ds, uint64_t seed) {
  ds.Split(seed);
  return ds;
}

void SaveDataset(const Dataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json m;
  m["format_version"] = kDatasetFormatVersion;
  m["records"] = ds.size();
  m["obs_shape"] = {kObsHeight, kObsWidth, kChannels};
  m["action_dims"] = 2;
  m["split_seed"] = ds.split_seed() ? nlohmann::ordered_json(*ds.split_seed()) : nlohmann::ordered_json();
  m["maps"] = ds.info().maps;
  m["domain_rand"] = ds.info().domain_rand;
  m["seed"] = ds.info().seed;
  m["episodes"] = ds.info().episodes;
  m["steps_per_episode"] = ds.info().steps_per_episode;
  m["config_hash"] = ds.info().config_hash;
  std::ofstream f(dir + "/manifest.json");
  if (!f) throw IoError("cannot write manifest in " + dir);
  f << m.dump(2) << "\n";

  WriteFloats(dir + "/obs.f32", ds.obs_buffer().data(), ds.obs_buffer().size());
  std::vector<float> act;
  act.reserve(ds.size() * 2);
  for (const Action& a : ds.actions()) {
    act.push_back(static_cast<float>(a.throttle()));
    act.push_back(static_cast<float>(a.steering()));
  }
  WriteFloats(dir + "/act.f32", act.data(), act.size());
}

Dataset LoadDataset(const std::string& dir) {
  std::ifstream f(dir + "/manifest.json");
  if (!f) throw IoError("no manifest.json in " + dir);
  nlohmann::json m;
  try {
    f >> m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("manifest.json: ") + e.what());
  }
  if (m.value("format_version", 0) != kDatasetFormatVersion) {
    throw VersionMismatch("dataset format version " + m.value("format_version", nlohmann::json()).dump());
  }
  if (m.at("obs_shape") != nlohmann::json({kObsHeight, kObsWidth, kChannels})) {
    throw DimensionMismatch("dataset observation shape " + m.at("obs_shape").dump());
  }
  const size_t n = m.at("records").get<size_t>();
  std::vector<float> obs = ReadFloats(dir + "/obs.f32", n * kObsSize);
  std::vector<float> act = ReadFloats(dir + "/act.f32", n * 2);
  Dataset ds;
  ds.Reserve(n);
  Observation o;
  for (size_t i = 0; i < n; ++i) {
    std::copy(obs.begin() + static_cast<std::ptrdiff_t>(i * kObsSize),
              obs.begin() + static_cast<std::ptrdiff_t>((i + 1) * kObsSize), o.values.begin());
    ds.Add(o, Action(act[2 * i], act[2 * i + 1]));
  }
  ds.info().maps = m.at("maps").get<std::vector<std::string>>();
  ds.info().domain_rand = m.at("domain_rand").get<bool>();
  ds.info().seed = m.at("seed").get<uint64_t>();
  ds.info().episodes = m.value("episodes", 0);
  ds.info().steps_per_episode = m.value("steps_per_episode", 0);
  ds.info().config_hash = m.value("config_hash", "");
  if (!m.at("split_seed").is_null()) ds.Split(m.at("split_seed").get<uint64_t>());
  return ds;
}

}  // namespace laneforge
