#include "laneforge/app/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <zlib.h>

#include "laneforge/errors.hpp"
#include "laneforge/sim/seed.hpp"
#include "laneforge/sim/track_map.hpp"

namespace laneforge {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename V>
V ParseNumber(const std::string& text, const std::string& field) {
  const std::string t = Trim(text);
  V v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(field + ": cannot parse '" + t + "' as a number");
  }
  return v;
}

// Read/Show convert one field type from and to its text form.
void Read(const std::string& s, const std::string& f, int& v) { v = ParseNumber<int>(s, f); }
void Read(const std::string& s, const std::string& f, uint64_t& v) { v = ParseNumber<uint64_t>(s, f); }
void Read(const std::string& s, const std::string& f, double& v) { v = ParseNumber<double>(s, f); }
void Read(const std::string& s, const std::string& f, bool& v) {
  const std::string t = Trim(s);
  if (t == "true" || t == "on") {
    v = true;
  } else if (t == "false" || t == "off") {
    v = false;
  } else {
    throw ConfigError(f + ": expected true/false, got '" + t + "'");
  }
}
void Read(const std::string& s, const std::string&, std::string& v) { v = Trim(s); }
void Read(const std::string& s, const std::string&, std::vector<std::string>& v) { v = SplitList(s); }
void Read(const std::string& s, const std::string& f, std::vector<uint64_t>& v) {
  v.clear();
  for (const auto& item : SplitList(s)) v.push_back(ParseNumber<uint64_t>(item, f));
}
void Read(const std::string& s, const std::string& f, Range& v) {
  auto items = SplitList(s);
  if (items.size() != 2) throw ConfigError(f + ": expected 'lo, hi'");
  v = {ParseNumber<double>(items[0], f), ParseNumber<double>(items[1], f)};
}
void Read(const std::string& s, const std::string& f, ColorRange& v) {
  auto items = SplitList(s);
  if (items.size() != 6) throw ConfigError(f + ": expected six numbers, lo rgb then hi rgb");
  for (int c = 0; c < 3; ++c) {
    v.lo[c] = ParseNumber<double>(items[c], f);
    v.hi[c] = ParseNumber<double>(items[c + 3], f);
  }
}

std::string Show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string Show(int v) { return std::to_string(v); }
std::string Show(uint64_t v) { return std::to_string(v); }
std::string Show(bool v) { return v ? "true" : "false"; }
std::string Show(const std::string& v) { return v; }
template <typename T>
std::string Show(const std::vector<T>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + Show(v[i]);
  return out;
}
std::string Show(const Range& r) { return Show(r.lo) + ", " + Show(r.hi); }
std::string Show(const ColorRange& r) {
  return Show(std::vector<double>{r.lo[0], r.lo[1], r.lo[2], r.hi[0], r.hi[1], r.hi[2]});
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> read;
  std::function<std::string(const RunConfig&)> show;
};

template <typename Access>
Field Bind(std::string section, std::string key, Access access) {
  const std::string name = section + "." + key;
  return {section, key,
          [=](RunConfig& c, const std::string& s) { Read(s, name, access(c)); },
          [=](const RunConfig& c) { return Show(access(const_cast<RunConfig&>(c))); }};
}

#define LF_FIELD(section, key, expr) \
  Bind(section, key, [](RunConfig& c) -> auto& { return c.expr; })

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      LF_FIELD("run", "seed", seed),
      LF_FIELD("run", "out_dir", out_dir),
      LF_FIELD("maps", "train", train_maps),
      LF_FIELD("maps", "eval", eval_maps),
      LF_FIELD("domain_rand", "enabled", domain_rand.enabled),
      LF_FIELD("domain_rand", "wheel_base", domain_rand.wheel_base),
      LF_FIELD("domain_rand", "wheel_gain", domain_rand.wheel_gain),
      LF_FIELD("domain_rand", "cam_height", domain_rand.cam_height),
      LF_FIELD("domain_rand", "cam_pitch", domain_rand.cam_pitch),
      LF_FIELD("domain_rand", "cam_fov", domain_rand.cam_fov),
      LF_FIELD("domain_rand", "light_intensity", domain_rand.light_intensity),
      LF_FIELD("domain_rand", "road_color", domain_rand.road_color),
      LF_FIELD("domain_rand", "lane_white", domain_rand.lane_white),
      LF_FIELD("domain_rand", "lane_yellow", domain_rand.lane_yellow),
      LF_FIELD("domain_rand", "sky_color", domain_rand.sky_color),
      LF_FIELD("domain_rand", "grass_color", domain_rand.grass_color),
      LF_FIELD("domain_rand", "friction_scale", domain_rand.friction_scale),
      LF_FIELD("expert", "lookahead", expert.lookahead),
      LF_FIELD("expert", "v_straight", expert.v_straight),
      LF_FIELD("expert", "v_curve", expert.v_curve),
      LF_FIELD("expert", "kp_straight", expert.kp_straight),
      LF_FIELD("expert", "kp_curve", expert.kp_curve),
      LF_FIELD("expert", "kd_straight", expert.kd_straight),
      LF_FIELD("expert", "kd_curve", expert.kd_curve),
      LF_FIELD("collect", "episodes", collect.episodes),
      LF_FIELD("collect", "steps_per_episode", collect.steps_per_episode),
      LF_FIELD("train", "lr", train.adam.lr),
      LF_FIELD("train", "beta1", train.adam.beta1),
      LF_FIELD("train", "beta2", train.adam.beta2),
      LF_FIELD("train", "eps", train.adam.eps),
      LF_FIELD("train", "batch", train.batch),
      LF_FIELD("train", "patience", train.patience),
      LF_FIELD("train", "max_epochs", train.max_epochs),
      LF_FIELD("dagger", "iterations", dagger.iterations),
      LF_FIELD("dagger", "episodes_per_iter", dagger.episodes_per_iter),
      LF_FIELD("dagger", "steps_per_episode", dagger.steps_per_episode),
      LF_FIELD("gail", "epochs", gail.options.epochs),
      LF_FIELD("gail", "rollouts_per_epoch", gail.options.rollouts_per_epoch),
      LF_FIELD("gail", "rollout_len", gail.options.rollout_len),
      LF_FIELD("gail", "buffer_trajectories", gail.buffer_trajectories),
      LF_FIELD("gail", "disc_passes", gail.options.disc_passes),
      LF_FIELD("gail", "policy_passes", gail.options.policy_passes),
      LF_FIELD("gail", "batch", gail.options.batch),
      LF_FIELD("gail", "reward_clip", gail.options.reward_clip),
      LF_FIELD("gail", "baseline_rate", gail.options.baseline_rate),
      LF_FIELD("gail", "policy_lr", gail.options.policy_adam.lr),
      LF_FIELD("gail", "disc_lr", gail.options.disc_adam.lr),
      LF_FIELD("eval", "episodes", eval.episodes),
      LF_FIELD("eval", "seeds", eval.seeds),
      LF_FIELD("eval", "max_steps", eval.max_steps),
  };
  return fields;
}

#undef LF_FIELD

void RequirePositive(int v, const std::string& field) {
  if (v <= 0) throw ConfigError(field + " must be positive, got " + std::to_string(v));
}

void CheckMaps(const std::vector<std::string>& maps, const std::string& field) {
  if (maps.empty()) throw ConfigError(field + " lists no maps");
  const auto known = BundledMapNames();
  for (const auto& m : maps) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw ConfigError(field + ": unknown map '" + m + "'");
    }
  }
}

}  // namespace

void RunConfig::Validate() const {
  CheckMaps(train_maps, "maps.train");
  CheckMaps(eval_maps, "maps.eval");
  try {
    ValidateDomainRand(domain_rand);
  } catch (const InvalidRange& e) {
    throw ConfigError(std::string("domain_rand: ") + e.what());
  }
  expert.Validate();
  RequirePositive(collect.episodes, "collect.episodes");
  RequirePositive(collect.steps_per_episode, "collect.steps_per_episode");
  train.Validate();
  if (dagger.iterations < 0) throw ConfigError("dagger.iterations must be >= 0");
  RequirePositive(dagger.episodes_per_iter, "dagger.episodes_per_iter");
  RequirePositive(dagger.steps_per_episode, "dagger.steps_per_episode");
  gail.options.Validate();
  RequirePositive(gail.buffer_trajectories, "gail.buffer_trajectories");
  RequirePositive(eval.episodes, "eval.episodes");
  RequirePositive(eval.max_steps, "eval.max_steps");
  if (static_cast<int>(eval.seeds.size()) != eval.episodes) {
    throw ConfigError("eval.seeds lists " + std::to_string(eval.seeds.size()) + " seeds for " +
                      std::to_string(eval.episodes) + " episodes");
  }
}

RunConfig ParseRunConfig(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " at line " +
                      std::to_string(e.line()));
  }
  std::map<std::string, const Field*> index;
  for (const Field& f : Fields()) index[f.section + "." + f.key] = &f;

  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' must sit inside a [section]");
    }
    for (const auto& [key, value] : body) {
      auto it = index.find(section + "." + key);
      if (it == index.end()) throw ConfigError("unknown config key " + section + "." + key);
      it->second->read(config, value.data());
    }
  }
  return config;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ParseRunConfig(ss.str());
}

std::string CanonicalConfig(const RunConfig& config) {
  std::string out;
  for (const Field& f : Fields()) out += f.section + "." + f.key + " = " + f.show(config) + "\n";
  return out;
}

std::string ConfigHash(const RunConfig& config) {
  // Where artifacts go does not change what they contain.
  std::string text;
  for (const Field& f : Fields()) {
    if (f.section == "run" && f.key == "out_dir") continue;
    text += f.section + "." + f.key + " = " + f.show(config) + "\n";
  }
  const uLong crc = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(text.data()),
                          static_cast<uInt>(text.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

size_t CollectBudget(const RunConfig& c) {
  return static_cast<size_t>(c.collect.episodes) * static_cast<size_t>(c.collect.steps_per_episode);
}

size_t DaggerBudget(const RunConfig& c) {
  return CollectBudget(c) + static_cast<size_t>(c.dagger.iterations) *
                                static_cast<size_t>(c.dagger.episodes_per_iter) *
                                static_cast<size_t>(c.dagger.steps_per_episode);
}

size_t BufferPairBudget(const RunConfig& c) {
  return ReplayBuffer(c.gail.buffer_trajectories, c.gail.options.rollout_len).capacity_pairs();
}

uint64_t StageSeed(const RunConfig& config, SeedStream stream) {
  return DeriveSeed(config.seed, static_cast<uint64_t>(stream));
}

}  // namespace laneforge
