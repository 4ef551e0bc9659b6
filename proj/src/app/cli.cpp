#include "laneforge/app/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "laneforge/app/config.hpp"
#include "laneforge/errors.hpp"
#include "laneforge/eval/metrics.hpp"
#include "laneforge/eval/policy.hpp"
#include "laneforge/il/collect.hpp"
#include "laneforge/il/dagger.hpp"
#include "laneforge/il/gail.hpp"
#include "laneforge/il/train_bc.hpp"
#include "laneforge/nn/weights_io.hpp"
#include "laneforge/render/renderer.hpp"

namespace laneforge {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Flags {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> domain_rand;

  // collect
  std::optional<int> episodes;
  std::optional<int> steps;
  // training
  std::string data;
  std::string out;
  std::string init;
  std::optional<int> max_epochs;
  std::optional<int> iterations;
  std::optional<int> episodes_per_iter;
  std::optional<int> gail_epochs;
  std::string save_data;
  // eval
  std::string policy = "expert";
  std::optional<int> eval_episodes;
  std::vector<uint64_t> seeds;
  std::vector<std::string> maps;
  std::string trace;
  int trace_episode = 1;
  // render-preview
  std::string map;
  bool observation = false;
};

void ApplyThreadLimit() {
  const char* v = std::getenv("LANEFORGE_THREADS");
  if (v == nullptr || *v == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n <= 0) {
    throw ConfigError(std::string("LANEFORGE_THREADS must be a positive integer, got '") + v + "'");
  }
  omp_set_num_threads(static_cast<int>(n));
}

std::vector<std::shared_ptr<const TrackMap>> LoadMaps(const std::vector<std::string>& names) {
  std::vector<std::shared_ptr<const TrackMap>> maps;
  for (const auto& n : names) maps.push_back(LoadBundledMap(n));
  return maps;
}

std::string OrDefault(const std::string& v, const fs::path& fallback) {
  return v.empty() ? fallback.string() : v;
}

void WriteJson(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

// Sidecar next to a weight file: foo.lfw -> foo.json.
fs::path Sidecar(const fs::path& weights) {
  fs::path p = weights;
  return p.replace_extension(".json");
}

Json ReportJson(const TrainReport& r) {
  Json j;
  j["epochs_run"] = r.epochs_run;
  j["best_epoch"] = r.best_epoch;
  j["best_val_loss"] = r.best_val_loss;
  j["stopped_early"] = r.stopped_early;
  j["loss_history"] = Json::array();
  for (const EpochLoss& e : r.loss_history) {
    j["loss_history"].push_back({{"epoch", e.epoch}, {"train", e.train}, {"val", e.val}});
  }
  return j;
}

Json ArtifactHeader(const RunConfig& cfg, const std::string& kind) {
  Json j;
  j["kind"] = kind;
  j["config_hash"] = ConfigHash(cfg);
  j["seed"] = cfg.seed;
  j["domain_rand"] = cfg.domain_rand.enabled;
  return j;
}

Dataset LoadSplitDataset(const RunConfig& cfg, const std::string& dir) {
  Dataset ds = LoadDataset(dir);
  if (!ds.has_split()) ds.Split(StageSeed(cfg, SeedStream::kSplit));
  return ds;
}

TrainConfig TrainSettings(const RunConfig& cfg) {
  TrainConfig t = cfg.train;
  t.seed = StageSeed(cfg, SeedStream::kTrain);
  return t;
}

EpochCallback EpochPrinter(std::ostream& out, const std::string& label) {
  return [&out, label](const EpochLoss& e) {
    out << label << " epoch " << e.epoch << " train " << e.train << " val " << e.val << "\n";
  };
}

int Collect(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  Environment env(LoadMaps(cfg.train_maps), cfg.domain_rand);
  CollectOptions o;
  o.episodes = cfg.collect.episodes;
  o.steps_per_episode = cfg.collect.steps_per_episode;
  o.domain_rand = cfg.domain_rand.enabled;
  o.seed = StageSeed(cfg, SeedStream::kCollect);
  o.expert = cfg.expert;
  Dataset ds = CollectDemonstrations(env, o);
  ds.info().seed = cfg.seed;
  ds.info().config_hash = ConfigHash(cfg);
  ds.Split(StageSeed(cfg, SeedStream::kSplit));
  const std::string dir = OrDefault(f.out, fs::path(cfg.out_dir) / "dataset");
  SaveDataset(ds, dir);
  out << "collected " << ds.size() << " records into " << dir << "\n";
  return kExitOk;
}

int TrainBcCommand(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const std::string data = OrDefault(f.data, fs::path(cfg.out_dir) / "dataset");
  const fs::path weights = OrDefault(f.out, fs::path(cfg.out_dir) / "bc.lfw");
  Dataset ds = LoadSplitDataset(cfg, data);
  nn::PolicyNet<float> net(nn::NetSpec{}, StageSeed(cfg, SeedStream::kPolicyInit));
  TrainReport r = TrainBc(ds, net, TrainSettings(cfg), EpochPrinter(out, "bc"));
  if (weights.has_parent_path()) fs::create_directories(weights.parent_path());
  nn::SaveWeights(net, weights.string());
  Json j = ArtifactHeader(cfg, "policy/bc");
  j["weights"] = weights.filename().string();
  j["dataset"] = data;
  j["records"] = ds.size();
  j["report"] = ReportJson(r);
  WriteJson(Sidecar(weights), j);
  out << "best epoch " << r.best_epoch << " val " << r.best_val_loss << " -> " << weights.string()
      << "\n";
  return kExitOk;
}

int TrainDaggerCommand(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const std::string data = OrDefault(f.data, fs::path(cfg.out_dir) / "dataset");
  const fs::path weights = OrDefault(f.out, fs::path(cfg.out_dir) / "dagger.lfw");
  Dataset ds = LoadSplitDataset(cfg, data);
  Environment env(LoadMaps(cfg.train_maps), cfg.domain_rand);
  DaggerOptions o;
  o.iterations = cfg.dagger.iterations;
  o.episodes_per_iter = cfg.dagger.episodes_per_iter;
  o.steps_per_episode = cfg.dagger.steps_per_episode;
  o.domain_rand = cfg.domain_rand.enabled;
  o.seed = StageSeed(cfg, SeedStream::kDagger);
  o.split_seed = StageSeed(cfg, SeedStream::kSplit);
  o.expert = cfg.expert;
  o.train = TrainSettings(cfg);
  nn::PolicyNet<float> net(nn::NetSpec{}, StageSeed(cfg, SeedStream::kPolicyInit));
  DaggerHooks hooks;
  hooks.on_epoch = [&out](int round, const EpochLoss& e) {
    out << "dagger round " << round << " epoch " << e.epoch << " train " << e.train << " val "
        << e.val << "\n";
  };
  DaggerReport r = TrainDagger(env, ds, net, o, hooks);
  if (weights.has_parent_path()) fs::create_directories(weights.parent_path());
  nn::SaveWeights(net, weights.string());
  if (!f.save_data.empty()) {
    ds.info().config_hash = ConfigHash(cfg);
    SaveDataset(ds, f.save_data);
  }
  Json j = ArtifactHeader(cfg, "policy/dagger");
  j["weights"] = weights.filename().string();
  j["dataset"] = data;
  j["dataset_sizes"] = r.dataset_sizes;
  j["rounds"] = Json::array();
  for (const TrainReport& t : r.rounds) j["rounds"].push_back(ReportJson(t));
  WriteJson(Sidecar(weights), j);
  out << "aggregated " << ds.size() << " records -> " << weights.string() << "\n";
  return kExitOk;
}

int TrainGailCommand(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const std::string data = OrDefault(f.data, fs::path(cfg.out_dir) / "dataset");
  const fs::path weights = OrDefault(f.out, fs::path(cfg.out_dir) / "gail.lfw");
  Dataset ds = LoadSplitDataset(cfg, data);
  nn::PolicyNet<float> policy(nn::NetSpec{}, StageSeed(cfg, SeedStream::kPolicyInit));
  Json j = ArtifactHeader(cfg, "policy/gail");
  if (!f.init.empty()) {
    nn::LoadWeights(policy, f.init);
    j["pretrained_from"] = f.init;
  } else {
    TrainReport pre = TrainBc(ds, policy, TrainSettings(cfg), EpochPrinter(out, "pretrain"));
    j["pretrain"] = ReportJson(pre);
  }
  nn::Discriminator<float> disc(nn::NetSpec{}, StageSeed(cfg, SeedStream::kDiscInit));
  ReplayBuffer buffer(cfg.gail.buffer_trajectories, cfg.gail.options.rollout_len);
  GailOptions o = cfg.gail.options;
  o.domain_rand = cfg.domain_rand.enabled;
  o.seed = StageSeed(cfg, SeedStream::kGail);
  Environment env(LoadMaps(cfg.train_maps), cfg.domain_rand);
  j["epochs"] = Json::array();
  TrainGail(env, ds, policy, disc, buffer, o, [&](const GailEpoch& e) {
    out << "gail epoch " << e.epoch << " disc_loss " << e.disc_loss << " disc_acc "
        << e.disc_accuracy << " reward " << e.mean_reward << "\n";
    j["epochs"].push_back({{"epoch", e.epoch},
                           {"disc_loss", e.disc_loss},
                           {"disc_accuracy", e.disc_accuracy},
                           {"mean_reward", e.mean_reward},
                           {"policy_loss", e.policy_loss},
                           {"baseline", e.baseline},
                           {"buffer_trajectories", e.buffer_trajectories},
                           {"buffer_pairs", e.buffer_pairs}});
  });
  if (weights.has_parent_path()) fs::create_directories(weights.parent_path());
  nn::SaveWeights(policy, weights.string());
  fs::path disc_path = weights;
  disc_path.replace_filename(weights.stem().string() + "_disc.lfw");
  nn::SaveWeights(disc, disc_path.string());
  j["weights"] = weights.filename().string();
  j["discriminator"] = disc_path.filename().string();
  j["buffer"] = {{"capacity_pairs", buffer.capacity_pairs()},
                 {"offered", buffer.offered()},
                 {"evicted", buffer.evicted()}};
  WriteJson(Sidecar(weights), j);
  out << "gail -> " << weights.string() << "\n";
  return kExitOk;
}

int EvalCommand(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  std::unique_ptr<Policy> policy;
  if (f.policy == "expert") {
    policy = std::make_unique<ExpertPolicy>(cfg.expert);
  } else {
    policy = std::make_unique<NetPolicy>(nn::LoadPolicy(f.policy));
  }
  Environment env(LoadMaps(f.maps.empty() ? cfg.eval_maps : f.maps), cfg.domain_rand);
  EvalOptions o;
  o.episodes = cfg.eval.episodes;
  o.seeds = cfg.eval.seeds;
  o.max_steps = cfg.eval.max_steps;
  o.domain_rand = cfg.domain_rand.enabled;
  std::vector<TrajectoryLog> logs;
  EvalSummary s = Evaluate(*policy, env, o, &logs);
  const fs::path report = OrDefault(f.out, fs::path(cfg.out_dir) / "eval.json");
  if (report.has_parent_path()) fs::create_directories(report.parent_path());
  {
    std::ofstream file(report);
    if (!file) throw IoError("cannot write " + report.string());
    file << SummaryJson(s, ConfigHash(cfg), cfg.seed) << "\n";
  }
  if (!f.trace.empty()) {
    if (f.trace_episode < 1 || f.trace_episode > static_cast<int>(logs.size())) {
      throw ConfigError("--trace-episode must lie in [1, " + std::to_string(logs.size()) + "]");
    }
    WriteTrace(logs[static_cast<size_t>(f.trace_episode - 1)], f.trace);
  }
  out << SummaryText(s);
  return kExitOk;
}

int RenderPreview(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const std::string map = f.map.empty() ? cfg.train_maps.front() : f.map;
  Environment env({LoadBundledMap(map)}, cfg.domain_rand);
  ResetOptions r;
  r.seed = cfg.seed;
  r.domain_rand = cfg.domain_rand.enabled;
  ResetResult start = env.Reset(r);
  RawImage img = Render(start.state, env.track(), start.params);
  if (f.observation) {
    // Block means blown back up to full size.
    const Observation o = Preprocess(img);
    for (int row = 0; row < kRawHeight; ++row) {
      for (int col = 0; col < kRawWidth; ++col) {
        for (int c = 0; c < kChannels; ++c) {
          const float v = o.at(row * kObsHeight / kRawHeight, col * kObsWidth / kRawWidth, c);
          img.pixels[(static_cast<size_t>(row) * kRawWidth + col) * kChannels + c] =
              static_cast<uint8_t>(std::lround(v * 255.0f));
        }
      }
    }
  }
  const fs::path path = OrDefault(f.out, fs::path(cfg.out_dir) / "preview.ppm");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WritePpm(img, path.string());
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lane-following simulator and imitation learning pipeline", "laneforge"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "run configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "run seed");
  app.add_option("--out-dir", f.out_dir, "artifact directory");
  app.add_option("--domain-rand", f.domain_rand, "domain randomization")
      ->check(CLI::IsMember({"on", "off"}));

  auto* collect = app.add_subcommand("collect", "record expert demonstrations");
  collect->add_option("--episodes", f.episodes);
  collect->add_option("--steps", f.steps, "steps per episode");
  collect->add_option("--out", f.out, "dataset directory");

  auto* bc = app.add_subcommand("train-bc", "behavioral cloning");
  auto* dagger = app.add_subcommand("train-dagger", "DAgger from an initial dataset");
  auto* gail = app.add_subcommand("train-gail", "GAIL with BC pretraining");
  for (auto* sub : {bc, dagger, gail}) {
    sub->add_option("--data", f.data, "dataset directory");
    sub->add_option("--out", f.out, "weights file");
    sub->add_option("--max-epochs", f.max_epochs);
  }
  dagger->add_option("--iterations", f.iterations);
  dagger->add_option("--episodes-per-iter", f.episodes_per_iter);
  dagger->add_option("--save-data", f.save_data, "write the aggregated dataset here");
  gail->add_option("--init", f.init, "pretrained policy weights");
  gail->add_option("--epochs", f.gail_epochs);

  auto* eval = app.add_subcommand("eval", "median metrics over seeded episodes");
  eval->add_option("--policy", f.policy, "weights file or 'expert'");
  eval->add_option("--episodes", f.eval_episodes);
  eval->add_option("--seeds", f.seeds)->delimiter(',');
  eval->add_option("--maps", f.maps)->delimiter(',');
  eval->add_option("--out", f.out, "summary JSON");
  eval->add_option("--trace", f.trace, "per-step CSV of one episode");
  eval->add_option("--trace-episode", f.trace_episode);

  auto* preview = app.add_subcommand("render-preview", "render the spawn frame as PPM");
  preview->add_option("--map", f.map);
  preview->add_option("--out", f.out, "PPM path");
  preview->add_flag("--observation", f.observation, "show the downsampled network input");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    ApplyThreadLimit();
    RunConfig cfg = f.config.empty() ? RunConfig{} : LoadRunConfig(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.out_dir) cfg.out_dir = *f.out_dir;
    if (f.domain_rand) cfg.domain_rand.enabled = *f.domain_rand == "on";
    if (f.episodes) cfg.collect.episodes = *f.episodes;
    if (f.steps) cfg.collect.steps_per_episode = *f.steps;
    if (f.max_epochs) cfg.train.max_epochs = *f.max_epochs;
    if (f.iterations) cfg.dagger.iterations = *f.iterations;
    if (f.episodes_per_iter) cfg.dagger.episodes_per_iter = *f.episodes_per_iter;
    if (f.gail_epochs) cfg.gail.options.epochs = *f.gail_epochs;
    if (f.eval_episodes) cfg.eval.episodes = *f.eval_episodes;
    if (!f.seeds.empty()) cfg.eval.seeds = f.seeds;
    if (f.eval_episodes && f.seeds.empty()) {
      cfg.eval.seeds.clear();
      for (int i = 1; i <= *f.eval_episodes; ++i) cfg.eval.seeds.push_back(static_cast<uint64_t>(i));
    }
    if (!f.seeds.empty() && !f.eval_episodes) cfg.eval.episodes = static_cast<int>(f.seeds.size());
    cfg.Validate();

    if (collect->parsed()) return Collect(cfg, f, out);
    if (bc->parsed()) return TrainBcCommand(cfg, f, out);
    if (dagger->parsed()) return TrainDaggerCommand(cfg, f, out);
    if (gail->parsed()) return TrainGailCommand(cfg, f, out);
    if (eval->parsed()) return EvalCommand(cfg, f, out);
    return RenderPreview(cfg, f, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace laneforge
