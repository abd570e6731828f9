#include "rediffuse/config.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "rediffuse/attack.hpp"
#include "rediffuse/errors.hpp"
#include "rediffuse/rng.hpp"

namespace rediffuse {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

template <typename T>
T typed(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    bad("config: wrong type for '" + where + "'");
  }
}

double positive(const json& j, const std::string& where) {
  double v = typed<double>(j, where);
  if (!std::isfinite(v)) bad("config: '" + where + "' must be finite");
  return v;
}

void parse_dataset(DatasetConfig& d, const json& j) {
  for (const auto& [key, val] : j.items()) {
    if (key == "kind")
      d.kind = typed<std::string>(val, "dataset.kind");
    else if (key == "n")
      d.n = typed<size_t>(val, "dataset.n");
    else if (key == "side")
      d.side = typed<uint32_t>(val, "dataset.side");
    else if (key == "style_shift")
      d.style_shift = typed<bool>(val, "dataset.style_shift");
    else if (key == "dim")
      d.dim = typed<size_t>(val, "dataset.dim");
    else if (key == "components")
      d.components = typed<size_t>(val, "dataset.components");
    else if (key == "sigma")
      d.sigma = positive(val, "dataset.sigma");
    else
      bad("config: unknown key 'dataset." + key + "'");
  }
}

void parse_schedule(ScheduleConfig& s, const json& j) {
  for (const auto& [key, val] : j.items()) {
    if (key == "T")
      s.T = typed<int>(val, "schedule.T");
    else if (key == "beta_start")
      s.beta_start = positive(val, "schedule.beta_start");
    else if (key == "beta_end")
      s.beta_end = positive(val, "schedule.beta_end");
    else
      bad("config: unknown key 'schedule." + key + "'");
  }
}

void parse_train(TrainSection& t, const json& j) {
  for (const auto& [key, val] : j.items()) {
    if (key == "steps")
      t.steps = typed<int>(val, "train.steps");
    else if (key == "batch_size")
      t.batch_size = typed<int>(val, "train.batch_size");
    else if (key == "width")
      t.width = typed<int>(val, "train.width");
    else if (key == "depth")
      t.depth = typed<int>(val, "train.depth");
    else if (key == "time_dim")
      t.time_dim = typed<int>(val, "train.time_dim");
    else if (key == "lr")
      t.lr = positive(val, "train.lr");
    else if (key == "log_every")
      t.log_every = typed<int>(val, "train.log_every");
    else
      bad("config: unknown key 'train." + key + "'");
  }
}

void parse_attack(AttackConfig& a, const json& j) {
  for (const auto& [key, val] : j.items()) {
    if (key == "method")
      a.method = typed<std::string>(val, "attack.method");
    else if (key == "n")
      a.n = typed<int>(val, "attack.n");
    else if (key == "t")
      a.t = typed<int>(val, "attack.t");
    else if (key == "k")
      a.k = typed<int>(val, "attack.k");
    else if (key == "distance")
      a.distance = typed<std::string>(val, "attack.distance");
    else if (key == "p")
      a.p = typed<int>(val, "attack.p");
    else
      bad("config: unknown key 'attack." + key + "'");
  }
}

void parse_eval(EvalConfig& e, const json& j) {
  for (const auto& [key, val] : j.items()) {
    if (key == "target_fpr")
      e.target_fpr = positive(val, "eval.target_fpr");
    else
      bad("config: unknown key 'eval." + key + "'");
  }
}

json dump_config(const ExperimentConfig& c, bool with_output_dir) {
  json j;
  j["seed"] = c.seed;
  if (with_output_dir) j["output_dir"] = c.output_dir;
  j["dataset"] = {{"kind", c.dataset.kind},
                  {"n", c.dataset.n},
                  {"side", c.dataset.side},
                  {"style_shift", c.dataset.style_shift},
                  {"dim", c.dataset.dim},
                  {"components", c.dataset.components},
                  {"sigma", c.dataset.sigma}};
  j["schedule"] = {{"T", c.schedule.T},
                   {"beta_start", c.schedule.beta_start},
                   {"beta_end", c.schedule.beta_end}};
  j["train"] = {{"steps", c.train.steps},
                {"batch_size", c.train.batch_size},
                {"width", c.train.width},
                {"depth", c.train.depth},
                {"time_dim", c.train.time_dim},
                {"lr", c.train.lr},
                {"log_every", c.train.log_every}};
  j["attack"] = {{"method", c.attack.method}, {"n", c.attack.n},
                 {"t", c.attack.t},           {"k", c.attack.k},
                 {"distance", c.attack.distance}, {"p", c.attack.p}};
  j["eval"] = {{"target_fpr", c.eval.target_fpr}};
  return j;
}

}  // namespace

void apply_config_json(ExperimentConfig& cfg, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("config: document must be a JSON object");
  for (const auto& [key, val] : j.items()) {
    if (key == "seed")
      cfg.seed = typed<uint64_t>(val, "seed");
    else if (key == "output_dir")
      cfg.output_dir = typed<std::string>(val, "output_dir");
    else if (key == "dataset")
      parse_dataset(cfg.dataset, val);
    else if (key == "schedule")
      parse_schedule(cfg.schedule, val);
    else if (key == "train")
      parse_train(cfg.train, val);
    else if (key == "attack")
      parse_attack(cfg.attack, val);
    else if (key == "eval")
      parse_eval(cfg.eval, val);
    else
      bad("config: unknown key '" + key + "'");
  }
}

ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig cfg;
  apply_config_json(cfg, text);
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  return dump_config(cfg, true).dump(2) + "\n";
}

void validate_config(const ExperimentConfig& cfg) {
  const DatasetConfig& d = cfg.dataset;
  if (d.kind != "gmm" && d.kind != "shapes")
    bad("config: dataset.kind must be 'gmm' or 'shapes'");
  if (d.n < 2) bad("config: dataset.n must be at least 2");
  if (d.kind == "shapes" && d.side < 8)
    bad("config: dataset.side must be at least 8");
  if (d.kind == "gmm" && d.style_shift)
    bad("config: style_shift applies to shapes datasets only");
  if (d.kind == "gmm" && (d.dim < 1 || d.components < 1))
    bad("config: dataset.dim and dataset.components must be positive");
  if (d.kind == "gmm" && !(d.sigma > 0.0))
    bad("config: dataset.sigma must be positive");

  const ScheduleConfig& s = cfg.schedule;
  if (s.T < 1) bad("config: schedule.T must be at least 1");
  if (!(s.beta_start > 0.0 && s.beta_start < 1.0) ||
      !(s.beta_end > 0.0 && s.beta_end < 1.0))
    bad("config: betas must lie in (0, 1)");
  if (s.beta_start > s.beta_end)
    bad("config: schedule.beta_start must not exceed beta_end");

  const TrainSection& t = cfg.train;
  if (t.steps < 1 || t.batch_size < 1 || t.width < 1 || t.depth < 1)
    bad("config: train sizes must be positive");
  if (t.time_dim < 2 || t.time_dim % 2 != 0)
    bad("config: train.time_dim must be even and at least 2");
  if (!(t.lr > 0.0)) bad("config: train.lr must be positive");
  if (t.log_every < 1) bad("config: train.log_every must be positive");

  const AttackConfig& a = cfg.attack;
  try {
    method_from_name(a.method);
  } catch (const std::invalid_argument&) {
    bad("config: unknown attack.method '" + a.method + "'");
  }
  if (a.n < 1) bad("config: attack.n must be at least 1");
  if (a.method == "rediffuse_plus" && a.n < 2)
    bad("config: rediffuse_plus needs attack.n of at least 2");
  if (a.t < 1 || a.t > s.T) bad("config: attack.t must be in [1, T]");
  if (a.k < 0 || a.k > s.T) bad("config: attack.k must be in [0, T]");
  if (a.distance != "lp" && a.distance != "ssim")
    bad("config: attack.distance must be 'lp' or 'ssim'");
  if (a.distance == "ssim" && cfg.dataset.kind != "shapes")
    bad("config: ssim distance needs a 2-d shapes dataset");
  if (a.p < 1 || a.p > 8) bad("config: attack.p must be in [1, 8]");

  if (!(cfg.eval.target_fpr >= 0.0 && cfg.eval.target_fpr <= 1.0))
    bad("config: eval.target_fpr must be in [0, 1]");
  if (cfg.output_dir.empty()) bad("config: output_dir must not be empty");
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::string canon = dump_config(cfg, false).dump();
  uint64_t h = fnv1a64(canon.data(), canon.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

}  // namespace rediffuse
