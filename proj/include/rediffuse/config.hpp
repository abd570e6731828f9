#pragma once

#include <cstdint>
#include <string>

namespace rediffuse {

struct DatasetConfig {
  std::string kind = "shapes";  // gmm | shapes
  size_t n = 400;
  uint32_t side = 16;        // shapes: image side
  bool style_shift = false;  // shapes: restyle nonmembers before scoring
  size_t dim = 8;            // gmm: point dimension
  size_t components = 4;     // gmm: mixture size
  double sigma = 0.05;       // gmm: component spread
};

struct ScheduleConfig {
  int T = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
};

struct TrainSection {
  int steps = 12000;
  int batch_size = 32;
  int width = 128;
  int depth = 3;
  int time_dim = 16;
  double lr = 1e-3;
  int log_every = 500;
};

struct AttackConfig {
  std::string method = "rediffuse";  // rediffuse | rediffuse_plus | loss_baseline
  int n = 10;                        // repeats to average
  int t = 200;                       // diffusion step of the API call
  int k = 0;                         // sampling interval; 0 lets the service pick t/2
  std::string distance = "lp";       // lp | ssim
  int p = 1;                         // exponent for lp
};

struct EvalConfig {
  double target_fpr = 0.01;
};

struct ExperimentConfig {
  uint64_t seed = 42;
  std::string output_dir = "out";
  DatasetConfig dataset;
  ScheduleConfig schedule;
  TrainSection train;
  AttackConfig attack;
  EvalConfig eval;
};

// Strict parse: unknown keys and wrong types raise ConfigError. Keys absent
// from the document keep their current values, so a partial file works as an
// overlay on defaults or on flag-derived settings.
void apply_config_json(ExperimentConfig& cfg, const std::string& text);
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

// Raises ConfigError with the offending field named.
void validate_config(const ExperimentConfig& cfg);

// Hash of the canonical JSON form; output_dir is excluded so the same
// experiment writes the same hash wherever it lands.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace rediffuse
