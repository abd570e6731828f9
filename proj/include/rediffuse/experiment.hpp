#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rediffuse/attack.hpp"
#include "rediffuse/config.hpp"
#include "rediffuse/dataset.hpp"
#include "rediffuse/distance.hpp"

namespace rediffuse {

struct RunManifest {
  std::string config_hash;
  std::string model_dir;
  std::string scores_csv;
  std::string metrics_json;
  std::string roc_svg;
  double wall_clock_seconds = 0.0;
  std::string version;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

// scores.csv: a comment line documenting the orientation and the distance,
// then sample_id,is_member,method,score,n,t,k rows. Parses back losslessly.
std::string scores_to_csv(const std::vector<AttackRecord>& records);
std::vector<AttackRecord> scores_from_csv(const std::string& text);

struct AblationRow {
  std::string axis;
  int value = 0;
  double auc = 0.0;
  double asr = 0.0;
  double tpr = 0.0;
};

std::string ablation_to_csv(const std::vector<AblationRow>& rows);
std::vector<AblationRow> ablation_from_csv(const std::string& text);

Dataset build_dataset(const ExperimentConfig& cfg);
std::unique_ptr<DistanceFn> build_distance(const AttackConfig& a);

// Swaps the nonmember samples for their restyled twins; ids stay put.
void restyle_nonmembers(Dataset& ds, const MembershipSplit& split,
                        uint64_t seed);

// generate -> split -> train -> score -> evaluate, everything under
// cfg.output_dir: model/, scores.csv, metrics.json, roc.svg, manifest.json.
// Deterministic for a fixed seed, whatever the thread count.
RunManifest run_experiment(const ExperimentConfig& cfg);

// One scoring run per value over a shared trained model; axis is one of
// n | t | k | p. Emits ablation.csv beside the per-value run directories.
std::vector<RunManifest> run_ablation(const ExperimentConfig& cfg,
                                      const std::string& axis,
                                      const std::vector<int>& values);

}  // namespace rediffuse
