#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rediffuse/dataset.hpp"
#include "rediffuse/denoiser.hpp"
#include "rediffuse/distance.hpp"
#include "rediffuse/schedule.hpp"
#include "rediffuse/variation.hpp"

namespace rediffuse {

enum class AttackMethod { rediffuse, rediffuse_plus, loss_baseline };

const char* method_name(AttackMethod m);
AttackMethod method_from_name(const std::string& name);

struct AttackRecord {
  uint64_t sample_id = 0;
  bool is_member = false;
  AttackMethod method = AttackMethod::rediffuse;
  double score = 0.0;  // larger = more member-like
  int n = 0;
  int t = 0;
  int k = 0;
  std::string distance;
};

// Averages n independent variations of x in pixel space and scores the
// result as -dist(x, mean). seeds.size() must equal n; the mean reduces in
// repeat-index order so thread scheduling cannot perturb it.
double rediffuse_score(const VariationEndpoint& endpoint, const ImageTensor& x,
                       int t, int n, const DistanceFn& dist,
                       const std::vector<uint64_t>& seeds);

// Two independent variations compared against each other: -dist(x1, x2).
// Needs no reference to the original beyond issuing the two calls.
double rediffuse_plus_score(const VariationEndpoint& endpoint,
                            const ImageTensor& x, int t,
                            const DistanceFn& dist, uint64_t seed1,
                            uint64_t seed2);

// White-box training-loss score: -|eps - eps_theta(x_t, t)|^2 for a seeded
// eps. The one scorer that is allowed to touch the model directly.
double loss_baseline_score(const DenoiserModel& model,
                           const NoiseSchedule& sched, const ImageTensor& x,
                           int t, uint64_t seed);

// Member iff score > -tau; a score exactly at the threshold is nonmember.
bool classify_membership(double score, double tau);

struct ScoreSpec {
  AttackMethod method = AttackMethod::rediffuse;
  int t = 0;          // diffusion step the service is asked for
  int n = 1;          // variations per sample (repeat count for the baseline)
  int k_reported = 0; // recorded in AttackRecord; the service owns the real k
  uint64_t experiment_seed = 0;
};

// Scores every sample in the split, parallel across samples. Repeat seeds
// come from derive_seed(experiment_seed, sample_id, repeat) so the table is
// bit-identical for any thread count. The white-box baseline needs model and
// sched; the black-box methods run on the endpoint alone.
std::vector<AttackRecord> score_dataset(
    const VariationEndpoint* endpoint, const Dataset& ds,
    const MembershipSplit& split, const DistanceFn& dist,
    const ScoreSpec& spec, const DenoiserModel* whitebox_model = nullptr,
    const NoiseSchedule* whitebox_sched = nullptr);

}  // namespace rediffuse
