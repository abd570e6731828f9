#include "rediffuse/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rediffuse/diffusion.hpp"
#include "rediffuse/errors.hpp"
#include "rediffuse/parallel.hpp"
#include "rediffuse/rng.hpp"

namespace rediffuse {

const char* method_name(AttackMethod m) {
  switch (m) {
    case AttackMethod::rediffuse: return "rediffuse";
    case AttackMethod::rediffuse_plus: return "rediffuse_plus";
    case AttackMethod::loss_baseline: return "loss_baseline";
  }
  return "unknown";
}

AttackMethod method_from_name(const std::string& name) {
  if (name == "rediffuse") return AttackMethod::rediffuse;
  if (name == "rediffuse_plus") return AttackMethod::rediffuse_plus;
  if (name == "loss_baseline") return AttackMethod::loss_baseline;
  throw std::invalid_argument("unknown attack method: " + name);
}

double rediffuse_score(const VariationEndpoint& endpoint, const ImageTensor& x,
                       int t, int n, const DistanceFn& dist,
                       const std::vector<uint64_t>& seeds) {
  if (n < 1) throw std::invalid_argument("rediffuse_score: n must be >= 1");
  if (seeds.size() != size_t(n))
    throw std::invalid_argument("rediffuse_score: need one seed per repeat");
  std::vector<double> acc(x.data.size(), 0.0);
  for (int r = 0; r < n; ++r) {
    ImageTensor v = endpoint.vary(x, t, seeds[size_t(r)]);
    require_same_shape(x, v, "rediffuse_score");
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += double(v.data[i]);
  }
  ImageTensor mean(x.shape);
  for (size_t i = 0; i < acc.size(); ++i)
    mean.data[i] = float(acc[i] / double(n));
  return -dist.dist(x, mean);
}

double rediffuse_plus_score(const VariationEndpoint& endpoint,
                            const ImageTensor& x, int t,
                            const DistanceFn& dist, uint64_t seed1,
                            uint64_t seed2) {
  if (seed1 == seed2)
    throw std::invalid_argument(
        "rediffuse_plus_score: the two seeds must differ");
  ImageTensor a = endpoint.vary(x, t, seed1);
  ImageTensor b = endpoint.vary(x, t, seed2);
  require_same_shape(a, b, "rediffuse_plus_score");
  return -dist.dist(a, b);
}

double loss_baseline_score(const DenoiserModel& model,
                           const NoiseSchedule& sched, const ImageTensor& x,
                           int t, uint64_t seed) {
  Rng rng(seed);
  ImageTensor eps(x.shape);
  rng.fill_normal(eps.data.data(), eps.data.size());
  ImageTensor x_t = forward_noise(x, t, eps, sched);
  ImageTensor pred = model.predict(x_t, t);
  require_same_shape(x, pred, "loss_baseline_score");
  double acc = 0.0;
  for (size_t i = 0; i < eps.data.size(); ++i) {
    double r = double(eps.data[i]) - double(pred.data[i]);
    acc += r * r;
  }
  return -acc;
}

bool classify_membership(double score, double tau) {
  if (!std::isfinite(score) || !std::isfinite(tau))
    throw std::invalid_argument("classify_membership: non-finite input");
  return score > -tau;
}

std::vector<AttackRecord> score_dataset(const VariationEndpoint* endpoint,
                                        const Dataset& ds,
                                        const MembershipSplit& split,
                                        const DistanceFn& dist,
                                        const ScoreSpec& spec,
                                        const DenoiserModel* whitebox_model,
                                        const NoiseSchedule* whitebox_sched) {
  bool whitebox = spec.method == AttackMethod::loss_baseline;
  if (whitebox && (whitebox_model == nullptr || whitebox_sched == nullptr))
    throw std::invalid_argument(
        "score_dataset: loss baseline needs model and schedule");
  if (!whitebox && endpoint == nullptr)
    throw std::invalid_argument("score_dataset: endpoint required");
  if (spec.n < 1) throw std::invalid_argument("score_dataset: n must be >= 1");
  if (spec.method == AttackMethod::rediffuse_plus && spec.n < 2)
    throw std::invalid_argument(
        "score_dataset: rediffuse_plus needs n >= 2 for its two calls");

  std::vector<std::pair<size_t, bool>> items;
  items.reserve(split.members.size() + split.nonmembers.size());
  for (size_t i : split.members) items.emplace_back(i, true);
  for (size_t i : split.nonmembers) items.emplace_back(i, false);

  std::vector<AttackRecord> records(items.size());
  par::for_each_index(items.size(), [&](size_t slot) {
    auto [id, is_member] = items[slot];
    const ImageTensor& x = ds.peek(id);
    AttackRecord rec;
    rec.sample_id = id;
    rec.is_member = is_member;
    rec.method = spec.method;
    rec.n = spec.n;
    rec.t = spec.t;
    rec.k = spec.k_reported;
    rec.distance = dist.name();
    switch (spec.method) {
      case AttackMethod::rediffuse: {
        std::vector<uint64_t> seeds(size_t(spec.n));
        for (int r = 0; r < spec.n; ++r)
          seeds[size_t(r)] =
              derive_seed(spec.experiment_seed, id, uint32_t(r));
        rec.score =
            rediffuse_score(*endpoint, x, spec.t, spec.n, dist, seeds);
        break;
      }
      case AttackMethod::rediffuse_plus: {
        rec.score = rediffuse_plus_score(
            *endpoint, x, spec.t, dist,
            derive_seed(spec.experiment_seed, id, 0),
            derive_seed(spec.experiment_seed, id, 1));
        break;
      }
      case AttackMethod::loss_baseline: {
        // Training loss is an expectation over the whole schedule, so the
        // repeats stratify t across [1, T] (midpoint rule) instead of
        // re-sampling one step. Fixed repeat order keeps it deterministic.
        int T = whitebox_sched->T();
        double acc = 0.0;
        for (int r = 0; r < spec.n; ++r) {
          int tr = std::max(1, (2 * r + 1) * T / (2 * spec.n));
          acc += loss_baseline_score(
              *whitebox_model, *whitebox_sched, x, tr,
              derive_seed(spec.experiment_seed, id, uint32_t(r)));
        }
        rec.score = acc / double(spec.n);
        break;
      }
    }
    if (!std::isfinite(rec.score))
      throw PhaseError("score", "non-finite score for sample " +
                                    std::to_string(id));
    records[slot] = std::move(rec);
  });
  return records;
}

}  // namespace rediffuse
