#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rediffuse/attack.hpp"
#include "rediffuse/dataset.hpp"
#include "rediffuse/distance.hpp"
#include "rediffuse/mlp.hpp"
#include "rediffuse/parallel.hpp"
#include "rediffuse/schedule.hpp"
#include "rediffuse/variation.hpp"

using namespace rediffuse;
using clock_type = std::chrono::steady_clock;

namespace {

double time_score(const VariationEndpoint& ep, const Dataset& ds,
                  const MembershipSplit& split, const DistanceFn& dist,
                  const ScoreSpec& spec, int reps,
                  std::vector<AttackRecord>& out) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    ds.reset_access_counts();
    auto t0 = clock_type::now();
    out = score_dataset(&ep, ds, split, dist, spec);
    auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

bool same_records(const std::vector<AttackRecord>& a,
                  const std::vector<AttackRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].sample_id != b[i].sample_id || a[i].score != b[i].score)
      return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel timing of the scoring kernel"};
  int samples = 64, dim = 64, n = 10, t = 200, reps = 3;
  app.add_option("--samples", samples, "dataset size");
  app.add_option("--dim", dim, "point dimension");
  app.add_option("--n", n, "variations per sample");
  app.add_option("--t", t, "diffusion step");
  app.add_option("--reps", reps, "repetitions; best time wins");
  CLI11_PARSE(app, argc, argv);

  Dataset ds = gen_gmm_dataset(samples, dim, 4, 7);
  MembershipSplit split = split_members(ds, 7);
  NoiseSchedule sched = build_schedule(1000, 1e-4, 0.02);
  MlpDenoiser model({uint32_t(dim)}, 128, 3, 16, 11);
  LocalEndpoint ep(model, sched);

  LpDistance dist(1);
  ScoreSpec spec;
  spec.method = AttackMethod::rediffuse;
  spec.t = t;
  spec.n = n;
  spec.k_reported = t / 2;
  spec.experiment_seed = 7;

  std::printf("scoring %d samples, n=%d, t=%d, %zu-dim, %d reps each\n",
              samples, n, t, size_t(dim), reps);

  std::vector<AttackRecord> serial_records, parallel_records;
  par::set_threads(1);
  double serial = time_score(ep, ds, split, dist, spec, reps, serial_records);
  par::set_threads(0);
  double parallel =
      time_score(ep, ds, split, dist, spec, reps, parallel_records);
  int cores = par::hardware_threads();

  std::printf("\n%-10s %8s %10s\n", "variant", "threads", "seconds");
  std::printf("%-10s %8d %10.4f\n", "serial", 1, serial);
  std::printf("%-10s %8d %10.4f\n", "parallel", cores, parallel);
  std::printf("\nspeedup: %.2fx on %d threads\n",
              parallel > 0 ? serial / parallel : 0.0, cores);

  if (!same_records(serial_records, parallel_records)) {
    std::fprintf(stderr, "results differ between serial and parallel runs\n");
    return 1;
  }
  std::printf("serial and parallel scores are bit-identical\n");
  return 0;
}
