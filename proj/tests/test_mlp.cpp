#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "rediffuse/diffusion.hpp"
#include "rediffuse/errors.hpp"
#include "rediffuse/io.hpp"
#include "rediffuse/mlp.hpp"

using namespace rediffuse;

namespace {

TrainConfig tiny_cfg() {
  TrainConfig cfg;
  cfg.steps = 150;
  cfg.batch_size = 4;
  cfg.width = 16;
  cfg.depth = 2;
  cfg.lr = 3e-3;
  cfg.seed = 5;
  cfg.log_every = 25;
  return cfg;
}

}  // namespace

TEST_CASE("time embedding lowest frequency is the raw angle") {
  float emb[16];
  time_embedding(3.0, 16, emb);
  CHECK(emb[0] == doctest::Approx(std::sin(3.0)));
  CHECK(emb[1] == doctest::Approx(std::cos(3.0)));
  double f_last = std::exp(-std::log(10000.0) * 7.0 / 8.0);
  CHECK(emb[14] == doctest::Approx(std::sin(3.0 * f_last)));
}

TEST_CASE("analytic gradients match finite differences") {
  DenseNet<double> net;
  net.init({6, 8, 8, 4}, OutputAct::linear, 99);
  Rng rng(1);
  std::vector<double> input(6), target(4);
  for (auto& v : input) v = rng.next_double();
  for (auto& v : target) v = rng.next_double();

  auto loss_of = [&]() {
    DenseNet<double>::Workspace w;
    net.forward(input.data(), w);
    double L = 0.0;
    for (size_t i = 0; i < 4; ++i) {
      double r = w.a.back()[i] - target[i];
      L += r * r;
    }
    return L;
  };

  DenseNet<double>::Workspace ws;
  net.forward(input.data(), ws);
  std::vector<double> dLdout(4);
  for (size_t i = 0; i < 4; ++i)
    dLdout[i] = 2.0 * (ws.a.back()[i] - target[i]);
  std::vector<double> grad(net.params.size(), 0.0);
  net.backward(dLdout.data(), ws, grad);

  Rng pick(123);
  for (int trial = 0; trial < 10; ++trial) {
    size_t j = size_t(pick.next_below(net.params.size()));
    double h = 1e-6;
    double saved = net.params[j];
    net.params[j] = saved + h;
    double Lp = loss_of();
    net.params[j] = saved - h;
    double Lm = loss_of();
    net.params[j] = saved;
    double fd = (Lp - Lm) / (2.0 * h);
    double denom = std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
    CHECK(std::abs(fd - grad[j]) / denom <= 1e-3);
  }
}

TEST_CASE("sigmoid output gradients match finite differences") {
  DenseNet<double> net;
  net.init({5, 6, 1}, OutputAct::sigmoid, 7);
  std::vector<double> input(5);
  Rng rng(2);
  for (auto& v : input) v = rng.next_double();
  double target = 1.0;

  auto loss_of = [&]() {
    DenseNet<double>::Workspace w;
    net.forward(input.data(), w);
    double p = w.a.back()[0];
    return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
  };

  DenseNet<double>::Workspace ws;
  net.forward(input.data(), ws);
  double p = ws.a.back()[0];
  std::vector<double> dLdout = {-(target / p) + (1.0 - target) / (1.0 - p)};
  std::vector<double> grad(net.params.size(), 0.0);
  net.backward(dLdout.data(), ws, grad);

  Rng pick(9);
  for (int trial = 0; trial < 10; ++trial) {
    size_t j = size_t(pick.next_below(net.params.size()));
    double h = 1e-6;
    double saved = net.params[j];
    net.params[j] = saved + h;
    double Lp = loss_of();
    net.params[j] = saved - h;
    double Lm = loss_of();
    net.params[j] = saved;
    double fd = (Lp - Lm) / (2.0 * h);
    double denom = std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
    CHECK(std::abs(fd - grad[j]) / denom <= 1e-3);
  }
}

TEST_CASE("training is deterministic and loss trends down") {
  Dataset ds = gen_gmm_dataset(16, 4, 2, 11);
  MembershipSplit split = split_members(ds, 3);
  NoiseSchedule sched = build_schedule(50, 1e-3, 0.05);
  TrainConfig cfg = tiny_cfg();

  MlpDenoiser m1 = train_denoiser(ds, split, sched, cfg);
  MlpDenoiser m2 = train_denoiser(ds, split, sched, cfg);
  CHECK(m1.net().params == m2.net().params);

  REQUIRE(m1.loss_history().size() >= 2);
  CHECK(m1.loss_history().back() < m1.loss_history().front());
}

TEST_CASE("training touches only member rows") {
  Dataset ds = gen_gmm_dataset(16, 4, 2, 11);
  MembershipSplit split = split_members(ds, 3);
  NoiseSchedule sched = build_schedule(50, 1e-3, 0.05);
  ds.reset_access_counts();
  (void)train_denoiser(ds, split, sched, tiny_cfg());
  for (size_t i : split.nonmembers) CHECK(ds.accesses(i) == 0);
  uint64_t member_reads = 0;
  for (size_t i : split.members) member_reads += ds.accesses(i);
  CHECK(member_reads > 0);
}

TEST_CASE("training rejects bad inputs") {
  Dataset ds = gen_gmm_dataset(8, 4, 2, 1);
  MembershipSplit split = split_members(ds, 1);
  NoiseSchedule sched = build_schedule(10, 1e-3, 0.05);

  TrainConfig bad = tiny_cfg();
  bad.steps = 0;
  CHECK_THROWS_AS(train_denoiser(ds, split, sched, bad),
                  std::invalid_argument);

  MembershipSplit empty;
  empty.nonmembers = split.nonmembers;
  CHECK_THROWS_AS(train_denoiser(ds, empty, sched, tiny_cfg()),
                  TrainingError);
}

TEST_CASE("a memorizing net reconstructs its training point far better") {
  // one repeated member point vs a distant probe
  ImageTensor p({8}, {0.9f, 0.1f, 0.8f, 0.2f, 0.7f, 0.3f, 0.9f, 0.1f});
  ImageTensor q({8}, {0.1f, 0.9f, 0.2f, 0.8f, 0.3f, 0.7f, 0.1f, 0.9f});
  Dataset ds;
  ds.kind = "gmm";
  for (int i = 0; i < 4; ++i) ds.samples.push_back(p);
  for (int i = 0; i < 4; ++i) ds.samples.push_back(q);
  ds.init_counters();
  MembershipSplit split;
  split.members = {0, 1, 2, 3};
  split.nonmembers = {4, 5, 6, 7};

  NoiseSchedule sched = build_schedule(50, 1e-3, 0.05);
  TrainConfig cfg;
  cfg.steps = 3000;
  cfg.batch_size = 8;
  cfg.width = 64;
  cfg.depth = 2;
  cfg.seed = 21;
  MlpDenoiser model = train_denoiser(ds, split, sched, cfg);

  int t = 10;  // T/5
  double err_p = 0.0, err_q = 0.0;
  for (int rep = 0; rep < 8; ++rep) {
    Rng rng(derive_seed(1234, uint64_t(rep), 0));
    ImageTensor eps({8});
    rng.fill_normal(eps.data.data(), 8);
    err_p += l2_dist(ddim_sample(forward_noise(p, t, eps, sched), t, t,
                                 model, sched),
                     p);
    err_q += l2_dist(ddim_sample(forward_noise(q, t, eps, sched), t, t,
                                 model, sched),
                     q);
  }
  CHECK(err_p < 0.1 * err_q);
}

TEST_CASE("predict is pure and Lipschitz-sane") {
  Dataset ds = gen_gmm_dataset(16, 4, 2, 11);
  MembershipSplit split = split_members(ds, 3);
  NoiseSchedule sched = build_schedule(50, 1e-3, 0.05);
  MlpDenoiser m = train_denoiser(ds, split, sched, tiny_cfg());

  ImageTensor x({4}, {0.3f, 0.5f, 0.2f, 0.8f});
  ImageTensor y1 = m.predict(x, 7);
  ImageTensor y2 = m.predict(x, 7);
  CHECK(y1 == y2);

  ImageTensor xp = x;
  xp.data[1] += 1e-6f;
  ImageTensor yp = m.predict(xp, 7);
  CHECK(l2_dist(y1, yp) < 1e-2);

  ImageTensor wrong({5});
  CHECK_THROWS_AS(m.predict(wrong, 1), std::invalid_argument);
  CHECK_THROWS_AS(MlpDenoiser({4}, 0, 2, 16, 1), std::invalid_argument);
  CHECK_THROWS_AS(MlpDenoiser({4}, 8, 2, 15, 1), std::invalid_argument);
}

TEST_CASE("checkpoints round trip") {
  Dataset ds = gen_gmm_dataset(16, 4, 2, 11);
  MembershipSplit split = split_members(ds, 3);
  NoiseSchedule sched = build_schedule(50, 1e-3, 0.05);
  MlpDenoiser m = train_denoiser(ds, split, sched, tiny_cfg());

  auto dir = std::filesystem::temp_directory_path() / "rdf_mlp_test";
  std::filesystem::remove_all(dir);
  m.save(dir);
  MlpDenoiser back = MlpDenoiser::load(dir);
  CHECK(back.net().params == m.net().params);
  CHECK(back.loss_history() == m.loss_history());

  ImageTensor x({4}, {0.3f, 0.5f, 0.2f, 0.8f});
  CHECK(back.predict(x, 9) == m.predict(x, 9));

  // corrupt the weight blob and expect a load failure
  ImageTensor w({3}, {1.0f, 2.0f, 3.0f});
  write_tensor(dir / "weights.tnsr", w);
  CHECK_THROWS_AS(MlpDenoiser::load(dir), PhaseError);
  std::filesystem::remove_all(dir);
}
