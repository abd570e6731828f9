#include "rediffuse/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "rediffuse/errors.hpp"
#include "rediffuse/io.hpp"

namespace rediffuse {

using nlohmann::json;

MlpDenoiser::MlpDenoiser(std::vector<uint32_t> data_shape, int width,
                         int depth, int time_dim, uint64_t init_seed)
    : data_shape_(std::move(data_shape)), time_dim_(time_dim) {
  if (width < 1 || depth < 1 || time_dim < 2 || time_dim % 2 != 0)
    throw std::invalid_argument("mlp: bad architecture");
  size_t d = ImageTensor::checked_numel(data_shape_);
  std::vector<size_t> widths;
  widths.push_back(d + size_t(time_dim));
  for (int l = 0; l < depth; ++l) widths.push_back(size_t(width));
  widths.push_back(d);
  net_.init(std::move(widths), OutputAct::linear, init_seed);
}

ImageTensor MlpDenoiser::predict(const ImageTensor& x_t, int t) const {
  size_t d = x_t.data.size();
  if (d + size_t(time_dim_) != net_.widths[0])
    throw std::invalid_argument("mlp: input size mismatch");
  std::vector<float> input(net_.widths[0]);
  std::copy(x_t.data.begin(), x_t.data.end(), input.begin());
  time_embedding(double(t), size_t(time_dim_), input.data() + d);
  DenseNet<float>::Workspace ws;
  net_.forward(input.data(), ws);
  ImageTensor out(x_t.shape);
  std::copy(ws.a.back().begin(), ws.a.back().end(), out.data.begin());
  return out;
}

void MlpDenoiser::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  json arch;
  arch["data_shape"] = data_shape_;
  arch["time_dim"] = time_dim_;
  arch["widths"] = net_.widths;
  arch["output"] = "linear";
  arch["loss_history"] = loss_history_;
  write_text_file(dir / "arch.json", arch.dump(2) + "\n");
  ImageTensor w({uint32_t(net_.params.size())}, net_.params);
  write_tensor(dir / "weights.tnsr", w);
}

MlpDenoiser MlpDenoiser::load(const std::filesystem::path& dir) {
  json arch;
  try {
    arch = json::parse(read_text_file(dir / "arch.json"));
  } catch (const json::exception& e) {
    throw PhaseError("load", "bad arch.json: " + std::string(e.what()));
  }
  MlpDenoiser m;
  try {
    m.data_shape_ = arch.at("data_shape").get<std::vector<uint32_t>>();
    m.time_dim_ = arch.at("time_dim").get<int>();
    m.net_.widths = arch.at("widths").get<std::vector<size_t>>();
    m.net_.out_act = OutputAct::linear;
    m.loss_history_ = arch.at("loss_history").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw PhaseError("load", "arch.json missing field: " +
                                 std::string(e.what()));
  }
  ImageTensor w = read_tensor(dir / "weights.tnsr");
  if (w.data.size() != m.net_.param_count())
    throw PhaseError("load", "weights.tnsr length does not match arch.json");
  m.net_.params = std::move(w.data);
  return m;
}

MlpDenoiser train_denoiser(const Dataset& ds, const MembershipSplit& split,
                           const NoiseSchedule& sched, const TrainConfig& cfg) {
  if (cfg.steps < 1 || cfg.batch_size < 1 || !(cfg.lr > 0.0))
    throw std::invalid_argument("train: steps, batch_size, lr must be > 0");
  if (split.members.empty()) throw TrainingError("empty member set");
  for (size_t i : split.members)
    if (i >= ds.size()) throw TrainingError("member index out of range");

  const std::vector<uint32_t>& shape = ds.peek(split.members[0]).shape;
  size_t d = ds.peek(split.members[0]).data.size();
  MlpDenoiser model(shape, cfg.width, cfg.depth, cfg.time_dim,
                    derive_seed(cfg.seed, 0, 0));
  DenseNet<float>& net = model.net();

  Rng order_rng(derive_seed(cfg.seed, 1, 0));
  Rng noise_rng(derive_seed(cfg.seed, 2, 0));
  std::vector<size_t> order(split.members);
  size_t pos = order.size();

  Adam<float> opt;
  opt.lr = cfg.lr;
  std::vector<float> grad(net.params.size(), 0.0f);
  DenseNet<float>::Workspace ws;
  std::vector<float> input(net.widths[0]);
  std::vector<float> eps(d);
  std::vector<float> dLda(d);

  std::vector<double> history;
  double window_loss = 0.0;
  int window_count = 0;
  int log_every = std::max(1, cfg.log_every);

  for (int step = 0; step < cfg.steps; ++step) {
    // Cosine decay to zero; the tail of the run settles into the minimum
    // instead of orbiting it at the full step size.
    opt.lr = float(cfg.lr * 0.5 *
                   (1.0 + std::cos(std::numbers::pi * double(step) /
                                   double(cfg.steps))));
    std::fill(grad.begin(), grad.end(), 0.0f);
    double batch_loss = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      if (pos == order.size()) {
        for (size_t i = order.size() - 1; i > 0; --i) {
          size_t j = size_t(order_rng.next_below(i + 1));
          std::swap(order[i], order[j]);
        }
        pos = 0;
      }
      const ImageTensor& x = ds.sample(order[pos++]);
      int t = 1 + int(noise_rng.next_below(uint64_t(sched.T())));
      noise_rng.fill_normal(eps.data(), d);
      double ca = std::sqrt(sched.alpha_bar(t));
      double cb = std::sqrt(1.0 - sched.alpha_bar(t));
      for (size_t j = 0; j < d; ++j)
        input[j] = float(ca * double(x.data[j]) + cb * double(eps[j]));
      time_embedding(double(t), size_t(cfg.time_dim), input.data() + d);
      net.forward(input.data(), ws);
      const std::vector<float>& out = ws.a.back();
      double sample_loss = 0.0;
      float scale = 2.0f / float(size_t(cfg.batch_size) * d);
      for (size_t j = 0; j < d; ++j) {
        float r = out[j] - eps[j];
        sample_loss += double(r) * double(r);
        dLda[j] = scale * r;
      }
      batch_loss += sample_loss / double(d);
      net.backward(dLda.data(), ws, grad);
    }
    batch_loss /= double(cfg.batch_size);
    if (!std::isfinite(batch_loss))
      throw TrainingError("non-finite loss at step " + std::to_string(step));
    opt.step(net.params, grad);

    window_loss += batch_loss;
    ++window_count;
    if ((step + 1) % log_every == 0 || step + 1 == cfg.steps) {
      history.push_back(window_loss / window_count);
      window_loss = 0.0;
      window_count = 0;
    }
  }
  model.set_loss_history(std::move(history));
  return model;
}

}  // namespace rediffuse
