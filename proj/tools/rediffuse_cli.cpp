#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rediffuse/config.hpp"
#include "rediffuse/errors.hpp"
#include "rediffuse/experiment.hpp"
#include "rediffuse/io.hpp"
#include "rediffuse/metrics.hpp"
#include "rediffuse/mlp.hpp"
#include "rediffuse/remote.hpp"
#include "rediffuse/rng.hpp"
#include "rediffuse/server.hpp"
#include "rediffuse/svg.hpp"
#include "rediffuse/version.hpp"

namespace fs = std::filesystem;
using namespace rediffuse;

namespace {

// Settings priority, lowest to highest: built-in defaults, the
// REDIFFUSE_OUTPUT_DIR environment variable, command-line flags, --config.
void add_common_flags(CLI::App* cmd, ExperimentConfig& cfg,
                      std::string& config_file) {
  cmd->add_option("--config", config_file,
                  "JSON config file; values override flags");
  cmd->add_option("--seed", cfg.seed, "experiment seed");
  cmd->add_option("--output-dir", cfg.output_dir, "artifact directory");

  cmd->add_option("--dataset", cfg.dataset.kind, "gmm | shapes");
  cmd->add_option("--samples", cfg.dataset.n, "dataset size");
  cmd->add_option("--side", cfg.dataset.side, "shapes: image side");
  cmd->add_flag("--style-shift", cfg.dataset.style_shift,
                "shapes: restyle nonmembers before scoring");
  cmd->add_option("--dim", cfg.dataset.dim, "gmm: point dimension");
  cmd->add_option("--components", cfg.dataset.components,
                  "gmm: mixture components");
  cmd->add_option("--sigma", cfg.dataset.sigma, "gmm: component spread");

  cmd->add_option("--T", cfg.schedule.T, "diffusion steps");
  cmd->add_option("--beta-start", cfg.schedule.beta_start);
  cmd->add_option("--beta-end", cfg.schedule.beta_end);

  cmd->add_option("--steps", cfg.train.steps, "training steps");
  cmd->add_option("--batch-size", cfg.train.batch_size);
  cmd->add_option("--width", cfg.train.width, "hidden width");
  cmd->add_option("--depth", cfg.train.depth, "hidden layers");
  cmd->add_option("--time-dim", cfg.train.time_dim, "time embedding size");
  cmd->add_option("--lr", cfg.train.lr, "learning rate");
  cmd->add_option("--log-every", cfg.train.log_every);

  cmd->add_option("--method", cfg.attack.method,
                  "rediffuse | rediffuse_plus | loss_baseline");
  cmd->add_option("--attack-n", cfg.attack.n, "variations to average");
  cmd->add_option("--t", cfg.attack.t, "diffusion step of the API call");
  cmd->add_option("--k", cfg.attack.k,
                  "sampling interval; 0 lets the service pick t/2");
  cmd->add_option("--distance", cfg.attack.distance, "lp | ssim");
  cmd->add_option("--p", cfg.attack.p, "exponent for lp");
  cmd->add_option("--target-fpr", cfg.eval.target_fpr);
}

void finalize_config(ExperimentConfig& cfg, const std::string& config_file) {
  if (config_file.empty()) return;
  std::string text;
  try {
    text = read_text_file(config_file);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  apply_config_json(cfg, text);
}

std::pair<Dataset, MembershipSplit> dataset_for(const ExperimentConfig& cfg,
                                                const std::string& data_dir) {
  if (!data_dir.empty()) return load_dataset(data_dir);
  Dataset ds = build_dataset(cfg);
  MembershipSplit split = split_members(ds, cfg.seed);
  return {std::move(ds), std::move(split)};
}

void print_summary(const RocSummary& s, double target_fpr,
                   const std::vector<AttackRecord>& records, double tau,
                   bool have_tau) {
  std::printf("auc               %s\n", format_double(s.auc).c_str());
  std::printf("asr               %s\n", format_double(s.asr).c_str());
  std::printf("tpr @ 1%% fpr      %s\n",
              format_double(s.tpr_at_1pct_fpr).c_str());
  if (target_fpr != 0.01)
    std::printf("tpr @ %g fpr      %s\n", target_fpr,
                format_double(tpr_at_fpr(records, target_fpr)).c_str());
  if (have_tau)
    std::printf("accuracy @ tau    %s\n",
                format_double(accuracy_at_tau(records, tau)).c_str());
}

// Scoring against prebuilt data, a saved model, or a remote service.
// Emits the same artifact set as a full run, minus the model directory.
void score_only(const ExperimentConfig& cfg, const std::string& data_dir,
                const std::string& model_dir, const std::string& endpoint_url,
                int timeout_ms) {
  auto [ds, split] = dataset_for(cfg, data_dir);
  if (cfg.dataset.style_shift) {
    if (ds.kind != "shapes")
      throw ConfigError("config: style_shift applies to shapes datasets only");
    restyle_nonmembers(ds, split, derive_seed(cfg.seed, 0x57796c65, 3));
  }

  NoiseSchedule sched = build_schedule(cfg.schedule.T, cfg.schedule.beta_start,
                                       cfg.schedule.beta_end);
  KPolicy policy =
      cfg.attack.k > 0 ? KPolicy::fixed(cfg.attack.k) : KPolicy::half_t();

  ScoreSpec spec;
  spec.method = method_from_name(cfg.attack.method);
  spec.t = cfg.attack.t;
  spec.n = cfg.attack.n;
  spec.k_reported = policy.k_for(cfg.attack.t);
  spec.experiment_seed = cfg.seed;

  std::unique_ptr<DistanceFn> dist = build_distance(cfg.attack);
  std::vector<AttackRecord> records;

  MlpDenoiser model;
  if (!model_dir.empty()) model = MlpDenoiser::load(model_dir);

  if (!endpoint_url.empty()) {
    if (spec.method == AttackMethod::loss_baseline)
      throw ConfigError("loss_baseline is white-box; it needs --model, "
                        "not --endpoint");
    RemoteEndpoint ep(endpoint_url, timeout_ms);
    records = score_dataset(&ep, ds, split, *dist, spec);
  } else if (!model_dir.empty()) {
    LocalEndpoint ep(model, sched, policy);
    bool whitebox = spec.method == AttackMethod::loss_baseline;
    records = score_dataset(&ep, ds, split, *dist, spec,
                            whitebox ? &model : nullptr,
                            whitebox ? &sched : nullptr);
  } else {
    throw ConfigError("score-only mode needs --model or --endpoint");
  }

  RocSummary summary = summarize_scores(records);
  fs::path out(cfg.output_dir);
  write_text_file(out / "scores.csv", scores_to_csv(records));
  write_text_file(out / "metrics.json", roc_summary_to_json(summary));
  plot_roc_svg({{cfg.attack.method, summary}}, out / "roc.svg");
  std::printf("scored %zu samples -> %s\n", records.size(),
              (out / "scores.csv").string().c_str());
  print_summary(summary, cfg.eval.target_fpr, records, 0.0, false);
}

volatile std::sig_atomic_t g_signal = 0;
void on_signal(int) { g_signal = 1; }

int run_serve(const ExperimentConfig& cfg, const std::string& model_dir,
              const std::string& host, int port, int default_t, bool quiet) {
  MlpDenoiser model = MlpDenoiser::load(model_dir);
  NoiseSchedule sched = build_schedule(cfg.schedule.T, cfg.schedule.beta_start,
                                       cfg.schedule.beta_end);
  ServerOptions opts;
  opts.host = host;
  opts.port = port;
  opts.default_t = default_t;
  opts.policy =
      cfg.attack.k > 0 ? KPolicy::fixed(cfg.attack.k) : KPolicy::half_t();
  opts.seed = cfg.seed;
  opts.log_requests = !quiet;

  VariationServer server(model, sched, nullptr, opts);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done.load()) {
      if (g_signal) {
        server.stop();
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });

  std::fprintf(stderr, "serving on http://%s:%d (T=%d, default t=%d)\n",
               host.c_str(), port, sched.T(),
               default_t > 0 ? default_t : (sched.T() >= 5 ? sched.T() / 5 : 1));
  server.run();
  done.store(true);
  watcher.join();
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"membership-inference toolkit for diffusion image models"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ExperimentConfig cfg;
  if (const char* env = std::getenv("REDIFFUSE_OUTPUT_DIR"); env && *env)
    cfg.output_dir = env;
  std::string config_file;

  std::string data_dir, model_dir, endpoint_url;
  std::string host = "127.0.0.1";
  int port = 8787, default_t = 0;
  bool quiet = false;
  int timeout_ms = 30000;
  double tau = 0.0;
  std::string axis, values_text, scores_file, names_text, out_file;
  std::vector<std::string> metric_files;

  CLI::App* gen = app.add_subcommand("gen-data",
                                     "generate a dataset and its split");
  add_common_flags(gen, cfg, config_file);

  CLI::App* train = app.add_subcommand("train",
                                       "train the denoiser on the members");
  add_common_flags(train, cfg, config_file);
  train->add_option("--data", data_dir, "saved dataset directory");

  CLI::App* serve = app.add_subcommand("serve",
                                       "serve the variation API over HTTP");
  add_common_flags(serve, cfg, config_file);
  serve->add_option("--model", model_dir, "saved model directory")
      ->required();
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--t-default", default_t,
                    "t applied when a request omits it; 0 means T/5");
  serve->add_flag("--quiet", quiet, "suppress the per-request log line");

  CLI::App* attack = app.add_subcommand(
      "attack", "run the attack; trains first unless given --data/--model");
  add_common_flags(attack, cfg, config_file);
  attack->add_option("--data", data_dir, "saved dataset directory");
  attack->add_option("--model", model_dir, "saved model directory");
  attack->add_option("--endpoint", endpoint_url,
                     "remote variation service URL");
  attack->add_option("--timeout-ms", timeout_ms);

  CLI::App* eval = app.add_subcommand("eval", "metrics from a scores file");
  add_common_flags(eval, cfg, config_file);
  eval->add_option("--scores", scores_file, "scores.csv path")->required();
  CLI::Option* tau_opt =
      eval->add_option("--tau", tau, "report accuracy of score > -tau");

  CLI::App* ablate = app.add_subcommand("ablate",
                                        "sweep one attack axis");
  add_common_flags(ablate, cfg, config_file);
  ablate->add_option("--axis", axis, "n | t | k | p")->required();
  ablate->add_option("--values", values_text, "comma-separated integers")
      ->required();

  CLI::App* plot = app.add_subcommand("plot",
                                      "combined ROC SVG from metrics files");
  add_common_flags(plot, cfg, config_file);
  plot->add_option("files", metric_files, "metrics.json files")->required();
  plot->add_option("--names", names_text, "comma-separated curve names");
  plot->add_option("--out", out_file, "output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  finalize_config(cfg, config_file);

  if (gen->parsed()) {
    validate_config(cfg);
    Dataset ds = build_dataset(cfg);
    MembershipSplit split = split_members(ds, cfg.seed);
    fs::path dir = fs::path(cfg.output_dir) / "data";
    save_dataset(dir, ds, split);
    std::printf("wrote %zu samples (%zu members) -> %s\n", ds.size(),
                split.members.size(), dir.string().c_str());
    return 0;
  }

  if (train->parsed()) {
    validate_config(cfg);
    auto [ds, split] = dataset_for(cfg, data_dir);
    NoiseSchedule sched = build_schedule(
        cfg.schedule.T, cfg.schedule.beta_start, cfg.schedule.beta_end);
    TrainConfig tc;
    tc.steps = cfg.train.steps;
    tc.batch_size = cfg.train.batch_size;
    tc.width = cfg.train.width;
    tc.depth = cfg.train.depth;
    tc.time_dim = cfg.train.time_dim;
    tc.lr = cfg.train.lr;
    tc.log_every = cfg.train.log_every;
    tc.seed = cfg.seed;
    MlpDenoiser model = train_denoiser(ds, split, sched, tc);
    fs::path dir = fs::path(cfg.output_dir) / "model";
    model.save(dir);
    std::printf("trained %zu params, final loss %s -> %s\n",
                model.parameter_count(),
                model.loss_history().empty()
                    ? "n/a"
                    : format_double(model.loss_history().back()).c_str(),
                dir.string().c_str());
    return 0;
  }

  if (serve->parsed()) {
    validate_config(cfg);
    return run_serve(cfg, model_dir, host, port, default_t, quiet);
  }

  if (attack->parsed()) {
    validate_config(cfg);
    if (data_dir.empty() && model_dir.empty() && endpoint_url.empty()) {
      RunManifest m = run_experiment(cfg);
      std::printf("run complete in %ss\n",
                  format_double(m.wall_clock_seconds).c_str());
      std::printf("scores  %s\nmetrics %s\nroc     %s\n",
                  m.scores_csv.c_str(), m.metrics_json.c_str(),
                  m.roc_svg.c_str());
      RocSummary s =
          roc_summary_from_json(read_text_file(m.metrics_json));
      auto records = scores_from_csv(read_text_file(m.scores_csv));
      print_summary(s, cfg.eval.target_fpr, records, 0.0, false);
    } else {
      score_only(cfg, data_dir, model_dir, endpoint_url, timeout_ms);
    }
    return 0;
  }

  if (eval->parsed()) {
    std::vector<AttackRecord> records =
        scores_from_csv(read_text_file(scores_file));
    RocSummary summary = summarize_scores(records);
    fs::path out(cfg.output_dir);
    write_text_file(out / "metrics.json", roc_summary_to_json(summary));
    write_text_file(out / "roc.csv", roc_points_csv(summary.points));
    print_summary(summary, cfg.eval.target_fpr, records, tau,
                  tau_opt->count() > 0);
    return 0;
  }

  if (ablate->parsed()) {
    std::vector<int> values;
    for (const std::string& piece : CLI::detail::split(values_text, ',')) {
      try {
        values.push_back(std::stoi(piece));
      } catch (const std::logic_error&) {
        throw ConfigError("--values must be comma-separated integers");
      }
    }
    auto manifests = run_ablation(cfg, axis, values);
    auto rows = ablation_from_csv(
        read_text_file(fs::path(cfg.output_dir) / "ablation.csv"));
    std::printf("%-4s %8s %10s %10s %10s\n", "axis", "value", "auc", "asr",
                "tpr");
    for (const AblationRow& r : rows)
      std::printf("%-4s %8d %10s %10s %10s\n", r.axis.c_str(), r.value,
                  format_double(r.auc).c_str(), format_double(r.asr).c_str(),
                  format_double(r.tpr).c_str());
    std::printf("%zu runs -> %s/ablation.csv\n", manifests.size(),
                cfg.output_dir.c_str());
    return 0;
  }

  if (plot->parsed()) {
    std::vector<std::string> names;
    if (!names_text.empty()) names = CLI::detail::split(names_text, ',');
    std::vector<std::pair<std::string, RocSummary>> summaries;
    for (size_t i = 0; i < metric_files.size(); ++i) {
      std::string name = i < names.size()
                             ? names[i]
                             : fs::path(metric_files[i]).parent_path()
                                   .filename().string();
      if (name.empty()) name = "curve " + std::to_string(i + 1);
      summaries.emplace_back(
          name, roc_summary_from_json(read_text_file(metric_files[i])));
    }
    fs::path out = out_file.empty()
                       ? fs::path(cfg.output_dir) / "roc.svg"
                       : fs::path(out_file);
    plot_roc_svg(summaries, out);
    std::printf("wrote %s\n", out.string().c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const RemoteError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const PhaseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
