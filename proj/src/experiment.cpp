#include "rediffuse/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <stdexcept>

#include "json.hpp"
#include "rediffuse/errors.hpp"
#include "rediffuse/io.hpp"
#include "rediffuse/metrics.hpp"
#include "rediffuse/mlp.hpp"
#include "rediffuse/rng.hpp"
#include "rediffuse/svg.hpp"
#include "rediffuse/version.hpp"

namespace rediffuse {

namespace fs = std::filesystem;
using nlohmann::json;

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["config_hash"] = m.config_hash;
  j["model_dir"] = m.model_dir;
  j["scores_csv"] = m.scores_csv;
  j["metrics_json"] = m.metrics_json;
  j["roc_svg"] = m.roc_svg;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["version"] = m.version;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  RunManifest m;
  try {
    json j = json::parse(text);
    m.config_hash = j.at("config_hash").get<std::string>();
    m.model_dir = j.at("model_dir").get<std::string>();
    m.scores_csv = j.at("scores_csv").get<std::string>();
    m.metrics_json = j.at("metrics_json").get<std::string>();
    m.roc_svg = j.at("roc_svg").get<std::string>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    m.version = j.at("version").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad manifest json: ") + e.what());
  }
  return m;
}

std::string scores_to_csv(const std::vector<AttackRecord>& records) {
  std::string out =
      "# score = -distance; higher means more member-like; distance = " +
      (records.empty() ? std::string("none") : records.front().distance) +
      "\n";
  out += "sample_id,is_member,method,score,n,t,k\n";
  for (const AttackRecord& r : records) {
    out += std::to_string(r.sample_id) + ",";
    out += std::string(r.is_member ? "1" : "0") + ",";
    out += std::string(method_name(r.method)) + ",";
    out += format_double(r.score) + ",";
    out += std::to_string(r.n) + ",";
    out += std::to_string(r.t) + ",";
    out += std::to_string(r.k) + "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t pos = text.find('\n', start);
    if (pos == std::string::npos) pos = text.size();
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return lines;
}

[[noreturn]] void bad_csv(const std::string& what) {
  throw std::invalid_argument("bad csv: " + what);
}

double parse_num(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) bad_csv("trailing junk in " + what);
    return v;
  } catch (const std::logic_error&) {
    bad_csv("expected a number for " + what + ", got '" + s + "'");
  }
}

}  // namespace

std::vector<AttackRecord> scores_from_csv(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 2 || lines[0].rfind("# ", 0) != 0)
    bad_csv("missing scores comment line");
  std::string distance;
  const std::string tag = "distance = ";
  size_t pos = lines[0].find(tag);
  if (pos == std::string::npos) bad_csv("comment line lacks the distance");
  distance = lines[0].substr(pos + tag.size());
  if (lines[1] != "sample_id,is_member,method,score,n,t,k")
    bad_csv("unexpected scores header");

  std::vector<AttackRecord> records;
  for (size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = split_fields(lines[i], ',');
    if (f.size() != 7) bad_csv("row needs 7 fields");
    AttackRecord r;
    r.sample_id = uint64_t(parse_num(f[0], "sample_id"));
    if (f[1] != "0" && f[1] != "1") bad_csv("is_member must be 0 or 1");
    r.is_member = f[1] == "1";
    r.method = method_from_name(f[2]);
    r.score = parse_num(f[3], "score");
    r.n = int(parse_num(f[4], "n"));
    r.t = int(parse_num(f[5], "t"));
    r.k = int(parse_num(f[6], "k"));
    r.distance = distance;
    records.push_back(std::move(r));
  }
  return records;
}

std::string ablation_to_csv(const std::vector<AblationRow>& rows) {
  std::string out = "axis,value,auc,asr,tpr\n";
  for (const AblationRow& r : rows)
    out += r.axis + "," + std::to_string(r.value) + "," +
           format_double(r.auc) + "," + format_double(r.asr) + "," +
           format_double(r.tpr) + "\n";
  return out;
}

std::vector<AblationRow> ablation_from_csv(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty() || lines[0] != "axis,value,auc,asr,tpr")
    bad_csv("unexpected ablation header");
  std::vector<AblationRow> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = split_fields(lines[i], ',');
    if (f.size() != 5) bad_csv("row needs 5 fields");
    rows.push_back({f[0], int(parse_num(f[1], "value")),
                    parse_num(f[2], "auc"), parse_num(f[3], "asr"),
                    parse_num(f[4], "tpr")});
  }
  return rows;
}

Dataset build_dataset(const ExperimentConfig& cfg) {
  const DatasetConfig& d = cfg.dataset;
  if (d.kind == "gmm")
    return gen_gmm_dataset(d.n, d.dim, d.components, cfg.seed, d.sigma);
  return gen_shape_dataset(d.n, d.side, cfg.seed);
}

std::unique_ptr<DistanceFn> build_distance(const AttackConfig& a) {
  if (a.distance == "ssim") return std::make_unique<SsimDistance>();
  if (a.distance == "lp") return std::make_unique<LpDistance>(a.p);
  throw ConfigError("config: attack.distance must be 'lp' or 'ssim'");
}

void restyle_nonmembers(Dataset& ds, const MembershipSplit& split,
                        uint64_t seed) {
  Dataset shifted = style_shift(ds, seed);
  for (size_t i : split.nonmembers) {
    ds.samples[i] = shifted.samples[i];
    ds.descriptors[i] = shifted.descriptors[i];
  }
  ds.reset_access_counts();
}

namespace {

struct Pipeline {
  Dataset ds;  // nonmembers already restyled when the config says so
  MembershipSplit split;
  NoiseSchedule sched;
  MlpDenoiser model;
  std::string model_dir;
};

Pipeline prepare_pipeline(const ExperimentConfig& cfg) {
  Pipeline p{build_dataset(cfg),
             {},
             build_schedule(cfg.schedule.T, cfg.schedule.beta_start,
                            cfg.schedule.beta_end),
             {},
             {}};
  p.split = split_members(p.ds, cfg.seed);

  TrainConfig tc;
  tc.steps = cfg.train.steps;
  tc.batch_size = cfg.train.batch_size;
  tc.width = cfg.train.width;
  tc.depth = cfg.train.depth;
  tc.time_dim = cfg.train.time_dim;
  tc.lr = cfg.train.lr;
  tc.log_every = cfg.train.log_every;
  tc.seed = cfg.seed;
  p.model = train_denoiser(p.ds, p.split, p.sched, tc);

  p.model_dir = (fs::path(cfg.output_dir) / "model").string();
  p.model.save(p.model_dir);

  if (cfg.dataset.style_shift)
    restyle_nonmembers(p.ds, p.split, derive_seed(cfg.seed, 0x57796c65, 3));
  return p;
}

// Scoring plus all file emission for one attack parameterization.
RunManifest score_and_emit(const Pipeline& p, const ExperimentConfig& cfg,
                           const fs::path& dir, RocSummary* out_summary) {
  KPolicy policy = cfg.attack.k > 0 ? KPolicy::fixed(cfg.attack.k)
                                    : KPolicy::half_t();
  LocalEndpoint endpoint(p.model, p.sched, policy);
  std::unique_ptr<DistanceFn> dist = build_distance(cfg.attack);

  ScoreSpec spec;
  spec.method = method_from_name(cfg.attack.method);
  spec.t = cfg.attack.t;
  spec.n = cfg.attack.n;
  spec.k_reported = policy.k_for(cfg.attack.t);
  spec.experiment_seed = cfg.seed;

  bool whitebox = spec.method == AttackMethod::loss_baseline;
  std::vector<AttackRecord> records = score_dataset(
      &endpoint, p.ds, p.split, *dist, spec,
      whitebox ? &p.model : nullptr, whitebox ? &p.sched : nullptr);
  RocSummary summary = summarize_scores(records);

  RunManifest m;
  m.config_hash = config_hash(cfg);
  m.model_dir = p.model_dir;
  m.scores_csv = (dir / "scores.csv").string();
  m.metrics_json = (dir / "metrics.json").string();
  m.roc_svg = (dir / "roc.svg").string();
  m.version = kVersion;

  write_text_file(m.scores_csv, scores_to_csv(records));
  write_text_file(m.metrics_json, roc_summary_to_json(summary));
  plot_roc_svg({{cfg.attack.method, summary}}, m.roc_svg);
  if (out_summary) *out_summary = summary;
  return m;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  auto t0 = std::chrono::steady_clock::now();

  Pipeline p = prepare_pipeline(cfg);
  RunManifest m = score_and_emit(p, cfg, cfg.output_dir, nullptr);

  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_text_file(fs::path(cfg.output_dir) / "manifest.json",
                  manifest_to_json(m));
  return m;
}

std::vector<RunManifest> run_ablation(const ExperimentConfig& cfg,
                                      const std::string& axis,
                                      const std::vector<int>& values) {
  validate_config(cfg);
  if (axis != "n" && axis != "t" && axis != "k" && axis != "p")
    throw ConfigError("ablation axis must be one of n, t, k, p");
  if (values.empty()) throw ConfigError("ablation needs at least one value");

  std::vector<ExperimentConfig> variants;
  for (int v : values) {
    ExperimentConfig c = cfg;
    if (axis == "n")
      c.attack.n = v;
    else if (axis == "t")
      c.attack.t = v;
    else if (axis == "k")
      c.attack.k = v;
    else
      c.attack.p = v;
    validate_config(c);  // rejects out-of-range axis values
    if (axis == "k" && v > cfg.attack.t)
      throw ConfigError("ablation k value exceeds attack.t");
    variants.push_back(std::move(c));
  }

  auto t0 = std::chrono::steady_clock::now();
  Pipeline p = prepare_pipeline(cfg);

  std::vector<RunManifest> manifests;
  std::vector<AblationRow> rows;
  for (size_t i = 0; i < variants.size(); ++i) {
    fs::path dir = fs::path(cfg.output_dir) /
                   ("ablate_" + axis + "_" + std::to_string(values[i]));
    RocSummary summary;
    RunManifest m = score_and_emit(p, variants[i], dir, &summary);
    m.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_text_file(dir / "manifest.json", manifest_to_json(m));
    rows.push_back({axis, values[i], summary.auc, summary.asr,
                    summary.tpr_at_1pct_fpr});
    manifests.push_back(std::move(m));
  }
  write_text_file(fs::path(cfg.output_dir) / "ablation.csv",
                  ablation_to_csv(rows));
  return manifests;
}

}  // namespace rediffuse
