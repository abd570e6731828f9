#include "rediffuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "rediffuse/io.hpp"

namespace rediffuse {

namespace {

void check_scores(const std::vector<double>& members,
                  const std::vector<double>& nonmembers) {
  if (members.empty() || nonmembers.empty())
    throw std::invalid_argument("metrics: need both member and nonmember scores");
  for (double s : members)
    if (!std::isfinite(s))
      throw std::invalid_argument("metrics: non-finite member score");
  for (double s : nonmembers)
    if (!std::isfinite(s))
      throw std::invalid_argument("metrics: non-finite nonmember score");
}

void split_scores(const std::vector<AttackRecord>& records,
                  std::vector<double>& members,
                  std::vector<double>& nonmembers) {
  for (const AttackRecord& r : records)
    (r.is_member ? members : nonmembers).push_back(r.score);
}

size_t count_at_least(const std::vector<double>& sorted_asc, double theta) {
  return sorted_asc.end() -
         std::lower_bound(sorted_asc.begin(), sorted_asc.end(), theta);
}

// Doubled pair count (2 per win, 1 per tie) so ties stay exact in integers.
unsigned long long doubled_wins(const std::vector<double>& members,
                                const std::vector<double>& nonmembers) {
  std::vector<double> non_sorted = nonmembers;
  std::sort(non_sorted.begin(), non_sorted.end());
  unsigned long long u2 = 0;
  for (double m : members) {
    auto lo = std::lower_bound(non_sorted.begin(), non_sorted.end(), m);
    auto hi = std::upper_bound(lo, non_sorted.end(), m);
    u2 += 2ull * size_t(lo - non_sorted.begin()) + size_t(hi - lo);
  }
  return u2;
}

}  // namespace

std::vector<RocPoint> roc_curve(const std::vector<double>& member_scores,
                                const std::vector<double>& nonmember_scores) {
  check_scores(member_scores, nonmember_scores);
  std::vector<double> mem = member_scores;
  std::vector<double> non = nonmember_scores;
  std::sort(mem.begin(), mem.end());
  std::sort(non.begin(), non.end());

  std::vector<double> thresholds;
  thresholds.reserve(mem.size() + non.size());
  thresholds.insert(thresholds.end(), mem.begin(), mem.end());
  thresholds.insert(thresholds.end(), non.begin(), non.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<RocPoint> points;
  points.push_back({0.0, 0.0});
  for (double theta : thresholds) {
    RocPoint p{double(count_at_least(non, theta)) / double(non.size()),
               double(count_at_least(mem, theta)) / double(mem.size())};
    if (!(p == points.back())) points.push_back(p);
  }
  if (!(points.back() == RocPoint{1.0, 1.0})) points.push_back({1.0, 1.0});
  return points;
}

std::vector<RocPoint> roc_curve(const std::vector<AttackRecord>& records) {
  std::vector<double> mem, non;
  split_scores(records, mem, non);
  return roc_curve(mem, non);
}

double auc(const std::vector<double>& member_scores,
           const std::vector<double>& nonmember_scores) {
  check_scores(member_scores, nonmember_scores);
  unsigned long long u2 = doubled_wins(member_scores, nonmember_scores);
  return double(u2) /
         (2.0 * double(member_scores.size()) * double(nonmember_scores.size()));
}

double auc(const std::vector<AttackRecord>& records) {
  std::vector<double> mem, non;
  split_scores(records, mem, non);
  return auc(mem, non);
}

double auc_oracle(const std::vector<double>& member_scores,
                  const std::vector<double>& nonmember_scores) {
  check_scores(member_scores, nonmember_scores);
  unsigned long long u2 = 0;
  for (double m : member_scores)
    for (double n : nonmember_scores) {
      if (m > n)
        u2 += 2;
      else if (m == n)
        u2 += 1;
    }
  return double(u2) /
         (2.0 * double(member_scores.size()) * double(nonmember_scores.size()));
}

double auc_oracle(const std::vector<AttackRecord>& records) {
  std::vector<double> mem, non;
  split_scores(records, mem, non);
  return auc_oracle(mem, non);
}

double asr(const std::vector<double>& member_scores,
           const std::vector<double>& nonmember_scores) {
  double best = 0.0;
  for (const RocPoint& p : roc_curve(member_scores, nonmember_scores))
    best = std::max(best, 0.5 * (p.tpr + 1.0 - p.fpr));
  return best;
}

double asr(const std::vector<AttackRecord>& records) {
  std::vector<double> mem, non;
  split_scores(records, mem, non);
  return asr(mem, non);
}

double tpr_at_fpr(const std::vector<double>& member_scores,
                  const std::vector<double>& nonmember_scores,
                  double target_fpr) {
  if (!(target_fpr >= 0.0 && target_fpr <= 1.0))
    throw std::invalid_argument("metrics: target fpr must be in [0, 1]");
  double best = 0.0;
  for (const RocPoint& p : roc_curve(member_scores, nonmember_scores))
    if (p.fpr <= target_fpr) best = std::max(best, p.tpr);
  return best;
}

double tpr_at_fpr(const std::vector<AttackRecord>& records,
                  double target_fpr) {
  std::vector<double> mem, non;
  split_scores(records, mem, non);
  return tpr_at_fpr(mem, non, target_fpr);
}

double accuracy_at_tau(const std::vector<AttackRecord>& records, double tau) {
  if (records.empty())
    throw std::invalid_argument("metrics: no records");
  size_t correct = 0;
  for (const AttackRecord& r : records)
    correct += classify_membership(r.score, tau) == r.is_member;
  return double(correct) / double(records.size());
}

double trapezoid_area(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (size_t i = 1; i < points.size(); ++i)
    area += 0.5 * (points[i].tpr + points[i - 1].tpr) *
            (points[i].fpr - points[i - 1].fpr);
  return area;
}

RocSummary summarize_scores(const std::vector<double>& member_scores,
                            const std::vector<double>& nonmember_scores) {
  RocSummary s;
  s.points = roc_curve(member_scores, nonmember_scores);
  s.auc = auc(member_scores, nonmember_scores);
  s.asr = asr(member_scores, nonmember_scores);
  s.tpr_at_1pct_fpr = tpr_at_fpr(member_scores, nonmember_scores, 0.01);
  return s;
}

RocSummary summarize_scores(const std::vector<AttackRecord>& records) {
  std::vector<double> mem, non;
  split_scores(records, mem, non);
  return summarize_scores(mem, non);
}

std::string roc_summary_to_json(const RocSummary& s) {
  nlohmann::json j;
  j["auc"] = s.auc;
  j["asr"] = s.asr;
  j["tpr_at_1pct_fpr"] = s.tpr_at_1pct_fpr;
  nlohmann::json pts = nlohmann::json::array();
  for (const RocPoint& p : s.points)
    pts.push_back(nlohmann::json::array({p.fpr, p.tpr}));
  j["points"] = pts;
  return j.dump(2) + "\n";
}

RocSummary roc_summary_from_json(const std::string& text) {
  RocSummary s;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    s.auc = j.at("auc").get<double>();
    s.asr = j.at("asr").get<double>();
    s.tpr_at_1pct_fpr = j.at("tpr_at_1pct_fpr").get<double>();
    for (const auto& p : j.at("points"))
      s.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad roc summary json: ") +
                                e.what());
  }
  return s;
}

std::string roc_points_csv(const std::vector<RocPoint>& points) {
  std::string out = "fpr,tpr\n";
  for (const RocPoint& p : points)
    out += format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
  return out;
}

}  // namespace rediffuse
