#pragma once

#include <string>
#include <vector>

#include "rediffuse/attack.hpp"

namespace rediffuse {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocSummary {
  std::vector<RocPoint> points;
  double auc = 0.0;
  double asr = 0.0;
  double tpr_at_1pct_fpr = 0.0;
};

// Threshold sweep over all distinct scores, descending. A sample counts as
// positive when score >= threshold. Points are anchored at (0,0) and (1,1).
std::vector<RocPoint> roc_curve(const std::vector<double>& member_scores,
                                const std::vector<double>& nonmember_scores);
std::vector<RocPoint> roc_curve(const std::vector<AttackRecord>& records);

// Probability that a random member outscores a random nonmember, ties half.
double auc(const std::vector<double>& member_scores,
           const std::vector<double>& nonmember_scores);
double auc(const std::vector<AttackRecord>& records);

// Brute-force pair loop, kept as an independent check on auc().
double auc_oracle(const std::vector<double>& member_scores,
                  const std::vector<double>& nonmember_scores);
double auc_oracle(const std::vector<AttackRecord>& records);

// Best balanced accuracy over thresholds: max (tpr + 1 - fpr) / 2.
double asr(const std::vector<double>& member_scores,
           const std::vector<double>& nonmember_scores);
double asr(const std::vector<AttackRecord>& records);

// Highest tpr whose fpr stays at or below target; step rule, no
// interpolation, so the value is achievable by an actual threshold.
double tpr_at_fpr(const std::vector<double>& member_scores,
                  const std::vector<double>& nonmember_scores,
                  double target_fpr);
double tpr_at_fpr(const std::vector<AttackRecord>& records, double target_fpr);

// Raw accuracy of the fixed-threshold decision rule (member iff score > -tau).
double accuracy_at_tau(const std::vector<AttackRecord>& records, double tau);

double trapezoid_area(const std::vector<RocPoint>& points);

RocSummary summarize_scores(const std::vector<AttackRecord>& records);
RocSummary summarize_scores(const std::vector<double>& member_scores,
                            const std::vector<double>& nonmember_scores);

std::string roc_summary_to_json(const RocSummary& s);
RocSummary roc_summary_from_json(const std::string& text);
std::string roc_points_csv(const std::vector<RocPoint>& points);

}  // namespace rediffuse
