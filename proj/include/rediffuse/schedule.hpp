#pragma once

#include <vector>

namespace rediffuse {

// Linear beta schedule plus derived alpha products. Steps are 1-based:
// t in {1..T} indexes a noising step, t = 0 means clean data, and
// alpha_bar(0) == 1 so "denoise to step 0" is well-defined.
//
// Kept in double: the product recurrence must hold to 1e-12 relative, which
// single precision cannot guarantee over a thousand terms.
class NoiseSchedule {
 public:
  NoiseSchedule(int T, std::vector<double> beta);

  int T() const { return T_; }
  double beta(int t) const { return beta_[check(t) - 1]; }
  double alpha(int t) const { return alpha_[check(t) - 1]; }
  double alpha_bar(int t) const {
    return t == 0 ? 1.0 : alpha_bar_[check(t) - 1];
  }

 private:
  int check(int t) const;

  int T_;
  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
};

// Betas linearly interpolated from beta_start to beta_end inclusive.
// Rejects T < 1, betas outside (0,1), and beta_start > beta_end.
NoiseSchedule build_schedule(int T, double beta_start, double beta_end);

}  // namespace rediffuse
