#include "rediffuse/schedule.hpp"

#include <stdexcept>
#include <string>

namespace rediffuse {

NoiseSchedule::NoiseSchedule(int T, std::vector<double> beta) : T_(T) {
  if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
  if (int(beta.size()) != T)
    throw std::invalid_argument("schedule: beta length != T");
  beta_ = std::move(beta);
  alpha_.resize(size_t(T));
  alpha_bar_.resize(size_t(T));
  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    double b = beta_[size_t(i)];
    if (!(b > 0.0 && b < 1.0))
      throw std::invalid_argument("schedule: beta_" + std::to_string(i + 1) +
                                  " outside (0,1)");
    alpha_[size_t(i)] = 1.0 - b;
    prod *= alpha_[size_t(i)];
    alpha_bar_[size_t(i)] = prod;
  }
}

int NoiseSchedule::check(int t) const {
  if (t < 1 || t > T_)
    throw std::out_of_range("schedule: step " + std::to_string(t) +
                            " outside [1," + std::to_string(T_) + "]");
  return t;
}

NoiseSchedule build_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
  if (!(beta_start > 0.0 && beta_end < 1.0))
    throw std::invalid_argument("schedule: betas must lie in (0,1)");
  if (beta_start > beta_end)
    throw std::invalid_argument("schedule: beta_start > beta_end");
  std::vector<double> beta(static_cast<size_t>(T));
  if (T == 1) {
    beta[0] = beta_start;
  } else {
    double step = (beta_end - beta_start) / double(T - 1);
    for (int i = 0; i < T; ++i) beta[size_t(i)] = beta_start + step * i;
    beta[size_t(T - 1)] = beta_end;
  }
  return NoiseSchedule(T, std::move(beta));
}

}  // namespace rediffuse
