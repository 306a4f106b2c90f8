#include "asd/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "asd/common.hpp"

namespace asd {

TimeGrid::TimeGrid(std::vector<double> times, std::vector<double> noise_scales)
    : times_(std::move(times)), noise_scales_(std::move(noise_scales)) {
  if (times_.size() < 2) throw ParameterError("time grid needs K >= 1 steps");
  if (noise_scales_.size() + 1 != times_.size()) {
    throw ParameterError("time grid: expected " + std::to_string(times_.size() - 1) +
                         " noise scales, got " + std::to_string(noise_scales_.size()));
  }
  if (!(times_.front() >= 0.0)) throw ParameterError("time grid: t_0 must be >= 0");
  steps_.resize(times_.size() - 1);
  sl_ = true;
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    steps_[i] = times_[i + 1] - times_[i];
    if (!(steps_[i] > 0.0) || !std::isfinite(steps_[i])) {
      throw ParameterError("time grid: step " + std::to_string(i) + " is not positive");
    }
    if (!(noise_scales_[i] > 0.0)) {
      throw ParameterError("time grid: noise scale " + std::to_string(i + 1) +
                           " is not positive");
    }
    if (noise_scales_[i] != std::sqrt(steps_[i])) sl_ = false;
  }
}

TimeGrid TimeGrid::sl_uniform(double horizon, int steps) {
  if (steps < 1) throw ParameterError("time grid needs K >= 1 steps");
  if (!(horizon > 0.0)) throw ParameterError("time grid horizon must be positive");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  const double eta = horizon / steps;
  for (int i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = eta * i;
  t.back() = horizon;
  std::vector<double> s(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    s[static_cast<std::size_t>(i)] =
        std::sqrt(t[static_cast<std::size_t>(i) + 1] - t[static_cast<std::size_t>(i)]);
  }
  return TimeGrid(std::move(t), std::move(s));
}

TimeGrid TimeGrid::sl_geometric(double horizon, int steps, double first_time) {
  if (steps < 1) throw ParameterError("time grid needs K >= 1 steps");
  if (!(first_time > 0.0 && first_time < horizon)) {
    throw ParameterError("geometric grid: need 0 < first_time < horizon");
  }
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  t[0] = 0.0;
  if (steps == 1) {
    t[1] = horizon;
  } else {
    const double ratio = std::pow(horizon / first_time, 1.0 / (steps - 1));
    for (int i = 1; i <= steps; ++i) {
      t[static_cast<std::size_t>(i)] = first_time * std::pow(ratio, i - 1);
    }
    t.back() = horizon;
  }
  std::vector<double> s(static_cast<std::size_t>(steps));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(t[i + 1] - t[i]);
  return TimeGrid(std::move(t), std::move(s));
}

double TimeGrid::max_step() const { return *std::max_element(steps_.begin(), steps_.end()); }

}  // namespace asd
