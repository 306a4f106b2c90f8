#pragma once

#include <cstddef>
#include <vector>

namespace asd {

/// Discretization times t_0 < ... < t_K together with the per-step noise
/// scales sigma_{i+1} used on the step from t_i to t_{i+1}.
class TimeGrid {
 public:
  TimeGrid(std::vector<double> times, std::vector<double> noise_scales);

  /// Uniform grid on [0, horizon] with K steps and SL noise sqrt(eta_i).
  static TimeGrid sl_uniform(double horizon, int steps);
  /// t_0 = 0, then geometric spacing from first_time to horizon.
  static TimeGrid sl_geometric(double horizon, int steps, double first_time);

  int steps() const { return static_cast<int>(times_.size()) - 1; }
  double time(int i) const { return times_.at(static_cast<std::size_t>(i)); }
  /// eta_i = t_{i+1} - t_i, for 0 <= i < K.
  double step(int i) const { return steps_.at(static_cast<std::size_t>(i)); }
  /// sigma_i for the step that lands on index i, 1 <= i <= K.
  double sigma(int i) const { return noise_scales_.at(static_cast<std::size_t>(i - 1)); }
  double max_step() const;
  double horizon() const { return times_.back(); }
  bool is_sl() const { return sl_; }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& noise_scales() const { return noise_scales_; }

 private:
  std::vector<double> times_;
  std::vector<double> steps_;
  std::vector<double> noise_scales_;
  bool sl_ = false;
};

}  // namespace asd
