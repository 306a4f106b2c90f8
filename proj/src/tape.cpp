#include "asd/tape.hpp"

#include <string>

namespace asd {

RandomTape RandomTape::draw(int steps, int dim, std::uint64_t seed) {
  if (steps < 1 || dim < 1) throw ParameterError("random tape needs K >= 1 and d >= 1");
  RandomTape tape;
  tape.dim_ = dim;
  tape.seed_ = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  tape.uniforms_.resize(static_cast<std::size_t>(steps));
  for (auto& u : tape.uniforms_) u = unif(rng);
  tape.normals_.resize(static_cast<std::size_t>(steps));
  for (auto& xi : tape.normals_) {
    xi.resize(dim);
    for (int j = 0; j < dim; ++j) xi[j] = normal(rng);
  }
  return tape;
}

void RandomTape::check(int i) const {
  if (i < 1 || i > steps()) {
    throw TapeError("random tape index " + std::to_string(i) + " outside [1, " +
                    std::to_string(steps()) + "]");
  }
}

double RandomTape::u(int i) const {
  check(i);
  return uniforms_[static_cast<std::size_t>(i - 1)];
}

const Vector& RandomTape::xi(int i) const {
  check(i);
  return normals_[static_cast<std::size_t>(i - 1)];
}

void RandomTape::redraw(int first, int last, std::mt19937_64& rng) {
  check(first);
  check(last);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = first; i <= last; ++i) {
    uniforms_[static_cast<std::size_t>(i - 1)] = unif(rng);
    auto& xi = normals_[static_cast<std::size_t>(i - 1)];
    for (int j = 0; j < dim_; ++j) xi[j] = normal(rng);
  }
}

}  // namespace asd
