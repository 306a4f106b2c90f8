#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "asd/common.hpp"

namespace asd {

/// Pre-drawn (u_1..u_K, xi_1..xi_K). Entries are 1-indexed to match the
/// step they drive: xi_i is the noise that lands on state i.
class RandomTape {
 public:
  /// All K uniforms are drawn first, then the K normal vectors, from one
  /// mt19937_64 stream seeded with `seed`.
  static RandomTape draw(int steps, int dim, std::uint64_t seed);

  double u(int i) const;
  const Vector& xi(int i) const;

  int steps() const { return static_cast<int>(uniforms_.size()); }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  /// Replaces entries first..last (inclusive) with fresh draws from rng.
  void redraw(int first, int last, std::mt19937_64& rng);

 private:
  void check(int i) const;

  std::vector<double> uniforms_;
  std::vector<Vector> normals_;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
};

}  // namespace asd
