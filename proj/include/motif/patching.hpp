#pragma once

#include <cstdint>
#include <vector>

#include "motif/image.hpp"

namespace motif {

/// SplitMix64, constants as in Vigna's public-domain splitmix64.c.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Unbiased integer in [0, bound) by rejection of the low remainder band.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();

 private:
  std::uint64_t state_;
};

struct PatchOrigin {
  int row = 0;
  int col = 0;
  friend bool operator==(const PatchOrigin&, const PatchOrigin&) = default;
};

using PatchMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row i of `values` is the p*p window (row-major) whose top-left corner is
/// `origins[i]`.
struct PatchSet {
  int size = 0;
  int stride = 1;
  std::vector<PatchOrigin> origins;
  PatchMatrix values;

  std::size_t count() const { return origins.size(); }
  bool empty() const { return origins.empty(); }
  auto patch(std::size_t i) const { return values.row(static_cast<Eigen::Index>(i)); }
};

/// Number of valid window origins along an axis of length `extent`.
inline int origins_along(int extent, int p, int stride) { return (extent - p) / stride + 1; }

/// Overlapping p x p windows at origins (r*stride, c*stride), scanned row by row.
PatchSet extract_patches(const GrayImage& img, int p, int stride);

/// Flattened window without building a whole PatchSet.
inline Eigen::RowVectorXd window(const GrayImage& img, int row, int col, int p) {
  const GrayImage block = img.block(row, col, p, p);
  return Eigen::Map<const Eigen::RowVectorXd>(block.data(), p * p);
}

/// Keeps patches whose population variance is strictly greater than
/// `contrast_threshold`; order is preserved.
PatchSet filter_by_variance(const PatchSet& ps, double contrast_threshold);

/// Fisher-Yates shuffle (i from n-1 down to 1, j uniform in [0, i]) driven by
/// SplitMix64 seeded with `seed`.
PatchSet shuffle_patches(const PatchSet& ps, std::uint64_t seed);

}  // namespace motif
