#include "motif/patching.hpp"

#include <cmath>
#include <numbers>

namespace motif {

double SplitMix64::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

PatchSet extract_patches(const GrayImage& img, int p, int stride) {
  if (p < 1) throw ParameterError("patch size must be >= 1");
  if (stride < 1) throw ParameterError("patch stride must be >= 1");
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  if (p > h || p > w) throw DimensionError("patch size exceeds image dimensions");

  const int ny = origins_along(h, p, stride);
  const int nx = origins_along(w, p, stride);
  PatchSet ps;
  ps.size = p;
  ps.stride = stride;
  ps.origins.reserve(static_cast<std::size_t>(nx) * ny);
  ps.values.resize(static_cast<Eigen::Index>(nx) * ny, static_cast<Eigen::Index>(p) * p);

  Eigen::Index k = 0;
  for (int r = 0; r < ny; ++r) {
    for (int c = 0; c < nx; ++c, ++k) {
      const PatchOrigin o{r * stride, c * stride};
      ps.origins.push_back(o);
      for (int i = 0; i < p; ++i)
        ps.values.row(k).segment(static_cast<Eigen::Index>(i) * p, p) =
            img.row(o.row + i).segment(o.col, p).matrix();
    }
  }
  return ps;
}

namespace {

PatchSet select_rows(const PatchSet& ps, const std::vector<std::size_t>& rows) {
  PatchSet out;
  out.size = ps.size;
  out.stride = ps.stride;
  out.origins.reserve(rows.size());
  out.values.resize(static_cast<Eigen::Index>(rows.size()), ps.values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.origins.push_back(ps.origins[rows[i]]);
    out.values.row(static_cast<Eigen::Index>(i)) = ps.values.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

PatchSet filter_by_variance(const PatchSet& ps, double contrast_threshold) {
  if (contrast_threshold < 0.0) throw ParameterError("contrast threshold must be >= 0");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ps.count(); ++i) {
    const auto row = ps.patch(i).array();
    const double var = (row - row.mean()).square().mean();
    if (var > contrast_threshold) keep.push_back(i);
  }
  return select_rows(ps, keep);
}

PatchSet shuffle_patches(const PatchSet& ps, std::uint64_t seed) {
  std::vector<std::size_t> order(ps.count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = order.size(); i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  return select_rows(ps, order);
}

}  // namespace motif
