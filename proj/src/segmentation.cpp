#include "motif/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace motif {

GrayImage quantize_map(const ProbabilityMap& map, int levels) {
  if (levels < 2 || levels > 256) throw ParameterError("level count must lie in [2, 256]");
  const double top = levels - 1;
  return map.unaryExpr([top](double v) {
    return std::clamp(std::floor(std::clamp(v, 0.0, 1.0) * top + 0.5), 0.0, top);
  });
}

GrayImage neighborhood_mean(const GrayImage& img, int n) {
  if (n < 1 || n % 2 == 0) throw ParameterError("neighborhood size must be odd and positive");
  // Integer box sums are exact, so rounding happens on the true mean.
  const GrayImage sums = cross_correlate(img, Kernel::Ones(n, n));
  const double area = static_cast<double>(n) * n;
  return sums.unaryExpr([area](double s) { return std::round(s / area); });
}

Eigen::MatrixXd joint_histogram(const GrayImage& img, const GrayImage& mean_img, int levels) {
  if (img.rows() != mean_img.rows() || img.cols() != mean_img.cols())
    throw DimensionError("image and neighborhood-mean image differ in size");
  Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(levels, levels);
  for (Eigen::Index k = 0; k < img.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(img.data()[k]);
    const auto j = static_cast<Eigen::Index>(mean_img.data()[k]);
    if (i < 0 || i >= levels || j < 0 || j >= levels)
      throw ParameterError("pixel level outside [0, levels)");
    hist(i, j) += 1.0;
  }
  return hist;
}

EntropyThreshold entropy_threshold_2d(const GrayImage& img, const GrayImage& mean_img, int levels) {
  if (levels < 2 || levels > 256) throw ParameterError("level count must lie in [2, 256]");
  const Eigen::MatrixXd c = joint_histogram(img, mean_img, levels);
  const Eigen::MatrixXd clogc = c.unaryExpr([](double v) { return v > 0.0 ? v * std::log(v) : 0.0; });

  // Block sums are built by appending one row or column at a time so that
  // candidates that differ only by empty rows/columns produce bit-identical
  // entropies and tie-break deterministically.
  const Eigen::Index L = levels;
  Eigen::MatrixXd row_prefix_c(L, L + 1), row_prefix_f(L, L + 1);
  Eigen::MatrixXd row_suffix_c(L, L + 1), row_suffix_f(L, L + 1);
  for (Eigen::Index i = 0; i < L; ++i) {
    row_prefix_c(i, 0) = row_prefix_f(i, 0) = 0.0;
    for (Eigen::Index t = 0; t < L; ++t) {
      row_prefix_c(i, t + 1) = row_prefix_c(i, t) + c(i, t);
      row_prefix_f(i, t + 1) = row_prefix_f(i, t) + clogc(i, t);
    }
    row_suffix_c(i, L) = row_suffix_f(i, L) = 0.0;
    for (Eigen::Index t = L - 1; t >= 0; --t) {
      row_suffix_c(i, t) = row_suffix_c(i, t + 1) + c(i, t);
      row_suffix_f(i, t) = row_suffix_f(i, t + 1) + clogc(i, t);
    }
  }
  // back_*(s, t): block [0,s) x [0,t); obj_*(s, t): block [s,L) x [t,L).
  Eigen::MatrixXd back_c = Eigen::MatrixXd::Zero(L + 1, L + 1), back_f = back_c;
  Eigen::MatrixXd obj_c = back_c, obj_f = back_c;
  for (Eigen::Index s = 0; s < L; ++s) {
    back_c.row(s + 1) = back_c.row(s) + row_prefix_c.row(s);
    back_f.row(s + 1) = back_f.row(s) + row_prefix_f.row(s);
  }
  for (Eigen::Index s = L - 1; s >= 0; --s) {
    obj_c.row(s) = obj_c.row(s + 1) + row_suffix_c.row(s);
    obj_f.row(s) = obj_f.row(s + 1) + row_suffix_f.row(s);
  }

  auto block_entropy = [](double count, double f) { return std::log(count) - f / count; };

  std::optional<EntropyThreshold> best;
  for (int s = 1; s < levels; ++s) {
    for (int t = 1; t < levels; ++t) {
      const double p1 = back_c(s, t);
      const double p2 = obj_c(s, t);
      if (p1 <= 0.0 || p2 <= 0.0) continue;
      const double h = block_entropy(p1, back_f(s, t)) + block_entropy(p2, obj_f(s, t));
      if (!best || h > best->entropy + 1e-12) best = EntropyThreshold{s, t, h};
    }
  }
  if (!best) throw DegenerateInputError("no threshold pair separates the map into two classes");
  return *best;
}

BinaryMask binarize(const GrayImage& img, int s, int t, const GrayImage& mean_img) {
  if (img.rows() != mean_img.rows() || img.cols() != mean_img.cols())
    throw DimensionError("image and neighborhood-mean image differ in size");
  return ((img >= s) && (mean_img >= t)).cast<std::uint8_t>();
}

namespace {

// Separable min/max over a square window. Beyond the border, erosion sees
// background and dilation sees nothing.
BinaryMask rank_filter(const BinaryMask& mask, int se, bool take_min) {
  if (se < 1 || se % 2 == 0) throw ParameterError("structuring element size must be odd");
  const int half = se / 2;
  const Eigen::Index h = mask.rows();
  const Eigen::Index w = mask.cols();
  auto pass = [&](const BinaryMask& in, bool along_rows) {
    BinaryMask out(h, w);
    for (Eigen::Index r = 0; r < h; ++r) {
      for (Eigen::Index c = 0; c < w; ++c) {
        std::uint8_t acc = take_min ? 1 : 0;
        for (int d = -half; d <= half; ++d) {
          const Eigen::Index rr = along_rows ? r : r + d;
          const Eigen::Index cc = along_rows ? c + d : c;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) {
            if (take_min) acc = 0;
            continue;
          }
          acc = take_min ? std::min(acc, in(rr, cc)) : std::max(acc, in(rr, cc));
        }
        out(r, c) = acc;
      }
    }
    return out;
  };
  return pass(pass(mask, true), false);
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int se) { return rank_filter(mask, se, true); }
BinaryMask dilate(const BinaryMask& mask, int se) { return rank_filter(mask, se, false); }
BinaryMask opening(const BinaryMask& mask, int se) { return dilate(erode(mask, se), se); }

Segmentation segment(const ProbabilityMap& map, const SegmentOptions& opts) {
  Segmentation out;
  if (opts.fixed_cutoff) {
    out.mask = opening((map >= *opts.fixed_cutoff).cast<std::uint8_t>(), opts.structuring_element);
    return out;
  }
  const GrayImage levels = quantize_map(map, opts.levels);
  const GrayImage means = neighborhood_mean(levels, opts.neighborhood);
  try {
    out.threshold = entropy_threshold_2d(levels, means, opts.levels);
  } catch (const DegenerateInputError&) {
    out.mask = BinaryMask::Zero(map.rows(), map.cols());
    return out;
  }
  out.mask = opening(binarize(levels, out.threshold->s, out.threshold->t, means),
                     opts.structuring_element);
  return out;
}

}  // namespace motif
