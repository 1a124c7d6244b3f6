#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

#include "motif/errors.hpp"

namespace motif {

/// Dense single-channel raster. Rows are image rows (height), columns are
/// image columns (width); storage is row-major so `data()` walks the image
/// in scan order.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GrayImage = Image<double>;
using BinaryMask = Image<std::uint8_t>;

/// Square, odd-sized correlation kernel.
using Kernel = Image<double>;

template <typename Derived>
inline Eigen::Index width(const Eigen::DenseBase<Derived>& img) {
  return img.cols();
}
template <typename Derived>
inline Eigen::Index height(const Eigen::DenseBase<Derived>& img) {
  return img.rows();
}

/// Maps an out-of-range index back into [0, n) by whole-sample mirror
/// reflection (the edge sample is not repeated): -1 -> 1, n -> n-2.
/// Valid for overshoots of at most n-1.
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

/// Pads `img` by `border` samples on every side using mirror reflection.
template <typename Derived>
Image<typename Derived::Scalar> pad_symmetric(const Eigen::DenseBase<Derived>& img,
                                              Eigen::Index border) {
  const Eigen::Index h = img.rows();
  const Eigen::Index w = img.cols();
  if (border > 0 && (border > h - 1 || border > w - 1))
    throw DimensionError("padding border exceeds image extent");
  Image<typename Derived::Scalar> out(h + 2 * border, w + 2 * border);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const Eigen::Index sr = reflect_index(r - border, h);
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      out(r, c) = img.derived()(sr, reflect_index(c - border, w));
    }
  }
  return out;
}

/// Same-size cross-correlation with mirror boundary handling:
/// out(r,c) = sum_{i,j} k(i,j) * img(r + i - h, c + j - h), h = (p-1)/2.
template <typename Derived, typename KernelDerived>
Image<typename Derived::Scalar> cross_correlate(const Eigen::DenseBase<Derived>& img,
                                                const Eigen::DenseBase<KernelDerived>& k) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index p = k.rows();
  if (k.cols() != p || p % 2 == 0) throw DimensionError("kernel must be square with odd size");
  if (p > img.rows() || p > img.cols()) throw DimensionError("kernel larger than image");

  const Eigen::Index half = (p - 1) / 2;
  const Image<Scalar> padded = pad_symmetric(img, half);
  Image<Scalar> out = Image<Scalar>::Zero(img.rows(), img.cols());
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const Scalar w = static_cast<Scalar>(k.derived()(i, j));
      if (w == Scalar(0)) continue;
      out += w * padded.block(i, j, img.rows(), img.cols());
    }
  }
  return out;
}

/// Keeps every `stride`-th sample along both axes, starting at index 0.
template <typename Derived>
Image<typename Derived::Scalar> downsample(const Eigen::DenseBase<Derived>& img,
                                           Eigen::Index stride) {
  if (stride < 1) throw ParameterError("downsample stride must be >= 1");
  const Eigen::Index h = (img.rows() + stride - 1) / stride;
  const Eigen::Index w = (img.cols() + stride - 1) / stride;
  Image<typename Derived::Scalar> out(h, w);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c) out(r, c) = img.derived()(r * stride, c * stride);
  return out;
}

/// Normalized 2D Gaussian on the integer grid [-(p-1)/2, (p-1)/2]^2.
Kernel gaussian_kernel(int p, double sigma);

/// 256-bin CDF histogram equalization of an image with values in [0,255].
/// Values are rounded to the nearest level before binning. A constant image
/// is returned unchanged.
GrayImage equalize_histogram(const GrayImage& img);

/// Scales by 1/255 then removes the mean and divides by the population
/// standard deviation. Throws DegenerateInputError for constant images.
GrayImage standardize(const GrayImage& img);

/// Standardizes an image that is already on an arbitrary real scale
/// (no 1/255 step). Used for deeper-layer response maps.
GrayImage zscore(const GrayImage& img);

/// Full input conditioning: optional equalization, then `standardize`.
GrayImage preprocess(const GrayImage& raw, bool equalize);

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

/// Reads an 8-bit grayscale (or RGB/RGBA, averaged) PNG, or a binary P5 /
/// ASCII P2 PGM with maxval <= 255. Values land in [0,255].
GrayImage load_gray(const std::filesystem::path& path);

/// Writes values clamped to [0,255] and rounded as an 8-bit PNG or PGM
/// (chosen by extension).
void save_gray(const GrayImage& img, const std::filesystem::path& path);

/// Writes a [0,1] map as a 16-bit grayscale PNG with value round(v * 65535).
void save_probability_png(const GrayImage& map, const std::filesystem::path& path);

/// Reads a 16-bit (or 8-bit) grayscale PNG back into [0,1].
GrayImage load_probability_png(const std::filesystem::path& path);

/// Loads an 8-bit mask; pixels > 127 become 1.
BinaryMask load_mask(const std::filesystem::path& path);

/// Writes a mask as 8-bit 0/255.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace motif
