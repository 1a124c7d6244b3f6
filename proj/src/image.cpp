#include "motif/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace motif {

Kernel gaussian_kernel(int p, double sigma) {
  if (p < 1 || p % 2 == 0) throw ParameterError("gaussian kernel size must be odd and positive");
  if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be > 0");

  const int half = (p - 1) / 2;
  const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
  Kernel k(p, p);
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j)
      k(i + half, j + half) = norm * std::exp(-(i * i + j * j) / (2.0 * sigma * sigma));
  return k / k.sum();
}

GrayImage equalize_histogram(const GrayImage& img) {
  std::array<long, 256> hist{};
  auto level = [](double v) {
    return static_cast<int>(std::clamp(std::lround(v), 0L, 255L));
  };
  for (Eigen::Index i = 0; i < img.size(); ++i) ++hist[level(img.data()[i])];

  std::array<long, 256> cdf{};
  long running = 0;
  for (int v = 0; v < 256; ++v) cdf[v] = (running += hist[v]);

  long cdf_min = 0;
  for (int v = 0; v < 256; ++v) {
    if (hist[v] > 0) {
      cdf_min = cdf[v];
      break;
    }
  }
  const long n = static_cast<long>(img.size());
  if (n == cdf_min) return img;

  std::array<double, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    lut[v] = std::round(static_cast<double>(cdf[v] - cdf_min) / static_cast<double>(n - cdf_min) *
                        255.0);
    if (lut[v] < 0.0) lut[v] = 0.0;
  }
  return img.unaryExpr([&](double v) { return lut[level(v)]; });
}

GrayImage zscore(const GrayImage& img) {
  const double mean = img.mean();
  const GrayImage centered = img - mean;
  const double sd = std::sqrt(centered.square().mean());
  if (!(sd > 0.0)) throw DegenerateInputError("cannot standardize a constant image");
  return centered / sd;
}

GrayImage standardize(const GrayImage& img) { return zscore(img / 255.0); }

GrayImage preprocess(const GrayImage& raw, bool equalize) {
  return standardize(equalize ? equalize_histogram(raw) : raw);
}

}  // namespace motif
