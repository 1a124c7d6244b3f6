#pragma once

#include <optional>
#include <utility>

#include "motif/anomaly.hpp"

namespace motif {

/// Maps [0,1] values to integer levels floor(v * (levels-1) + 0.5).
GrayImage quantize_map(const ProbabilityMap& map, int levels);

/// n x n box mean with mirror boundary, rounded to the nearest level.
GrayImage neighborhood_mean(const GrayImage& img, int n);

struct EntropyThreshold {
  int s = 0;  // gray-level threshold
  int t = 0;  // neighborhood-mean threshold
  double entropy = 0.0;
};

/// Joint histogram of (level, neighborhood-mean level) pairs, levels x levels,
/// as raw counts.
Eigen::MatrixXd joint_histogram(const GrayImage& img, const GrayImage& mean_img, int levels);

/// Two-dimensional maximum-entropy threshold pair. For every (s, t) the
/// background block [0,s) x [0,t) and the object block [s,L) x [t,L) are
/// treated as separate distributions; the pair maximizing the sum of their
/// Shannon entropies wins (lexicographically lowest on ties). Pairs where
/// either block is empty are skipped. Throws DegenerateInputError if no pair
/// qualifies.
EntropyThreshold entropy_threshold_2d(const GrayImage& img, const GrayImage& mean_img, int levels);

/// 1 where img >= s and mean_img >= t.
BinaryMask binarize(const GrayImage& img, int s, int t, const GrayImage& mean_img);

BinaryMask erode(const BinaryMask& mask, int se);
BinaryMask dilate(const BinaryMask& mask, int se);

/// Erosion then dilation with an se x se square. Pixels outside the image
/// count as background for erosion.
BinaryMask opening(const BinaryMask& mask, int se);

struct SegmentOptions {
  int levels = 256;
  int neighborhood = 3;
  int structuring_element = 3;
  /// When set, bypass entropy thresholding and keep pixels whose map value
  /// is >= this cutoff (used by threshold sweeps).
  std::optional<double> fixed_cutoff;
};

struct Segmentation {
  BinaryMask mask;
  std::optional<EntropyThreshold> threshold;  // empty when the map was degenerate or fixed
};

/// quantize -> neighborhood mean -> 2D max entropy -> binarize -> opening.
/// A degenerate (single-level) map yields an empty mask.
Segmentation segment(const ProbabilityMap& map, const SegmentOptions& opts = {});

}  // namespace motif
