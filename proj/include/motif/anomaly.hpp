#pragma once

#include <optional>
#include <vector>

#include "motif/feature_bank.hpp"

namespace motif {

/// Per-pixel defect certainty in [0,1], same size as the test image.
using ProbabilityMap = GrayImage;

/// Min-max scales `v` into [0,1]; a constant vector maps to all 0.5.
template <typename Derived>
Eigen::RowVectorXd range_normalize(const Eigen::MatrixBase<Derived>& v) {
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  if (!(hi > lo)) return Eigen::RowVectorXd::Constant(v.size(), 0.5);
  return ((v.array() - lo) / (hi - lo)).matrix();
}

/// Mean absolute difference of two already range-normalized vectors.
template <typename A, typename B>
double normalized_manhattan(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.size() != b.size()) throw DimensionError("manhattan distance: length mismatch");
  return (a.derived().array() - b.derived().array()).abs().sum() / static_cast<double>(a.size());
}

/// L1 distance between the range-normalized copies of `a` and `b`, divided
/// by the vector length so the result lies in [0,1].
template <typename A, typename B>
double manhattan_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.size() != b.size()) throw DimensionError("manhattan distance: length mismatch");
  return normalized_manhattan(range_normalize(a), range_normalize(b));
}

/// A layer's features, range-normalized once, one per row.
class NormalizedBank {
 public:
  explicit NormalizedBank(const Layer& layer);

  struct Match {
    double distance = 0.0;
    std::size_t feature = 0;
  };

  /// Closest feature to an already range-normalized patch; lowest index
  /// wins ties.
  Match nearest(const Eigen::Ref<const Eigen::RowVectorXd>& normalized_patch) const;

  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }

 private:
  PatchMatrix rows_;
};

/// Closest feature of `layer` to a raw patch under `manhattan_distance`.
NormalizedBank::Match nearest_distance(const Eigen::RowVectorXd& patch, const Layer& layer);

/// Nearest-feature distances for every patch of every layer of one image.
/// Patch origins are in layer-input coordinates; `scale` converts them to
/// original-image pixels.
struct LayerScores {
  int filter_size = 0;
  int scale = 1;
  std::vector<PatchOrigin> origins;
  Eigen::VectorXd distance;
};

struct ImageScores {
  int height = 0;
  int width = 0;
  std::vector<LayerScores> layers;

  double max_distance() const;
};

/// Preprocesses `raw` as recorded in the model.
GrayImage preprocess_for(const Model& model, const GrayImage& raw);

/// Scores every patch (at the model's patch stride) of a raw image.
ImageScores score_image(const Model& model, const GrayImage& raw);

/// Largest nearest-feature distance over all patches of the training
/// image. Stored into `model.anomaly_threshold` and returned.
double calibrate_threshold(Model& model, const GrayImage& raw_train);

struct MapOptions {
  std::optional<double> threshold;  // overrides the model's calibrated threshold
  std::optional<double> sigma;      // Gaussian sigma in layer-input pixels; default p/6
};

/// Gaussian-weighted average of anomalous patch distances. Every patch
/// deposits its kernel weight into the normalizer; only patches with
/// distance > threshold deposit distance-weighted mass.
ProbabilityMap accumulate_map(const ImageScores& scores, double threshold,
                              std::optional<double> sigma = std::nullopt);

double resolve_threshold(const Model& model, const MapOptions& opts);

ProbabilityMap defect_probability_map(const Model& model, const GrayImage& raw,
                                      const MapOptions& opts = {});

}  // namespace motif
