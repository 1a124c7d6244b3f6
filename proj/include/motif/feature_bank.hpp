#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motif/image.hpp"
#include "motif/patching.hpp"
#include "motif/periodicity.hpp"

namespace motif {

/// A learned template: running mean of its supporter patches.
struct Feature {
  Eigen::RowVectorXd weights;
  long supporters = 1;

  friend bool operator==(const Feature& a, const Feature& b) {
    return a.supporters == b.supporters && a.weights.size() == b.weights.size() &&
           (a.weights.array() == b.weights.array()).all();
  }
};

/// One bank of templates. `stride` is the downsampling applied to the
/// previous layer's response to form this layer's input (1 for the first
/// layer).
struct Layer {
  int filter_size = 0;
  int stride = 1;
  std::vector<Feature> features;

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// How the per-feature response maps of a layer are merged into the single
/// image the next layer trains on.
enum class Aggregation { Max, Mean };

struct Preprocessing {
  bool equalize = true;
  std::uint64_t seed = 42;
  double contrast_threshold = 0.0;

  friend bool operator==(const Preprocessing&, const Preprocessing&) = default;
};

inline constexpr int kModelFormatVersion = 1;

struct Model {
  std::string fabric_id;
  Preprocessing preprocessing;
  double similarity_threshold = 0.7;
  std::optional<double> anomaly_threshold;
  int patch_stride = 1;
  Aggregation aggregation = Aggregation::Max;
  std::vector<Layer> layers;

  /// Product of the layer strides up to and including `layer`: the size of
  /// one layer-input pixel measured in original-image pixels.
  int scale_of(std::size_t layer) const;
  /// Side of the receptive field of `layer` on the original image.
  int effective_window(std::size_t layer) const { return layers.at(layer).filter_size * scale_of(layer); }
  std::size_t feature_count() const;
  /// Sum over layers of feature count times p^2.
  std::size_t parameter_count() const;

  friend bool operator==(const Model&, const Model&) = default;
};

/// Cosine similarity clamped below at zero. Throws DegenerateInputError for
/// a zero vector and DimensionError on a length mismatch.
template <typename A, typename B>
double similarity(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.size() != b.size()) throw DimensionError("similarity: length mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DegenerateInputError("similarity of a zero vector");
  return std::max(0.0, a.dot(b) / (na * nb));
}

/// Per-patch record of what training did, for diagnostics and tests.
struct TrainingTrace {
  struct Step {
    std::size_t feature = 0;  // feature the patch created or joined
    bool created = false;
    double similarity = 0.0;  // best clamped similarity before the update (1 when created first)
  };
  std::vector<Step> steps;
  std::size_t visits = 0;  // incremented once per patch consumed
};

/// Single-pass similarity-gated template discovery over `patches` in order.
/// The first patch founds feature 0; every later patch joins its most similar
/// feature (lowest index on ties) when that similarity is >= `threshold`,
/// otherwise it founds a new feature.
Layer train_layer(const PatchSet& patches, double threshold, TrainingTrace* trace = nullptr);

struct TrainingConfig {
  int filter_size = 0;  // 0 selects the size from the estimated texture period
  int num_layers = 1;
  int layer_stride = 1;
  int patch_stride = 1;
  double similarity_threshold = 0.7;
  std::uint64_t seed = 42;
  double contrast_threshold = 0.0;
  bool equalize = true;
  Aggregation aggregation = Aggregation::Max;
  double min_prominence = kDefaultMinProminence;
  std::string fabric_id;
};

struct BuildReport {
  std::optional<PeriodEstimate> period;
  int filter_size = 0;
  std::vector<std::size_t> candidate_patches;  // per layer, before variance filtering
  std::vector<std::size_t> trained_patches;    // per layer, visits made by train_layer
};

/// Responses of every feature in `layer` correlated with `input`, merged
/// per pixel, downsampled by `stride` and re-standardized.
GrayImage next_layer_input(const Layer& layer, const GrayImage& input, int stride,
                           Aggregation aggregation);

/// Inputs seen by every layer of `model` for an already preprocessed image.
std::vector<GrayImage> layer_inputs(const Model& model, const GrayImage& preprocessed);

/// Trains a model from a raw defect-free reference image (values 0..255).
/// The anomaly threshold is left unset.
Model build_model(const GrayImage& raw, const TrainingConfig& cfg, BuildReport* report = nullptr);

void save_model(const Model& m, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

std::string to_string(Aggregation a);
Aggregation parse_aggregation(const std::string& s);

}  // namespace motif
