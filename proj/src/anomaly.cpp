#include "motif/anomaly.hpp"

#include <algorithm>
#include <limits>

namespace motif {

NormalizedBank::NormalizedBank(const Layer& layer) {
  if (layer.features.empty()) throw ModelError("layer has no features");
  const Eigen::Index dim = layer.features.front().weights.size();
  rows_.resize(static_cast<Eigen::Index>(layer.features.size()), dim);
  for (std::size_t k = 0; k < layer.features.size(); ++k)
    rows_.row(static_cast<Eigen::Index>(k)) = range_normalize(layer.features[k].weights);
}

NormalizedBank::Match NormalizedBank::nearest(
    const Eigen::Ref<const Eigen::RowVectorXd>& normalized_patch) const {
  if (normalized_patch.size() != rows_.cols())
    throw DimensionError("patch length does not match the layer's filter size");
  Match best{std::numeric_limits<double>::infinity(), 0};
  for (Eigen::Index k = 0; k < rows_.rows(); ++k) {
    const double d = (rows_.row(k) - normalized_patch).cwiseAbs().sum();
    if (d < best.distance) best = {d, static_cast<std::size_t>(k)};
  }
  best.distance /= static_cast<double>(rows_.cols());
  return best;
}

NormalizedBank::Match nearest_distance(const Eigen::RowVectorXd& patch, const Layer& layer) {
  return NormalizedBank(layer).nearest(range_normalize(patch));
}

double ImageScores::max_distance() const {
  double m = 0.0;
  for (const LayerScores& l : layers)
    if (l.distance.size() > 0) m = std::max(m, l.distance.maxCoeff());
  return m;
}

GrayImage preprocess_for(const Model& model, const GrayImage& raw) {
  return preprocess(raw, model.preprocessing.equalize);
}

ImageScores score_image(const Model& model, const GrayImage& raw) {
  if (model.layers.empty()) throw ModelError("model has no layers");
  const GrayImage img = preprocess_for(model, raw);
  for (const Layer& layer : model.layers)
    if (layer.filter_size > img.rows() || layer.filter_size > img.cols())
      throw DimensionError("model filter size exceeds the image dimensions");

  const std::vector<GrayImage> inputs = layer_inputs(model, img);
  ImageScores scores;
  scores.height = static_cast<int>(img.rows());
  scores.width = static_cast<int>(img.cols());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    const GrayImage& input = inputs[l];
    const int p = layer.filter_size;
    if (p > input.rows() || p > input.cols())
      throw DimensionError("layer input smaller than its filter size");
    const NormalizedBank bank(layer);

    LayerScores ls;
    ls.filter_size = p;
    ls.scale = model.scale_of(l);
    const int ny = origins_along(static_cast<int>(input.rows()), p, model.patch_stride);
    const int nx = origins_along(static_cast<int>(input.cols()), p, model.patch_stride);
    ls.origins.reserve(static_cast<std::size_t>(nx) * ny);
    ls.distance.resize(static_cast<Eigen::Index>(nx) * ny);
    Eigen::Index k = 0;
    for (int r = 0; r < ny; ++r) {
      for (int c = 0; c < nx; ++c, ++k) {
        const PatchOrigin o{r * model.patch_stride, c * model.patch_stride};
        ls.origins.push_back(o);
        ls.distance[k] = bank.nearest(range_normalize(window(input, o.row, o.col, p))).distance;
      }
    }
    scores.layers.push_back(std::move(ls));
  }
  return scores;
}

double calibrate_threshold(Model& model, const GrayImage& raw_train) {
  const double t = score_image(model, raw_train).max_distance();
  model.anomaly_threshold = t;
  return t;
}

ProbabilityMap accumulate_map(const ImageScores& scores, double threshold,
                              std::optional<double> sigma) {
  GrayImage mass = GrayImage::Zero(scores.height, scores.width);
  GrayImage weight = GrayImage::Zero(scores.height, scores.width);

  for (const LayerScores& ls : scores.layers) {
    const int p = ls.filter_size;
    const int s = ls.scale;
    const Kernel g = gaussian_kernel(p, sigma.value_or(p / 6.0));
    // Deeper layers: each layer-input pixel covers an s x s block.
    Kernel footprint = g;
    if (s > 1) {
      footprint.resize(p * s, p * s);
      for (int i = 0; i < p * s; ++i)
        for (int j = 0; j < p * s; ++j) footprint(i, j) = g(i / s, j / s);
    }
    const int span = p * s;
    for (std::size_t k = 0; k < ls.origins.size(); ++k) {
      const int r0 = ls.origins[k].row * s;
      const int c0 = ls.origins[k].col * s;
      const int h = std::min(span, scores.height - r0);
      const int w = std::min(span, scores.width - c0);
      if (h <= 0 || w <= 0) continue;
      const auto fp = footprint.topLeftCorner(h, w);
      weight.block(r0, c0, h, w) += fp;
      const double d = ls.distance[static_cast<Eigen::Index>(k)];
      if (d > threshold) mass.block(r0, c0, h, w) += d * fp;
    }
  }

  ProbabilityMap map = GrayImage::Zero(scores.height, scores.width);
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    const double w = weight.data()[i];
    if (w > 0.0) map.data()[i] = std::clamp(mass.data()[i] / w, 0.0, 1.0);
  }
  return map;
}

double resolve_threshold(const Model& model, const MapOptions& opts) {
  if (opts.threshold) return *opts.threshold;
  if (!model.anomaly_threshold)
    throw ModelError("model has no calibrated anomaly threshold; calibrate or pass one explicitly");
  return *model.anomaly_threshold;
}

ProbabilityMap defect_probability_map(const Model& model, const GrayImage& raw,
                                      const MapOptions& opts) {
  const double threshold = resolve_threshold(model, opts);
  return accumulate_map(score_image(model, raw), threshold, opts.sigma);
}

}  // namespace motif
