#include "motif/feature_bank.hpp"

#include <numeric>

namespace motif {

int Model::scale_of(std::size_t layer) const {
  int scale = 1;
  for (std::size_t l = 0; l <= layer && l < layers.size(); ++l) scale *= layers[l].stride;
  return scale;
}

std::size_t Model::feature_count() const {
  return std::accumulate(layers.begin(), layers.end(), std::size_t{0},
                         [](std::size_t n, const Layer& l) { return n + l.features.size(); });
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers)
    n += l.features.size() * static_cast<std::size_t>(l.filter_size) * l.filter_size;
  return n;
}

Layer train_layer(const PatchSet& patches, double threshold, TrainingTrace* trace) {
  if (patches.empty()) throw TrainingError("cannot train a layer on an empty patch set");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ParameterError("similarity threshold must lie in (0, 1)");

  const Eigen::Index dim = patches.values.cols();
  Layer layer;
  layer.filter_size = patches.size;

  // Unit-norm copies of the features, one per row, grown geometrically.
  PatchMatrix unit(64, dim);
  Eigen::Index count = 0;

  auto normalized = [&](const Eigen::RowVectorXd& v) -> Eigen::RowVectorXd {
    const double n = v.norm();
    if (!(n > 0.0)) throw DegenerateInputError("zero-norm patch reached training");
    return v / n;
  };
  auto add_feature = [&](const Eigen::RowVectorXd& v) {
    if (count == unit.rows()) unit.conservativeResize(unit.rows() * 2, Eigen::NoChange);
    unit.row(count++) = normalized(v);
    layer.features.push_back({v, 1});
  };

  if (trace) {
    trace->steps.assign(patches.count(), {});
    trace->visits = 0;
  }

  Eigen::VectorXd scores;
  for (std::size_t i = 0; i < patches.count(); ++i) {
    const Eigen::RowVectorXd p = patches.patch(i);
    if (trace) ++trace->visits;
    if (count == 0) {
      add_feature(p);
      if (trace) trace->steps[i] = {0, true, 1.0};
      continue;
    }

    const Eigen::RowVectorXd pu = normalized(p);
    scores.noalias() = unit.topRows(count) * pu.transpose();
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < count; ++j)
      if (scores[j] > scores[best]) best = j;
    const double s = std::max(0.0, scores[best]);

    if (s < threshold) {
      add_feature(p);
      if (trace) trace->steps[i] = {static_cast<std::size_t>(count - 1), true, s};
    } else {
      Feature& f = layer.features[static_cast<std::size_t>(best)];
      f.weights += (p - f.weights) / static_cast<double>(f.supporters + 1);
      f.supporters += 1;
      unit.row(best) = normalized(f.weights);
      if (trace) trace->steps[i] = {static_cast<std::size_t>(best), false, s};
    }
  }
  return layer;
}

GrayImage next_layer_input(const Layer& layer, const GrayImage& input, int stride,
                           Aggregation aggregation) {
  if (layer.features.empty()) throw ModelError("layer has no features");
  const int p = layer.filter_size;
  GrayImage merged;
  for (std::size_t k = 0; k < layer.features.size(); ++k) {
    const Kernel kernel = Eigen::Map<const Kernel>(layer.features[k].weights.data(), p, p);
    GrayImage response = cross_correlate(input, kernel);
    if (k == 0)
      merged = std::move(response);
    else if (aggregation == Aggregation::Max)
      merged = merged.max(response);
    else
      merged += response;
  }
  if (aggregation == Aggregation::Mean) merged /= static_cast<double>(layer.features.size());
  return zscore(downsample(merged, stride));
}

std::vector<GrayImage> layer_inputs(const Model& model, const GrayImage& preprocessed) {
  std::vector<GrayImage> inputs;
  inputs.reserve(model.layers.size());
  inputs.push_back(preprocessed);
  for (std::size_t l = 1; l < model.layers.size(); ++l)
    inputs.push_back(next_layer_input(model.layers[l - 1], inputs.back(), model.layers[l].stride,
                                      model.aggregation));
  return inputs;
}

Model build_model(const GrayImage& raw, const TrainingConfig& cfg, BuildReport* report) {
  if (cfg.num_layers < 1) throw ParameterError("num_layers must be >= 1");
  if (cfg.layer_stride < 1) throw ParameterError("layer stride must be >= 1");
  if (cfg.filter_size != 0 && (cfg.filter_size < 1 || cfg.filter_size % 2 == 0))
    throw ParameterError("filter size must be odd");

  const GrayImage img = preprocess(raw, cfg.equalize);

  BuildReport local;
  BuildReport& rep = report ? *report : local;
  int p = cfg.filter_size;
  if (p == 0) {
    rep.period = estimate_period(img, cfg.min_prominence);
    p = derive_filter_size(*rep.period);
  }
  rep.filter_size = p;

  Model model;
  model.fabric_id = cfg.fabric_id;
  model.preprocessing = {cfg.equalize, cfg.seed, cfg.contrast_threshold};
  model.similarity_threshold = cfg.similarity_threshold;
  model.patch_stride = cfg.patch_stride;
  model.aggregation = cfg.aggregation;

  GrayImage input = img;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const int stride = l == 0 ? 1 : cfg.layer_stride;
    if (l > 0) input = next_layer_input(model.layers.back(), input, stride, cfg.aggregation);

    const PatchSet candidates = extract_patches(input, p, cfg.patch_stride);
    const PatchSet useful = shuffle_patches(
        filter_by_variance(candidates, cfg.contrast_threshold), cfg.seed + static_cast<std::uint64_t>(l));
    rep.candidate_patches.push_back(candidates.count());

    TrainingTrace trace;
    Layer layer = train_layer(useful, cfg.similarity_threshold, &trace);
    layer.stride = stride;
    rep.trained_patches.push_back(trace.visits);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

std::string to_string(Aggregation a) { return a == Aggregation::Max ? "max" : "mean"; }

Aggregation parse_aggregation(const std::string& s) {
  if (s == "max") return Aggregation::Max;
  if (s == "mean") return Aggregation::Mean;
  throw ParameterError("unknown aggregation '" + s + "' (expected max or mean)");
}

}  // namespace motif
