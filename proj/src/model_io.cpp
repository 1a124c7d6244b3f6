#include <fstream>
#include <sstream>

#include <json.hpp>

#include "motif/feature_bank.hpp"

namespace motif {

using nlohmann::json;

void save_model(const Model& m, const std::filesystem::path& path) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["fabric_id"] = m.fabric_id;
  doc["preprocessing"] = {{"equalize", m.preprocessing.equalize},
                          {"seed", m.preprocessing.seed},
                          {"contrast_threshold", m.preprocessing.contrast_threshold}};
  doc["similarity_threshold"] = m.similarity_threshold;
  doc["anomaly_threshold"] = m.anomaly_threshold ? json(*m.anomaly_threshold) : json(nullptr);
  doc["patch_stride"] = m.patch_stride;
  doc["aggregation"] = to_string(m.aggregation);

  json layers = json::array();
  for (const Layer& layer : m.layers) {
    json features = json::array();
    for (const Feature& f : layer.features) {
      features.push_back({{"supporters", f.supporters},
                          {"weights", std::vector<double>(f.weights.data(),
                                                          f.weights.data() + f.weights.size())}});
    }
    layers.push_back(
        {{"filter_size", layer.filter_size}, {"stride", layer.stride}, {"features", features}});
  }
  doc["layers"] = std::move(layers);

  // Write-then-rename so a reader never sees a half-written model.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError(tmp.string(), "cannot open file for writing");
    // nlohmann emits the shortest decimal that round-trips each double.
    out << doc.dump(1) << '\n';
    if (!out) throw IoError(tmp.string(), "write failed");
  }
  std::filesystem::rename(tmp, path);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open model file");
  std::stringstream buf;
  buf << in.rdbuf();

  try {
    const json doc = json::parse(buf.str());
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw ModelFormatError(path.string() + ": unsupported model format_version " +
                             std::to_string(version));

    Model m;
    m.fabric_id = doc.at("fabric_id").get<std::string>();
    const json& pre = doc.at("preprocessing");
    m.preprocessing.equalize = pre.at("equalize").get<bool>();
    m.preprocessing.seed = pre.at("seed").get<std::uint64_t>();
    m.preprocessing.contrast_threshold = pre.at("contrast_threshold").get<double>();
    m.similarity_threshold = doc.at("similarity_threshold").get<double>();
    if (!doc.at("anomaly_threshold").is_null())
      m.anomaly_threshold = doc.at("anomaly_threshold").get<double>();
    m.patch_stride = doc.value("patch_stride", 1);
    m.aggregation = parse_aggregation(doc.value("aggregation", std::string("max")));

    for (const json& jl : doc.at("layers")) {
      Layer layer;
      layer.filter_size = jl.at("filter_size").get<int>();
      layer.stride = jl.at("stride").get<int>();
      const std::size_t dim = static_cast<std::size_t>(layer.filter_size) * layer.filter_size;
      for (const json& jf : jl.at("features")) {
        const auto w = jf.at("weights").get<std::vector<double>>();
        if (w.size() != dim)
          throw ModelFormatError(path.string() + ": feature length does not match filter_size");
        Feature f;
        f.supporters = jf.at("supporters").get<long>();
        f.weights = Eigen::Map<const Eigen::RowVectorXd>(w.data(), static_cast<Eigen::Index>(dim));
        layer.features.push_back(std::move(f));
      }
      m.layers.push_back(std::move(layer));
    }
    if (m.layers.empty()) throw ModelFormatError(path.string() + ": model has no layers");
    return m;
  } catch (const json::exception& e) {
    throw ModelFormatError(path.string() + ": malformed model file (" + e.what() + ")");
  } catch (const ParameterError& e) {
    throw ModelFormatError(path.string() + ": " + e.what());
  }
}

}  // namespace motif
