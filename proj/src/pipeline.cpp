#include "motif/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace motif {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    T out{};
    if constexpr (std::is_same_v<T, double>)
      out = std::stod(value, &used);
    else if constexpr (std::is_same_v<T, std::uint64_t>)
      out = std::stoull(value, &used);
    else
      out = static_cast<T>(std::stol(value, &used));
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw ParameterError("invalid value '" + value + "' for " + key);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ParameterError("invalid boolean '" + value + "' for " + key);
}

}  // namespace

void PipelineConfig::set(const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw_value);

  if (key == "filter_size") {
    filter_size = value == "auto" ? std::nullopt : std::optional<int>(parse_number<int>(key, value));
  } else if (key == "stride" || key == "layer_stride") {
    layer_stride = parse_number<int>(key, value);
  } else if (key == "patch_stride") {
    patch_stride = parse_number<int>(key, value);
  } else if (key == "layers" || key == "num_layers") {
    num_layers = parse_number<int>(key, value);
  } else if (key == "threshold" || key == "similarity_threshold") {
    similarity_threshold = parse_number<double>(key, value);
  } else if (key == "anomaly_threshold") {
    anomaly_threshold =
        value == "auto" ? std::nullopt : std::optional<double>(parse_number<double>(key, value));
  } else if (key == "contrast_threshold") {
    contrast_threshold = parse_number<double>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "sigma") {
    sigma = value == "auto" ? std::nullopt : std::optional<double>(parse_number<double>(key, value));
  } else if (key == "levels") {
    levels = parse_number<int>(key, value);
  } else if (key == "n" || key == "neighborhood") {
    neighborhood = parse_number<int>(key, value);
  } else if (key == "se" || key == "structuring_element") {
    structuring_element = parse_number<int>(key, value);
  } else if (key == "equalize") {
    equalize = parse_bool(key, value);
  } else if (key == "aggregation") {
    aggregation = parse_aggregation(value);
  } else if (key == "min_prominence") {
    min_prominence = parse_number<double>(key, value);
  } else if (key == "fabric_id") {
    fabric_id = value;
  } else {
    throw ParameterError("unknown configuration key '" + raw_key + "'");
  }
}

void PipelineConfig::validate() const {
  if (filter_size && (*filter_size < 1 || *filter_size % 2 == 0))
    throw ParameterError("filter_size must be a positive odd integer or auto");
  if (layer_stride < 1) throw ParameterError("stride must be >= 1");
  if (patch_stride < 1) throw ParameterError("patch_stride must be >= 1");
  if (num_layers < 1) throw ParameterError("layers must be >= 1");
  if (!(similarity_threshold > 0.0 && similarity_threshold < 1.0))
    throw ParameterError("similarity threshold must lie in (0, 1)");
  if (anomaly_threshold && (*anomaly_threshold < 0.0 || *anomaly_threshold > 1.0))
    throw ParameterError("anomaly threshold must lie in [0, 1]");
  if (contrast_threshold < 0.0) throw ParameterError("contrast_threshold must be >= 0");
  if (sigma && !(*sigma > 0.0)) throw ParameterError("sigma must be > 0");
  if (levels < 2 || levels > 256) throw ParameterError("levels must lie in [2, 256]");
  if (neighborhood < 1 || neighborhood % 2 == 0) throw ParameterError("n must be odd");
  if (structuring_element < 1 || structuring_element % 2 == 0)
    throw ParameterError("se must be odd");
  if (min_prominence < 0.0) throw ParameterError("min_prominence must be >= 0");
}

TrainingConfig PipelineConfig::training() const {
  TrainingConfig t;
  t.filter_size = filter_size.value_or(0);
  t.num_layers = num_layers;
  t.layer_stride = layer_stride;
  t.patch_stride = patch_stride;
  t.similarity_threshold = similarity_threshold;
  t.seed = seed;
  t.contrast_threshold = contrast_threshold;
  t.equalize = equalize;
  t.aggregation = aggregation;
  t.min_prominence = min_prominence;
  t.fabric_id = fabric_id;
  return t;
}

SegmentOptions PipelineConfig::segmentation() const {
  SegmentOptions s;
  s.levels = levels;
  s.neighborhood = neighborhood;
  s.structuring_element = structuring_element;
  return s;
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config file");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    cfg.set(line.substr(0, eq), line.substr(eq + 1));
  }
}

std::string defect_type_of(const std::string& id) {
  const auto us = id.find_last_of('_');
  if (us == std::string::npos || us == 0) return id;
  const std::string tail = id.substr(us + 1);
  if (tail.empty() || !std::all_of(tail.begin(), tail.end(), ::isdigit)) return id;
  return id.substr(0, us);
}

Dataset scan_dataset(const std::filesystem::path& fabric_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(fabric_dir)) throw IoError(fabric_dir.string(), "not a directory");
  Dataset ds;
  ds.fabric = fabric_dir.filename().string();
  if (ds.fabric.empty()) ds.fabric = fabric_dir.parent_path().filename().string();

  for (const char* name : {"reference.png", "reference.pgm"}) {
    if (fs::exists(fabric_dir / name)) {
      ds.reference = fabric_dir / name;
      break;
    }
  }

  const fs::path test_dir = fabric_dir / "test";
  const fs::path truth_dir = fabric_dir / "truth";
  if (fs::is_directory(test_dir)) {
    for (const auto& entry : fs::directory_iterator(test_dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string ext = entry.path().extension().string();
      if (ext != ".png" && ext != ".pgm") continue;
      DatasetEntry e;
      e.id = entry.path().stem().string();
      e.defect_type = defect_type_of(e.id);
      e.image = entry.path();
      for (const char* te : {".png", ".pgm"}) {
        const fs::path t = truth_dir / (e.id + te);
        if (fs::exists(t)) {
          e.truth = t;
          break;
        }
      }
      ds.tests.push_back(std::move(e));
    }
  }
  std::sort(ds.tests.begin(), ds.tests.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.id < b.id; });
  return ds;
}

std::vector<LabeledImage> load_labeled(const Dataset& ds) {
  std::vector<LabeledImage> out;
  out.reserve(ds.tests.size());
  for (const DatasetEntry& e : ds.tests) {
    LabeledImage li;
    li.id = e.id;
    li.image = load_gray(e.image);
    li.truth = e.truth ? load_mask(*e.truth) : BinaryMask::Zero(li.image.rows(), li.image.cols());
    out.push_back(std::move(li));
  }
  return out;
}

ImageResult process_image(const Model& model, const LabeledImage& li, const PipelineConfig& cfg) {
  ImageResult r;
  r.id = li.id;
  r.defect_type = defect_type_of(li.id);
  r.truth_defective = (li.truth != 0).any();
  MapOptions opts;
  opts.threshold = cfg.anomaly_threshold;
  opts.sigma = cfg.sigma;
  r.map = defect_probability_map(model, li.image, opts);
  r.mask = segment(r.map, cfg.segmentation()).mask;
  r.counts = confusion(r.mask, li.truth);
  r.metrics = metrics(r.counts);
  r.flagged = (r.mask != 0).any();
  r.hit = r.counts.tp > 0;
  return r;
}

namespace {

void add_to(SummaryRow& row, const ImageResult& r) {
  ++row.images;
  if (r.error) {
    ++row.failed;
    return;
  }
  if (r.flagged) ++row.flagged;
  row.counts += r.counts;
}

}  // namespace

PipelineResult run_pipeline(const GrayImage& train_raw, const std::vector<LabeledImage>& tests,
                            const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult res;

  const auto t0 = std::chrono::steady_clock::now();
  res.model = build_model(train_raw, cfg.training(), &res.build);
  res.training_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (cfg.anomaly_threshold)
    res.model.anomaly_threshold = *cfg.anomaly_threshold;
  else
    calibrate_threshold(res.model, train_raw);

  std::map<std::string, std::size_t> type_index;
  res.overall.label = "overall";
  for (const LabeledImage& li : tests) {
    ImageResult r;
    try {
      r = process_image(res.model, li, cfg);
    } catch (const Error& e) {
      r.id = li.id;
      r.defect_type = defect_type_of(li.id);
      r.error = e.what();
    }
    auto [it, inserted] = type_index.emplace(r.defect_type, res.by_type.size());
    if (inserted) {
      res.by_type.emplace_back();
      res.by_type.back().label = r.defect_type;
    }
    add_to(res.by_type[it->second], r);
    add_to(res.overall, r);
    res.images.push_back(std::move(r));
  }
  for (SummaryRow& row : res.by_type) row.metrics = metrics(row.counts);
  res.overall.metrics = metrics(res.overall.counts);
  return res;
}

namespace {

template <typename Writer>
void write_atomically(const std::filesystem::path& path, Writer&& write) {
  const std::filesystem::path tmp =
      path.parent_path() / (path.stem().string() + ".tmp" + path.extension().string());
  write(tmp);
  std::filesystem::rename(tmp, path);
}

std::string summary_csv_row(const SummaryRow& r) {
  std::ostringstream os;
  os << r.label << ',' << r.images << ',' << r.flagged << ',' << r.failed << ',' << r.counts.tp
     << ',' << r.counts.tn << ',' << r.counts.fp << ',' << r.counts.fn << ','
     << format_metric(r.metrics.acc) << ',' << format_metric(r.metrics.tpr) << ','
     << format_metric(r.metrics.ppv) << ',' << format_metric(r.metrics.f1) << ','
     << format_metric(r.metrics.fpr);
  return os.str();
}

}  // namespace

void write_pipeline_outputs(const PipelineResult& result, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "maps");
  fs::create_directories(dir / "masks");

  std::ofstream images(dir / "images.csv");
  if (!images) throw IoError((dir / "images.csv").string(), "cannot open file for writing");
  images << "id,defect_type,flagged,tp,tn,fp,fn,dsr,recall,precision,f1,error\n";
  for (const ImageResult& r : result.images) {
    if (!r.error) {
      write_atomically(dir / "maps" / (r.id + ".png"),
                       [&](const fs::path& p) { save_probability_png(r.map, p); });
      write_atomically(dir / "masks" / (r.id + ".png"),
                       [&](const fs::path& p) { save_mask(r.mask, p); });
    }
    images << r.id << ',' << r.defect_type << ',' << (r.flagged ? 1 : 0) << ',' << r.counts.tp
           << ',' << r.counts.tn << ',' << r.counts.fp << ',' << r.counts.fn << ','
           << format_metric(r.metrics.acc) << ',' << format_metric(r.metrics.tpr) << ','
           << format_metric(r.metrics.ppv) << ',' << format_metric(r.metrics.f1) << ','
           << (r.error ? "\"" + *r.error + "\"" : "") << '\n';
  }

  std::ofstream summary(dir / "summary.csv");
  if (!summary) throw IoError((dir / "summary.csv").string(), "cannot open file for writing");
  summary << "defect_type,images,flagged,failed,tp,tn,fp,fn,dsr,recall,precision,f1,fpr\n";
  for (const SummaryRow& row : result.by_type) summary << summary_csv_row(row) << '\n';
  summary << summary_csv_row(result.overall) << '\n';

  write_atomically(dir / "model.json", [&](const fs::path& p) { save_model(result.model, p); });
}

std::string format_summary(const PipelineResult& result) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %6s %8s %6s %8s %9s %6s\n", "defect type", "images",
                "flagged", "DSR", "recall", "precision", "F1");
  os << line;
  auto emit = [&](const SummaryRow& r) {
    std::snprintf(line, sizeof line, "%-16s %6zu %8zu %6s %8s %9s %6s%s\n", r.label.c_str(),
                  r.images, r.flagged, format_metric(r.metrics.acc, 2).c_str(),
                  format_metric(r.metrics.tpr, 2).c_str(), format_metric(r.metrics.ppv, 2).c_str(),
                  format_metric(r.metrics.f1, 2).c_str(),
                  r.failed ? (" (" + std::to_string(r.failed) + " failed)").c_str() : "");
    os << line;
  };
  for (const SummaryRow& r : result.by_type) emit(r);
  emit(result.overall);
  return os.str();
}

}  // namespace motif
