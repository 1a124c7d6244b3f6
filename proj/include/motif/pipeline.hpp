#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motif/evaluation.hpp"

namespace motif {

/// Every knob of the train -> calibrate -> detect -> segment -> evaluate
/// chain. Empty optionals mean "auto".
struct PipelineConfig {
  std::optional<int> filter_size;
  int layer_stride = 1;
  int patch_stride = 1;
  int num_layers = 1;
  double similarity_threshold = 0.7;
  std::optional<double> anomaly_threshold;
  double contrast_threshold = 0.0;
  std::uint64_t seed = 42;
  std::optional<double> sigma;
  int levels = 256;
  int neighborhood = 3;
  int structuring_element = 3;
  bool equalize = true;
  Aggregation aggregation = Aggregation::Max;
  double min_prominence = kDefaultMinProminence;
  std::string fabric_id;

  /// Sets one field from its key=value spelling (e.g. "similarity_threshold",
  /// "filter_size" accepting "auto"). Throws ParameterError on unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Checks every field against its operation's preconditions.
  void validate() const;

  TrainingConfig training() const;
  SegmentOptions segmentation() const;
};

/// Applies a flat key=value file ('#' comments, blank lines ignored).
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

struct DatasetEntry {
  std::string id;           // file stem, e.g. "hole_3"
  std::string defect_type;  // stem up to the last '_', e.g. "hole"
  std::filesystem::path image;
  std::optional<std::filesystem::path> truth;
};

struct Dataset {
  std::string fabric;
  std::filesystem::path reference;
  std::vector<DatasetEntry> tests;
};

/// Reads `<root>/{reference.png, test/<type>_<i>.png, truth/<type>_<i>.png}`.
/// Test images without a truth file are treated as defect-free.
Dataset scan_dataset(const std::filesystem::path& fabric_dir);

/// Defect type encoded in an image id ("thick_bar_2" -> "thick_bar").
std::string defect_type_of(const std::string& id);

std::vector<LabeledImage> load_labeled(const Dataset& ds);

struct ImageResult {
  std::string id;
  std::string defect_type;
  ProbabilityMap map;
  BinaryMask mask;
  ConfusionCounts counts;
  MetricsReport metrics;
  bool truth_defective = false;
  bool flagged = false;           // any pixel in the final mask
  bool hit = false;               // flagged pixel overlapping the truth
  std::optional<std::string> error;
};

struct SummaryRow {
  std::string label;
  std::size_t images = 0;
  std::size_t flagged = 0;
  std::size_t failed = 0;
  ConfusionCounts counts;
  MetricsReport metrics;
};

struct PipelineResult {
  Model model;
  BuildReport build;
  double training_seconds = 0.0;
  std::vector<ImageResult> images;
  std::vector<SummaryRow> by_type;  // one per defect type, in first-seen order
  SummaryRow overall;
};

/// Trains on `train_raw`, calibrates (unless a threshold is configured),
/// then processes every test image. A failing image is recorded and skipped.
PipelineResult run_pipeline(const GrayImage& train_raw, const std::vector<LabeledImage>& tests,
                            const PipelineConfig& cfg);

/// Detection + segmentation + scoring of one image against a trained model.
ImageResult process_image(const Model& model, const LabeledImage& li, const PipelineConfig& cfg);

/// Writes maps/, masks/, images.csv, summary.csv and model.json under `dir`.
void write_pipeline_outputs(const PipelineResult& result, const std::filesystem::path& dir);

/// Table-shaped text report (defect type, DSR, recall, precision, F1).
std::string format_summary(const PipelineResult& result);

}  // namespace motif
