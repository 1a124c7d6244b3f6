#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motif/anomaly.hpp"
#include "motif/segmentation.hpp"

namespace motif {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Pixel-level rates. A rate whose denominator is zero is left empty
/// (reported as N/A).
struct MetricsReport {
  std::optional<double> tpr;  // recall
  std::optional<double> tnr;
  std::optional<double> fnr;
  std::optional<double> fpr;
  std::optional<double> ppv;  // precision
  std::optional<double> acc;  // detection success rate
  std::optional<double> f1;
};

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth);
MetricsReport metrics(const ConfusionCounts& c);

/// "0.8523" or "NA".
std::string format_metric(const std::optional<double>& v, int precision = 4);

struct LabeledImage {
  std::string id;
  GrayImage image;  // raw, 0..255
  BinaryMask truth;
};

struct SweepRow {
  double threshold = 0.0;
  ConfusionCounts counts;
  MetricsReport report;
};

/// Default binarization used by sweeps: the map at or above one half of an
/// 8-bit quantization step.
inline constexpr double kSweepCutoff = 0.5 / 255.0;

/// Parses "start:stop:step" (inclusive, tolerant to rounding) or a comma list.
std::vector<double> parse_thresholds(const std::string& text);

/// For each anomaly threshold, detects and segments every image and pools
/// the confusion counts. Patch distances are computed once per image.
std::vector<SweepRow> sweep_curves(const Model& model, const std::vector<LabeledImage>& images,
                                   const std::vector<double>& thresholds,
                                   const SegmentOptions& seg = {.fixed_cutoff = kSweepCutoff},
                                   std::optional<double> sigma = std::nullopt);

inline constexpr const char* kCurveCsvHeader = "threshold,tp,tn,fp,fn,tpr,fpr,ppv,f1";
void write_curve_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic fabrics
// ---------------------------------------------------------------------------

enum class DefectKind { None, ThinBar, ThickBar, Hole, Block, BrokenEnd };

/// The five defect kinds, in a fixed order.
inline constexpr DefectKind kDefectKinds[] = {DefectKind::BrokenEnd, DefectKind::Hole,
                                              DefectKind::Block, DefectKind::ThickBar,
                                              DefectKind::ThinBar};

std::string to_string(DefectKind k);
DefectKind parse_defect_kind(const std::string& s);

struct SynthConfig {
  int period = 16;
  int size = 256;
  DefectKind defect = DefectKind::None;
  double noise = 0.01;            // pixel noise sigma as a fraction of the 0..255 range
  std::uint64_t fabric_seed = 1;  // selects the repeating tile
  std::uint64_t seed = 1;         // selects noise and defect placement
  std::optional<int> defect_position;  // leading row/column of a stripe defect
  std::optional<int> defect_width;     // stripe width override
};

struct SynthSample {
  GrayImage image;
  BinaryMask truth;
};

/// Tiles a seeded random motif tile over a size x size canvas, injects one
/// defect and returns the exact injected-region mask. Bars are vertical
/// stripes with shifted intensity (thin: one period wide, thick: three);
/// broken ends are horizontal flat stripes; holes are dark disks; blocks
/// replace the texture with uncorrelated noise.
SynthSample synth_fabric(const SynthConfig& cfg);

}  // namespace motif
