// motif: command-line front end for the motif defect detector.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "motif/evaluation.hpp"
#include "motif/periodicity.hpp"
#include "motif/pipeline.hpp"

namespace fs = std::filesystem;
using namespace motif;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

/// Flags shared by train and pipeline. Each is optional so that only flags
/// given on the command line override the config file.
struct TrainFlags {
  std::optional<std::string> config;
  std::optional<double> threshold;
  std::optional<int> layers;
  std::optional<int> stride;
  std::optional<int> patch_stride;
  std::optional<std::string> filter_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> contrast_threshold;
  std::optional<std::string> aggregation;
  std::optional<double> min_prominence;
  bool no_equalize = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Flat key=value configuration file");
    app->add_option("--threshold", threshold, "Similarity threshold in (0,1) [0.7]");
    app->add_option("--layers", layers, "Number of layers [1]");
    app->add_option("--stride", stride, "Downsampling stride between layers [1]");
    app->add_option("--patch-stride", patch_stride, "Patch extraction step [1]");
    app->add_option("--filter-size", filter_size, "auto or an odd window size [auto]");
    app->add_option("--seed", seed, "Shuffle seed [42]");
    app->add_option("--contrast-threshold", contrast_threshold, "Patch variance cutoff [0]");
    app->add_option("--aggregation", aggregation, "Deeper-layer response merge: max|mean [max]");
    app->add_option("--min-prominence", min_prominence, "Autocorrelation peak prominence [0.05]");
    app->add_flag("--no-equalize", no_equalize, "Skip histogram equalization");
  }

  void apply(PipelineConfig& cfg) const {
    if (config) apply_config_file(cfg, *config);
    if (threshold) cfg.similarity_threshold = *threshold;
    if (layers) cfg.num_layers = *layers;
    if (stride) cfg.layer_stride = *stride;
    if (patch_stride) cfg.patch_stride = *patch_stride;
    if (filter_size) cfg.set("filter_size", *filter_size);
    if (seed) cfg.seed = *seed;
    if (contrast_threshold) cfg.contrast_threshold = *contrast_threshold;
    if (aggregation) cfg.aggregation = parse_aggregation(*aggregation);
    if (min_prominence) cfg.min_prominence = *min_prominence;
    if (no_equalize) cfg.equalize = false;
  }
};

struct SegmentFlags {
  std::optional<int> levels;
  std::optional<int> n;
  std::optional<int> se;

  void attach(CLI::App* app) {
    app->add_option("--levels", levels, "Quantization levels for 2D entropy [256]");
    app->add_option("--n", n, "Neighborhood size for the local mean [3]");
    app->add_option("--se", se, "Opening structuring element size [3]");
  }
  void apply(PipelineConfig& cfg) const {
    if (levels) cfg.levels = *levels;
    if (n) cfg.neighborhood = *n;
    if (se) cfg.structuring_element = *se;
  }
};

void write_series_csv(const fs::path& path, const Eigen::VectorXd& profile,
                      const Eigen::VectorXd& ac, const std::vector<int>& peaks) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open file for writing");
  out << "index,projection,autocorrelation,peak\n";
  for (Eigen::Index i = 0; i < profile.size(); ++i) {
    const bool is_peak = std::find(peaks.begin(), peaks.end(), static_cast<int>(i)) != peaks.end();
    out << i << ',' << profile[i] << ',' << ac[i] << ',' << (is_peak ? 1 : 0) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised motif-based defect detection for patterned fabrics"};
  app.require_subcommand(1);

  // period
  auto* period_cmd = app.add_subcommand("period", "Estimate the texture period and filter size");
  std::string period_input;
  double period_prom = kDefaultMinProminence;
  std::optional<std::string> period_plot;
  bool period_no_equalize = false;
  period_cmd->add_option("--input", period_input, "Defect-free image")->required();
  period_cmd->add_option("--min-prominence", period_prom, "Minimum peak prominence");
  period_cmd->add_option("--plot", period_plot, "Directory for projection/autocorrelation CSVs");
  period_cmd->add_flag("--no-equalize", period_no_equalize, "Skip histogram equalization");

  // train
  auto* train_cmd = app.add_subcommand("train", "Learn a feature bank from a defect-free image");
  std::string train_input, train_out;
  std::string train_fabric;
  TrainFlags train_flags;
  train_cmd->add_option("--input", train_input, "Defect-free reference image")->required();
  train_cmd->add_option("--out", train_out, "Model file to write")->required();
  train_cmd->add_option("--fabric-id", train_fabric, "Label stored in the model");
  train_flags.attach(train_cmd);

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "Compute a defect probability map");
  std::string detect_model, detect_input, detect_map;
  std::optional<double> detect_threshold, detect_sigma;
  std::optional<std::string> detect_mask;
  SegmentFlags detect_seg;
  detect_cmd->add_option("--model", detect_model, "Trained model")->required();
  detect_cmd->add_option("--input", detect_input, "Test image")->required();
  detect_cmd->add_option("--map", detect_map, "16-bit PNG probability map to write")->required();
  detect_cmd->add_option("--anomaly-threshold", detect_threshold, "Override calibrated threshold");
  detect_cmd->add_option("--sigma", detect_sigma, "Gaussian sigma (default filter_size/6)");
  detect_cmd->add_option("--mask", detect_mask, "Also segment and write the binary mask");
  detect_seg.attach(detect_cmd);

  // segment
  auto* segment_cmd = app.add_subcommand("segment", "Binarize a probability map");
  std::string segment_map, segment_out;
  SegmentFlags segment_seg;
  segment_cmd->add_option("--map", segment_map, "Probability map PNG")->required();
  segment_cmd->add_option("--out", segment_out, "Mask PNG to write")->required();
  segment_seg.attach(segment_cmd);

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a mask against ground truth");
  std::string eval_pred, eval_truth;
  std::optional<std::string> eval_out;
  evaluate_cmd->add_option("--pred", eval_pred, "Predicted mask")->required();
  evaluate_cmd->add_option("--truth", eval_truth, "Ground-truth mask")->required();
  evaluate_cmd->add_option("--out", eval_out, "CSV file to write");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "ROC / precision-recall sweep over thresholds");
  std::string sweep_model, sweep_dataset, sweep_out, sweep_thresholds = "0:1:0.1";
  std::string sweep_segmentation = "fixed";
  std::optional<double> sweep_sigma;
  SegmentFlags sweep_seg;
  sweep_cmd->add_option("--model", sweep_model, "Trained model")->required();
  sweep_cmd->add_option("--dataset", sweep_dataset, "Fabric directory with test/ and truth/")
      ->required();
  sweep_cmd->add_option("--thresholds", sweep_thresholds, "start:stop:step or comma list");
  sweep_cmd->add_option("--out", sweep_out, "CSV file to write")->required();
  sweep_cmd->add_option("--segmentation", sweep_segmentation,
                        "fixed (map >= half an 8-bit step) or entropy");
  sweep_cmd->add_option("--sigma", sweep_sigma, "Gaussian sigma (default filter_size/6)");
  sweep_seg.attach(sweep_cmd);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic fabric and its truth mask");
  SynthConfig synth_cfg;
  std::string synth_defect = "none", synth_out;
  std::optional<std::string> synth_truth;
  synth_cmd->add_option("--period", synth_cfg.period, "Tile period [16]");
  synth_cmd->add_option("--size", synth_cfg.size, "Image side [256]");
  synth_cmd->add_option("--defect", synth_defect,
                        "none|bar|thin_bar|thick_bar|hole|block|broken_end");
  synth_cmd->add_option("--noise", synth_cfg.noise, "Noise sigma as a fraction of 255 [0.01]");
  synth_cmd->add_option("--fabric-seed", synth_cfg.fabric_seed, "Tile seed [1]");
  synth_cmd->add_option("--seed", synth_cfg.seed, "Noise/defect seed [1]");
  synth_cmd->add_option("--position", synth_cfg.defect_position, "Stripe defect row/column");
  synth_cmd->add_option("--width", synth_cfg.defect_width, "Defect width override");
  synth_cmd->add_option("--out", synth_out, "Image to write")->required();
  synth_cmd->add_option("--truth", synth_truth, "Truth mask to write");

  // pipeline
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Train, detect, segment and evaluate");
  std::string pipe_dataset, pipe_out;
  std::optional<double> pipe_anomaly, pipe_sigma;
  TrainFlags pipe_flags;
  SegmentFlags pipe_seg;
  pipeline_cmd->add_option("--dataset", pipe_dataset, "Fabric directory")->required();
  pipeline_cmd->add_option("--out", pipe_out, "Output directory")->required();
  pipeline_cmd->add_option("--anomaly-threshold", pipe_anomaly, "Fixed anomaly threshold");
  pipeline_cmd->add_option("--sigma", pipe_sigma, "Gaussian sigma (default filter_size/6)");
  pipe_flags.attach(pipeline_cmd);
  pipe_seg.attach(pipeline_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*period_cmd) {
      const GrayImage img = preprocess(load_gray(period_input), !period_no_equalize);
      if (period_plot) {
        fs::create_directories(*period_plot);
        const Projections proj = projection_means(img);
        const Eigen::VectorXd row_ac = autocorrelate(proj.row_means);
        const Eigen::VectorXd col_ac = autocorrelate(proj.col_means);
        write_series_csv(fs::path(*period_plot) / "rows.csv", proj.row_means, row_ac,
                         detect_peaks(row_ac, period_prom));
        write_series_csv(fs::path(*period_plot) / "cols.csv", proj.col_means, col_ac,
                         detect_peaks(col_ac, period_prom));
      }
      const PeriodEstimate e = estimate_period(img, period_prom);
      std::printf("row_period %d\ncol_period %d\nfilter_size %d\n", e.row_period, e.col_period,
                  derive_filter_size(e));
      return 0;
    }

    if (*train_cmd) {
      PipelineConfig cfg;
      train_flags.apply(cfg);
      if (!train_fabric.empty()) cfg.fabric_id = train_fabric;
      cfg.validate();
      const GrayImage raw = load_gray(train_input);
      BuildReport report;
      const auto t0 = std::chrono::steady_clock::now();
      Model model = build_model(raw, cfg.training(), &report);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double threshold = calibrate_threshold(model, raw);
      save_model(model, train_out);

      if (report.period)
        std::printf("period %d x %d\n", report.period->row_period, report.period->col_period);
      std::printf("filter_size %d\n", report.filter_size);
      for (std::size_t l = 0; l < model.layers.size(); ++l)
        std::printf("layer %zu: %zu features from %zu patches (%zu candidates), window %d\n", l + 1,
                    model.layers[l].features.size(), report.trained_patches[l],
                    report.candidate_patches[l], model.effective_window(l));
      std::printf("features %zu\nparameters %zu\nanomaly_threshold %.6f\ntraining_seconds %.2f\n",
                  model.feature_count(), model.parameter_count(), threshold, secs);
      return 0;
    }

    if (*detect_cmd) {
      const Model model = load_model(detect_model);
      MapOptions opts;
      opts.threshold = detect_threshold;
      opts.sigma = detect_sigma;
      const ProbabilityMap map = defect_probability_map(model, load_gray(detect_input), opts);
      save_probability_png(map, detect_map);
      if (detect_mask) {
        PipelineConfig cfg;
        detect_seg.apply(cfg);
        cfg.validate();
        save_mask(segment(map, cfg.segmentation()).mask, *detect_mask);
      }
      std::printf("max_probability %.6f\n", map.maxCoeff());
      return 0;
    }

    if (*segment_cmd) {
      PipelineConfig cfg;
      segment_seg.apply(cfg);
      cfg.validate();
      const Segmentation seg = segment(load_probability_png(segment_map), cfg.segmentation());
      save_mask(seg.mask, segment_out);
      if (seg.threshold)
        std::printf("s %d\nt %d\n", seg.threshold->s, seg.threshold->t);
      else
        std::printf("degenerate map: empty mask\n");
      std::printf("defect_pixels %ld\n", static_cast<long>((seg.mask != 0).count()));
      return 0;
    }

    if (*evaluate_cmd) {
      const ConfusionCounts c = confusion(load_mask(eval_pred), load_mask(eval_truth));
      const MetricsReport m = metrics(c);
      const std::string header = "tp,tn,fp,fn,tpr,tnr,fnr,fpr,ppv,acc,f1";
      std::ostringstream row;
      row << c.tp << ',' << c.tn << ',' << c.fp << ',' << c.fn << ',' << format_metric(m.tpr, 6)
          << ',' << format_metric(m.tnr, 6) << ',' << format_metric(m.fnr, 6) << ','
          << format_metric(m.fpr, 6) << ',' << format_metric(m.ppv, 6) << ','
          << format_metric(m.acc, 6) << ',' << format_metric(m.f1, 6);
      if (eval_out) {
        std::ofstream out(*eval_out);
        if (!out) throw IoError(*eval_out, "cannot open file for writing");
        out << header << '\n' << row.str() << '\n';
      }
      std::cout << header << '\n' << row.str() << '\n';
      return 0;
    }

    if (*sweep_cmd) {
      const Model model = load_model(sweep_model);
      PipelineConfig cfg;
      sweep_seg.apply(cfg);
      cfg.validate();
      SegmentOptions seg = cfg.segmentation();
      if (sweep_segmentation == "fixed")
        seg.fixed_cutoff = kSweepCutoff;
      else if (sweep_segmentation != "entropy")
        throw ParameterError("--segmentation must be fixed or entropy");
      const auto images = load_labeled(scan_dataset(sweep_dataset));
      const auto rows =
          sweep_curves(model, images, parse_thresholds(sweep_thresholds), seg, sweep_sigma);
      write_curve_csv(rows, sweep_out);
      std::printf("%zu thresholds over %zu images -> %s\n", rows.size(), images.size(),
                  sweep_out.c_str());
      return 0;
    }

    if (*synth_cmd) {
      synth_cfg.defect = parse_defect_kind(synth_defect);
      const SynthSample s = synth_fabric(synth_cfg);
      save_gray(s.image, synth_out);
      if (synth_truth) save_mask(s.truth, *synth_truth);
      return 0;
    }

    if (*pipeline_cmd) {
      PipelineConfig cfg;
      pipe_flags.apply(cfg);
      pipe_seg.apply(cfg);
      if (pipe_anomaly) cfg.anomaly_threshold = *pipe_anomaly;
      if (pipe_sigma) cfg.sigma = *pipe_sigma;
      const Dataset ds = scan_dataset(pipe_dataset);
      if (ds.reference.empty())
        throw IoError(pipe_dataset, "missing reference.png (defect-free training image)");
      if (cfg.fabric_id.empty()) cfg.fabric_id = ds.fabric;
      const PipelineResult res = run_pipeline(load_gray(ds.reference), load_labeled(ds), cfg);
      write_pipeline_outputs(res, pipe_out);
      std::printf("features %zu, anomaly threshold %.6f, training %.2f s\n",
                  res.model.feature_count(), res.model.anomaly_threshold.value_or(0.0),
                  res.training_seconds);
      std::cout << format_summary(res);
      for (const ImageResult& r : res.images)
        if (r.error) std::fprintf(stderr, "%s: %s\n", r.id.c_str(), r.error->c_str());
      return 0;
    }
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
