#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "motif/evaluation.hpp"

using namespace motif;
namespace fs = std::filesystem;

TEST(Confusion, PerfectPrediction) {
  BinaryMask truth = BinaryMask::Zero(10, 10);
  truth.block(0, 0, 2, 5).setOnes();
  const ConfusionCounts c = confusion(truth, truth);
  EXPECT_EQ(c, (ConfusionCounts{10, 90, 0, 0}));
}

TEST(Confusion, Inverted) {
  BinaryMask truth = BinaryMask::Zero(4, 4);
  truth(1, 1) = 1;
  const BinaryMask pred = (truth == 0).cast<std::uint8_t>();
  const ConfusionCounts c = confusion(pred, truth);
  EXPECT_EQ(c.tp, 0u);
  EXPECT_EQ(c.tn, 0u);
}

TEST(Confusion, HandCounted) {
  BinaryMask pred(3, 3), truth(3, 3);
  pred << 1, 1, 0, 0, 1, 0, 0, 0, 1;
  truth << 1, 0, 0, 0, 1, 1, 0, 0, 0;
  EXPECT_EQ(confusion(pred, truth), (ConfusionCounts{2, 4, 2, 1}));
  EXPECT_THROW(confusion(pred, BinaryMask::Zero(3, 4)), DimensionError);
}

TEST(Metrics, Recall) {
  EXPECT_DOUBLE_EQ(*metrics({50, 0, 0, 50}).tpr, 0.5);
}

TEST(Metrics, CleanImageUndefinedRates) {
  const MetricsReport m = metrics({0, 100, 0, 0});
  EXPECT_DOUBLE_EQ(*m.acc, 1.0);
  EXPECT_FALSE(m.tpr);
  EXPECT_FALSE(m.ppv);
  EXPECT_FALSE(m.f1);
  EXPECT_EQ(format_metric(m.f1), "NA");
  EXPECT_EQ(format_metric(m.acc), "1.0000");
}

TEST(Metrics, ZeroPrecisionAndRecallGiveZeroF1) {
  const MetricsReport m = metrics({0, 10, 5, 5});
  ASSERT_TRUE(m.f1);
  EXPECT_EQ(*m.f1, 0.0);
}

TEST(Metrics, IdentitiesOnRandomCounts) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::uint64_t> d(0, 50);
  for (int i = 0; i < 1000; ++i) {
    const ConfusionCounts c{d(gen), d(gen), d(gen), d(gen)};
    const MetricsReport m = metrics(c);
    if (c.tp + c.fn > 0) EXPECT_NEAR(*m.tpr + *m.fnr, 1.0, 1e-12);
    if (c.tn + c.fp > 0) EXPECT_NEAR(*m.tnr + *m.fpr, 1.0, 1e-12);
    if (c.total() > 0) EXPECT_EQ(*m.acc, static_cast<double>(c.tp + c.tn) / c.total());
    if (m.f1 && *m.ppv + *m.tpr > 0)
      EXPECT_NEAR(*m.f1, 2 * *m.ppv * *m.tpr / (*m.ppv + *m.tpr), 1e-12);
  }
}

TEST(Thresholds, Range) {
  const auto t = parse_thresholds("0:1:0.1");
  ASSERT_EQ(t.size(), 11u);
  EXPECT_DOUBLE_EQ(t.front(), 0.0);
  EXPECT_DOUBLE_EQ(t.back(), 1.0);
  EXPECT_EQ(parse_thresholds("0.2,0.5"), (std::vector<double>{0.2, 0.5}));
  EXPECT_THROW(parse_thresholds("0:1"), ParameterError);
  EXPECT_THROW(parse_thresholds("a,b"), ParameterError);
  EXPECT_THROW(parse_thresholds("0:1:0"), ParameterError);
}

TEST(Synth, CleanHasEmptyTruth) {
  SynthConfig cfg;
  cfg.size = 64;
  const SynthSample s = synth_fabric(cfg);
  EXPECT_EQ((s.truth != 0).count(), 0);
  EXPECT_GE(s.image.minCoeff(), 0.0);
  EXPECT_LE(s.image.maxCoeff(), 255.0);
}

TEST(Synth, BarMaskIsTheStripe) {
  SynthConfig cfg;
  cfg.size = 64;
  cfg.defect = DefectKind::ThinBar;
  cfg.defect_position = 20;
  cfg.defect_width = 5;
  const SynthSample s = synth_fabric(cfg);
  BinaryMask want = BinaryMask::Zero(64, 64);
  want.middleCols(20, 5).setOnes();
  EXPECT_TRUE((s.truth == want).all());
}

TEST(Synth, Deterministic) {
  for (DefectKind k : kDefectKinds) {
    SynthConfig cfg;
    cfg.size = 64;
    cfg.defect = k;
    cfg.seed = 9;
    const SynthSample a = synth_fabric(cfg), b = synth_fabric(cfg);
    EXPECT_TRUE((a.image == b.image).all()) << to_string(k);
    EXPECT_TRUE((a.truth == b.truth).all()) << to_string(k);
    EXPECT_GT((a.truth != 0).count(), 0) << to_string(k);
  }
}

TEST(Synth, Preconditions) {
  SynthConfig cfg;
  cfg.size = 60;
  cfg.period = 16;
  EXPECT_THROW(synth_fabric(cfg), ParameterError);
  cfg.period = 8;
  cfg.defect = DefectKind::Block;
  cfg.defect_width = 100;
  EXPECT_THROW(synth_fabric(cfg), ParameterError);
  EXPECT_THROW(parse_defect_kind("scratch"), ParameterError);
  EXPECT_EQ(parse_defect_kind("bar"), DefectKind::ThinBar);
}

TEST(Sweep, LimitsAndMonotonicity) {
  SynthConfig sc;
  sc.period = 8;
  sc.size = 96;
  const GrayImage ref = synth_fabric(sc).image;
  Model m = build_model(ref, TrainingConfig{});
  calibrate_threshold(m, ref);

  std::vector<LabeledImage> images;
  for (DefectKind k : {DefectKind::Hole, DefectKind::ThickBar}) {
    sc.defect = k;
    sc.seed = 5;
    const SynthSample s = synth_fabric(sc);
    images.push_back({to_string(k), s.image, s.truth});
  }
  const auto rows = sweep_curves(m, images, parse_thresholds("0:1:0.1"));
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_DOUBLE_EQ(*rows.front().report.tpr, 1.0);
  EXPECT_DOUBLE_EQ(*rows.back().report.tpr, 0.0);
  EXPECT_DOUBLE_EQ(*rows.back().report.fpr, 0.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(*rows[i].report.tpr, *rows[i - 1].report.tpr);
    EXPECT_LE(*rows[i].report.fpr, *rows[i - 1].report.fpr);
  }

  const auto again = sweep_curves(m, images, parse_thresholds("0:1:0.1"));
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].counts, again[i].counts);

  const fs::path csv = fs::temp_directory_path() / "motif_sweep.csv";
  write_curve_csv(rows, csv);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, kCurveCsvHeader);
}
