#include <gtest/gtest.h>

#include "motif/evaluation.hpp"
#include "motif/periodicity.hpp"

using namespace motif;

TEST(Projections, SmallImage) {
  GrayImage img(2, 2);
  img << 1, 2, 3, 4;
  const Projections p = projection_means(img);
  EXPECT_DOUBLE_EQ(p.row_means[0], 1.5);
  EXPECT_DOUBLE_EQ(p.row_means[1], 3.5);
  EXPECT_DOUBLE_EQ(p.col_means[0], 2.0);
  EXPECT_DOUBLE_EQ(p.col_means[1], 3.0);
}

TEST(Projections, SingleRow) {
  GrayImage img(1, 4);
  img << 1, 5, 2, 8;
  const Projections p = projection_means(img);
  ASSERT_EQ(p.row_means.size(), 1);
  EXPECT_DOUBLE_EQ(p.row_means[0], 4.0);
  EXPECT_TRUE(p.col_means.isApprox(Eigen::Vector4d(1, 5, 2, 8)));
}

TEST(Autocorrelate, ConstantIsZero) {
  EXPECT_TRUE(autocorrelate(Eigen::VectorXd::Constant(10, 3.0)).isZero());
}

TEST(Autocorrelate, PeriodThree) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(30);
  for (int i = 0; i < 30; i += 3) v[i] = 1;
  const Eigen::VectorXd a = autocorrelate(v);
  EXPECT_DOUBLE_EQ(a[0], 1.0);

  // Brute-force reference.
  const double m = v.mean();
  for (int lag = 0; lag < 30; ++lag) {
    double s = 0, s0 = 0;
    for (int i = 0; i < 30; ++i) s0 += (v[i] - m) * (v[i] - m);
    for (int i = 0; i + lag < 30; ++i) s += (v[i] - m) * (v[i + lag] - m);
    EXPECT_NEAR(a[lag], s / s0, 1e-12);
  }

  const std::vector<int> peaks = detect_peaks(a, kDefaultMinProminence);
  ASSERT_GE(peaks.size(), 5u);
  for (std::size_t i = 0; i < peaks.size(); ++i) EXPECT_EQ(peaks[i], 3 * static_cast<int>(i + 1));
  EXPECT_EQ(median_gap(peaks), 3);
}

TEST(Peaks, MonotoneHasNone) {
  EXPECT_TRUE(detect_peaks(Eigen::VectorXd::LinSpaced(10, 0, 1), 0.0).empty());
}

TEST(Peaks, Alternating) {
  Eigen::VectorXd a(5);
  a << 0, 1, 0, 1, 0;
  EXPECT_EQ(detect_peaks(a, 0.5), (std::vector<int>{1, 3}));
}

TEST(Peaks, ProminenceUsesHigherBase) {
  Eigen::VectorXd a(7);
  a << 0, 5, 1, 3, 2, 4, 0;
  EXPECT_DOUBLE_EQ(peak_prominence(a, 3), 1.0);  // bases 1 (left) and 2 (right)
  EXPECT_DOUBLE_EQ(peak_prominence(a, 1), 5.0);
  EXPECT_EQ(detect_peaks(a, 1.5), (std::vector<int>{1, 5}));
}

TEST(MedianGap, LowerMedian) {
  EXPECT_EQ(median_gap({}), 0);
  EXPECT_EQ(median_gap({4}), 0);
  EXPECT_EQ(median_gap({0, 3, 10, 12, 20}), 3);  // gaps 3,7,2,8 -> sorted 2,3,7,8
}

TEST(FilterSize, FromPeriods) {
  EXPECT_EQ(derive_filter_size({26, 24, {}, {}}), 27);
  EXPECT_EQ(derive_filter_size({21, 16, {}, {}}), 21);
  EXPECT_EQ(derive_filter_size({8, 8, {}, {}}), 9);
}

TEST(EstimatePeriod, TiledRandomTile) {
  SynthConfig cfg;
  cfg.period = 8;
  cfg.size = 128;
  cfg.noise = 0.0;
  const GrayImage img = preprocess(synth_fabric(cfg).image, true);
  const PeriodEstimate e = estimate_period(img);
  EXPECT_EQ(e.row_period, 8);
  EXPECT_EQ(e.col_period, 8);
}

TEST(EstimatePeriod, FlatImageFails) {
  GrayImage img(32, 32);
  for (int r = 0; r < 32; ++r) img.row(r).setConstant(r);
  EXPECT_THROW(estimate_period(img), PeriodEstimationError);
}
