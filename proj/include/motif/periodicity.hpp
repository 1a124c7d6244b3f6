#pragma once

#include <vector>

#include "motif/image.hpp"

namespace motif {

struct Projections {
  Eigen::VectorXd row_means;  // length H
  Eigen::VectorXd col_means;  // length W
};

/// Period along each axis of a repeating texture. `row_period` is measured
/// on the row-mean profile (vertical repeat), `col_period` on the column-mean
/// profile (horizontal repeat).
struct PeriodEstimate {
  int row_period = 0;
  int col_period = 0;
  std::vector<int> row_peaks;
  std::vector<int> col_peaks;
};

inline constexpr double kDefaultMinProminence = 0.05;

Projections projection_means(const GrayImage& img);

/// Mean-removed biased autocorrelation, normalized so a[0] = 1. A constant
/// input yields all zeros.
Eigen::VectorXd autocorrelate(const Eigen::VectorXd& v);

/// Topographic prominence of the local maximum at `i`: its height above the
/// higher of the two lowest points reached before a strictly higher sample
/// (or the end of the vector) on either side.
double peak_prominence(const Eigen::VectorXd& a, Eigen::Index i);

/// Strictly interior local maxima with prominence >= `min_prominence`,
/// in increasing index order.
std::vector<int> detect_peaks(const Eigen::VectorXd& a, double min_prominence);

/// Median of successive gaps; lower median for even counts. Empty input or
/// a single element yields 0.
int median_gap(const std::vector<int>& peaks);

/// Full per-axis pipeline: autocorrelate, keep peaks with lag in
/// [2, len/2], take the median successive gap.
PeriodEstimate estimate_period(const GrayImage& img,
                               double min_prominence = kDefaultMinProminence);

/// Square filter window derived from the period: max of both axes, bumped
/// to the next odd number.
int derive_filter_size(const PeriodEstimate& e);

}  // namespace motif
