#include "motif/periodicity.hpp"

#include <algorithm>
#include <string>

namespace motif {

Projections projection_means(const GrayImage& img) {
  return {img.rowwise().mean().matrix(), img.colwise().mean().transpose().matrix()};
}

Eigen::VectorXd autocorrelate(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  const Eigen::VectorXd centered = v.array() - v.mean();
  Eigen::VectorXd a(n);
  for (Eigen::Index lag = 0; lag < n; ++lag)
    a[lag] = centered.head(n - lag).dot(centered.tail(n - lag));
  if (a[0] > 0.0) return a / a[0];
  return Eigen::VectorXd::Zero(n);
}

double peak_prominence(const Eigen::VectorXd& a, Eigen::Index i) {
  const double h = a[i];
  double left_min = h;
  for (Eigen::Index k = i - 1; k >= 0 && a[k] <= h; --k) left_min = std::min(left_min, a[k]);
  double right_min = h;
  for (Eigen::Index k = i + 1; k < a.size() && a[k] <= h; ++k)
    right_min = std::min(right_min, a[k]);
  return h - std::max(left_min, right_min);
}

std::vector<int> detect_peaks(const Eigen::VectorXd& a, double min_prominence) {
  if (min_prominence < 0.0) throw ParameterError("min_prominence must be >= 0");
  std::vector<int> peaks;
  for (Eigen::Index i = 1; i + 1 < a.size(); ++i) {
    if (a[i] > a[i - 1] && a[i] > a[i + 1] && peak_prominence(a, i) >= min_prominence)
      peaks.push_back(static_cast<int>(i));
  }
  return peaks;
}

int median_gap(const std::vector<int>& peaks) {
  if (peaks.size() < 2) return 0;
  std::vector<int> gaps;
  gaps.reserve(peaks.size() - 1);
  for (std::size_t i = 1; i < peaks.size(); ++i) gaps.push_back(peaks[i] - peaks[i - 1]);
  const std::size_t mid = (gaps.size() - 1) / 2;
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(mid), gaps.end());
  return gaps[mid];
}

namespace {

std::vector<int> axis_peaks(const Eigen::VectorXd& profile, double min_prominence) {
  if (profile.size() < 2) return {};
  const Eigen::VectorXd ac = autocorrelate(profile);
  const int max_lag = static_cast<int>(profile.size() / 2);
  std::vector<int> peaks = detect_peaks(ac, min_prominence);
  std::erase_if(peaks, [&](int lag) { return lag < 2 || lag > max_lag; });
  return peaks;
}

}  // namespace

PeriodEstimate estimate_period(const GrayImage& img, double min_prominence) {
  const Projections proj = projection_means(img);
  PeriodEstimate e;
  e.row_peaks = axis_peaks(proj.row_means, min_prominence);
  e.col_peaks = axis_peaks(proj.col_means, min_prominence);
  auto require = [](const std::vector<int>& peaks, const char* axis) {
    if (peaks.size() < 2)
      throw PeriodEstimationError(std::string("found ") + std::to_string(peaks.size()) +
                                  " autocorrelation peak(s) along the " + axis +
                                  " axis; pass an explicit filter size instead");
  };
  require(e.row_peaks, "row");
  require(e.col_peaks, "column");
  e.row_period = median_gap(e.row_peaks);
  e.col_period = median_gap(e.col_peaks);
  return e;
}

int derive_filter_size(const PeriodEstimate& e) {
  const int p = std::max(e.row_period, e.col_period);
  return p % 2 == 0 ? p + 1 : p;
}

}  // namespace motif
