#include "motif/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace motif {

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw DimensionError("prediction and ground truth differ in size");
  ConfusionCounts c;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const bool p = pred.data()[i] != 0;
    const bool t = truth.data()[i] != 0;
    if (t && p)
      ++c.tp;
    else if (!t && !p)
      ++c.tn;
    else if (p)
      ++c.fp;
    else
      ++c.fn;
  }
  return c;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsReport metrics(const ConfusionCounts& c) {
  MetricsReport m;
  m.tpr = ratio(c.tp, c.tp + c.fn);
  m.tnr = ratio(c.tn, c.fp + c.tn);
  m.fnr = ratio(c.fn, c.tp + c.fn);
  m.fpr = ratio(c.fp, c.fp + c.tn);
  m.ppv = ratio(c.tp, c.tp + c.fp);
  m.acc = ratio(c.tp + c.tn, c.total());
  if (m.ppv && m.tpr) {
    const double sum = *m.ppv + *m.tpr;
    m.f1 = sum > 0.0 ? 2.0 * (*m.ppv * *m.tpr) / sum : 0.0;
  }
  return m;
}

std::string format_metric(const std::optional<double>& v, int precision) {
  if (!v) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParameterError("invalid threshold value '" + s + "'");
    }
  };

  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw ParameterError("threshold range must be start:stop:step");
    const double start = to_double(parts[0]);
    const double stop = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw ParameterError("invalid threshold range");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    // start + i*step, not repeated addition, so rounding error does not accumulate.
    for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');)
    if (!part.empty()) out.push_back(to_double(part));
  if (out.empty()) throw ParameterError("no thresholds given");
  return out;
}

std::vector<SweepRow> sweep_curves(const Model& model, const std::vector<LabeledImage>& images,
                                   const std::vector<double>& thresholds,
                                   const SegmentOptions& seg, std::optional<double> sigma) {
  if (images.empty()) throw ParameterError("sweep needs at least one labeled image");
  std::vector<ImageScores> scores;
  scores.reserve(images.size());
  for (const LabeledImage& li : images) {
    try {
      scores.push_back(score_image(model, li.image));
    } catch (const Error& e) {
      throw DataError(li.id + ": " + e.what());
    }
  }

  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    SweepRow row;
    row.threshold = t;
    for (std::size_t i = 0; i < images.size(); ++i) {
      try {
        const ProbabilityMap map = accumulate_map(scores[i], t, sigma);
        row.counts += confusion(segment(map, seg).mask, images[i].truth);
      } catch (const Error& e) {
        throw DataError(images[i].id + ": " + e.what());
      }
    }
    row.report = metrics(row.counts);
    rows.push_back(row);
  }
  return rows;
}

void write_curve_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open file for writing");
  out << kCurveCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    char thr[32];
    std::snprintf(thr, sizeof thr, "%.6g", r.threshold);
    out << thr << ',' << r.counts.tp << ',' << r.counts.tn << ',' << r.counts.fp << ','
        << r.counts.fn << ',' << format_metric(r.report.tpr, 6) << ','
        << format_metric(r.report.fpr, 6) << ',' << format_metric(r.report.ppv, 6) << ','
        << format_metric(r.report.f1, 6) << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace motif
