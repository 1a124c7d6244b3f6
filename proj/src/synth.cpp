#include <algorithm>
#include <cmath>
#include <vector>

#include "motif/evaluation.hpp"

namespace motif {

std::string to_string(DefectKind k) {
  switch (k) {
    case DefectKind::None: return "none";
    case DefectKind::ThinBar: return "thin_bar";
    case DefectKind::ThickBar: return "thick_bar";
    case DefectKind::Hole: return "hole";
    case DefectKind::Block: return "block";
    case DefectKind::BrokenEnd: return "broken_end";
  }
  return "none";
}

DefectKind parse_defect_kind(const std::string& s) {
  if (s == "none" || s == "defect_free" || s == "defect-free") return DefectKind::None;
  if (s == "bar" || s == "thin_bar") return DefectKind::ThinBar;
  if (s == "thick_bar") return DefectKind::ThickBar;
  if (s == "hole") return DefectKind::Hole;
  if (s == "block") return DefectKind::Block;
  if (s == "broken_end") return DefectKind::BrokenEnd;
  throw ParameterError("unknown defect kind '" + s + "'");
}

namespace {

constexpr std::uint64_t kNoiseStream = 0x6a09e667f3bcc909ULL;

int uniform_int(SplitMix64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

// One period of the fabric: a twill weave (levels constant along the
// diagonals, so every tile row and column holds the same values) carrying a
// bright rectangular motif. The weave leaves both axis profiles flat; the
// motif gives them one dominant bump per period.
GrayImage make_tile(int period, std::uint64_t fabric_seed) {
  SplitMix64 rng(fabric_seed);
  const double base = 70.0 + 30.0 * rng.uniform();
  std::vector<double> twill(static_cast<std::size_t>(period));
  for (double& v : twill) v = base + 12.0 * (static_cast<double>(rng.below(3)) - 1.0);

  GrayImage tile(period, period);
  for (int r = 0; r < period; ++r)
    for (int c = 0; c < period; ++c) tile(r, c) = twill[static_cast<std::size_t>((r + c) % period)];

  const int mh = std::max(2, uniform_int(rng, period / 3, period / 2));
  const int mw = std::max(2, uniform_int(rng, period / 3, period / 2));
  const int r0 = uniform_int(rng, 0, period - 1);
  const int c0 = uniform_int(rng, 0, period - 1);
  for (int i = 0; i < mh; ++i)
    for (int j = 0; j < mw; ++j) tile((r0 + i) % period, (c0 + j) % period) += 90.0;
  return tile;
}

}  // namespace

SynthSample synth_fabric(const SynthConfig& cfg) {
  if (cfg.period < 2) throw ParameterError("tile period must be >= 2");
  if (cfg.period * 4 > cfg.size) throw ParameterError("tile period must be at most size/4");
  if (cfg.noise < 0.0) throw ParameterError("noise must be >= 0");

  const int n = cfg.size;
  const int T = cfg.period;
  const GrayImage tile = make_tile(T, cfg.fabric_seed);
  GrayImage img(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) img(r, c) = tile(r % T, c % T);

  SynthSample out;
  out.truth = BinaryMask::Zero(n, n);
  SplitMix64 rng(cfg.seed);

  auto stripe = [&](int default_width, bool vertical) {
    const int w = cfg.defect_width.value_or(default_width);
    if (w < 1 || w > n) throw ParameterError("defect larger than image");
    const int margin = std::min(T, (n - w) / 2);
    const int pos = cfg.defect_position.value_or(uniform_int(rng, margin, n - w - margin));
    if (pos < 0 || pos + w > n) throw ParameterError("defect extends past the image border");
    if (vertical)
      out.truth.middleCols(pos, w).setOnes();
    else
      out.truth.middleRows(pos, w).setOnes();
  };

  switch (cfg.defect) {
    case DefectKind::None:
      break;
    case DefectKind::ThinBar:
    case DefectKind::ThickBar: {
      stripe(cfg.defect == DefectKind::ThinBar ? T : 3 * T, true);
      img = (out.truth > 0).select(img + 70.0, img);
      break;
    }
    case DefectKind::BrokenEnd: {
      stripe(std::max(2, T / 2), false);
      img = (out.truth > 0).select(GrayImage::Constant(n, n, tile.mean()), img);
      break;
    }
    case DefectKind::Hole: {
      const double radius = cfg.defect_width ? *cfg.defect_width / 2.0 : static_cast<double>(T);
      if (2 * radius + 2 > n) throw ParameterError("defect larger than image");
      const int lo = static_cast<int>(std::ceil(radius)) + 1;
      const int cy = uniform_int(rng, lo, n - 1 - lo);
      const int cx = uniform_int(rng, lo, n - 1 - lo);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          if ((r - cy) * (r - cy) + (c - cx) * (c - cx) <= radius * radius) {
            out.truth(r, c) = 1;
            img(r, c) = 15.0;
          }
      break;
    }
    case DefectKind::Block: {
      const int side = cfg.defect_width.value_or(2 * T);
      if (side > n) throw ParameterError("defect larger than image");
      const int r0 = uniform_int(rng, 0, n - side);
      const int c0 = uniform_int(rng, 0, n - side);
      out.truth.block(r0, c0, side, side).setOnes();
      for (int r = r0; r < r0 + side; ++r)
        for (int c = c0; c < c0 + side; ++c) img(r, c) = 40.0 + 180.0 * rng.uniform();
      break;
    }
  }

  SplitMix64 noise(cfg.seed ^ kNoiseStream);
  const double sd = cfg.noise * 255.0;
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    const double v = img.data()[i] + (sd > 0.0 ? sd * noise.normal() : 0.0);
    img.data()[i] = std::clamp(std::round(v), 0.0, 255.0);
  }
  out.image = std::move(img);
  return out;
}

}  // namespace motif
