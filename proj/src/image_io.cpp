#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "motif/image.hpp"

namespace motif {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

/// Decoded raster: interleaved samples, 8 or 16 bits per sample.
struct RawRaster {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

RawRaster read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError(path.string(), "cannot open file");

  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError(path.string(), "not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError(path.string(), "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError(path.string(), "libpng initialisation failed");
  }

  RawRaster raster;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string(), "corrupt PNG data");
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  raster.width = static_cast<int>(png_get_image_width(png, info));
  raster.height = static_cast<int>(png_get_image_height(png, info));
  raster.channels = png_get_channels(png, info);
  raster.bit_depth = png_get_bit_depth(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * static_cast<std::size_t>(raster.height));
  rows.resize(static_cast<std::size_t>(raster.height));
  for (int r = 0; r < raster.height; ++r) rows[r] = buffer.data() + rowbytes * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n =
      static_cast<std::size_t>(raster.width) * raster.height * raster.channels;
  raster.samples.resize(n);
  if (raster.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i)
      raster.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
  } else {
    for (std::size_t i = 0; i < n; ++i) raster.samples[i] = buffer[i];
  }
  return raster;
}

void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               const std::vector<std::uint16_t>& samples) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError(path.string(), "cannot open file for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError(path.string(), "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError(path.string(), "libpng initialisation failed");
  }

  const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
  const std::size_t rowbytes = static_cast<std::size_t>(width) * bytes_per_sample;
  std::vector<png_byte> buffer(rowbytes * static_cast<std::size_t>(height));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (bit_depth == 16) {
      buffer[2 * i] = static_cast<png_byte>(samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(samples[i] & 0xff);
    } else {
      buffer[i] = static_cast<png_byte>(samples[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) rows[r] = buffer.data() + rowbytes * r;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string(), "PNG encoding failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// PGM header tokens may be separated by arbitrary whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
  std::string token;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open file");

  const std::string magic = next_pgm_token(in);
  if (magic != "P5" && magic != "P2") throw IoError(path.string(), "not a P5/P2 PGM file");
  long w = 0, h = 0, maxval = 0;
  try {
    w = std::stol(next_pgm_token(in));
    h = std::stol(next_pgm_token(in));
    maxval = std::stol(next_pgm_token(in));
  } catch (const std::exception&) {
    throw IoError(path.string(), "malformed PGM header");
  }
  if (w < 1 || h < 1) throw IoError(path.string(), "invalid PGM dimensions");
  if (maxval < 1 || maxval > 255) throw IoError(path.string(), "unsupported bit depth");

  GrayImage img(h, w);
  if (magic == "P5") {
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w * h));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
      throw IoError(path.string(), "truncated PGM data");
    for (std::size_t i = 0; i < bytes.size(); ++i) img.data()[i] = bytes[i];
  } else {
    for (Eigen::Index i = 0; i < img.size(); ++i) {
      const std::string tok = next_pgm_token(in);
      if (tok.empty()) throw IoError(path.string(), "truncated PGM data");
      img.data()[i] = std::stod(tok);
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const std::vector<std::uint16_t>& samples,
               int width, int height) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open file for writing");
  out << "P5\n" << width << ' ' << height << "\n255\n";
  for (auto s : samples) out.put(static_cast<char>(s));
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<std::uint16_t> to_bytes(const GrayImage& img) {
  std::vector<std::uint16_t> samples(static_cast<std::size_t>(img.size()));
  for (Eigen::Index i = 0; i < img.size(); ++i)
    samples[i] = static_cast<std::uint16_t>(std::clamp(std::lround(img.data()[i]), 0L, 255L));
  return samples;
}

void write_8bit(const std::filesystem::path& path, const std::vector<std::uint16_t>& samples,
                int width, int height) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm")
    write_pgm(path, samples, width, height);
  else
    write_png(path, width, height, 8, samples);
}

}  // namespace

GrayImage load_gray(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError(path.string(), "file does not exist");
  const std::string ext = lower_extension(path);
  if (ext == ".pgm" || ext == ".pnm") return read_pgm(path);

  const RawRaster raster = read_png(path);
  if (raster.bit_depth != 8) throw IoError(path.string(), "unsupported bit depth");
  GrayImage img(raster.height, raster.width);
  const int ch = raster.channels;
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    double acc = 0.0;
    for (int c = 0; c < ch; ++c) acc += raster.samples[static_cast<std::size_t>(i) * ch + c];
    img.data()[i] = acc / ch;
  }
  return img;
}

void save_gray(const GrayImage& img, const std::filesystem::path& path) {
  write_8bit(path, to_bytes(img), static_cast<int>(img.cols()), static_cast<int>(img.rows()));
}

void save_probability_png(const GrayImage& map, const std::filesystem::path& path) {
  std::vector<std::uint16_t> samples(static_cast<std::size_t>(map.size()));
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    const double v = std::clamp(map.data()[i], 0.0, 1.0);
    samples[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
  }
  write_png(path, static_cast<int>(map.cols()), static_cast<int>(map.rows()), 16, samples);
}

GrayImage load_probability_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError(path.string(), "file does not exist");
  const RawRaster raster = read_png(path);
  if (raster.channels != 1) throw IoError(path.string(), "probability map must be grayscale");
  const double scale = raster.bit_depth == 16 ? 65535.0 : 255.0;
  GrayImage map(raster.height, raster.width);
  for (Eigen::Index i = 0; i < map.size(); ++i) map.data()[i] = raster.samples[i] / scale;
  return map;
}

BinaryMask load_mask(const std::filesystem::path& path) {
  const GrayImage img = load_gray(path);
  return (img > 127.0).cast<std::uint8_t>();
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint16_t> samples(static_cast<std::size_t>(mask.size()));
  for (Eigen::Index i = 0; i < mask.size(); ++i) samples[i] = mask.data()[i] ? 255 : 0;
  write_8bit(path, samples, static_cast<int>(mask.cols()), static_cast<int>(mask.rows()));
}

}  // namespace motif
