#include "tcd/io/image_codecs.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "tcd/errors.hpp"
#include "tcd/io/tensor_file.hpp"

namespace tcd {

namespace {

int next_pgm_token(std::istream& in) {
  // Skips whitespace and '#' comments, returns the next integer token.
  for (;;) {
    const int c = in.peek();
    if (c == EOF) throw IoError("truncated PGM header");
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int value = 0;
  in >> value;
  if (!in) throw IoError("malformed PGM header");
  return value;
}

unsigned quantize(double v, unsigned maxval) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned>(std::lround(clamped * maxval));
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5')
    throw UsageError("unsupported image format (expected binary PGM P5): " + path.string());
  const int width = next_pgm_token(in);
  const int height = next_pgm_token(in);
  const int maxval = next_pgm_token(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw IoError("malformed PGM dimensions: " + path.string());
  in.get();  // single whitespace after maxval
  const int bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw IoError("truncated PGM payload: " + path.string());
  Image img(height, width, 1);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    unsigned v = raw[i * bytes_per];
    if (bytes_per == 2) v = (v << 8) | raw[i * bytes_per + 1];  // big-endian
    img.data[i] = static_cast<double>(v) / maxval;
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& img, int bits) {
  require(img.channels == 1, "PGM output requires a single-channel image");
  require(bits == 8 || bits == 16, "PGM depth must be 8 or 16 bits");
  const unsigned maxval = bits == 8 ? 255u : 65535u;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  for (double v : img.data) {
    const unsigned q = quantize(v, maxval);
    if (bits == 16) out.put(static_cast<char>((q >> 8) & 0xFF));
    out.put(static_cast<char>(q & 0xFF));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw IoError("cannot read PNG: " + path.string() + ": " + png.message);
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<unsigned char> raw(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raw.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot decode PNG: " + path.string() + ": " + msg);
  }
  Image img(static_cast<int>(png.height), static_cast<int>(png.width), channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(c, y, x) =
            raw[(static_cast<std::size_t>(y) * img.width + x) * channels + c] / 255.0;
  return img;
}

namespace {

void write_png_impl(const std::filesystem::path& path, const Image& img, bool color) {
  const int channels = color ? 3 : 1;
  require(img.channels == channels, color ? "RGB PNG output requires 3 channels"
                                          : "grayscale PNG output requires 1 channel");
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> raw(static_cast<std::size_t>(img.width) * img.height * channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < channels; ++c)
        raw[(static_cast<std::size_t>(y) * img.width + x) * channels + c] =
            static_cast<unsigned char>(quantize(img.at(c, y, x), 255));
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, raw.data(), 0, nullptr))
    throw IoError("cannot write PNG: " + path.string() + ": " + png.message);
}

}  // namespace

void write_png_gray(const std::filesystem::path& path, const Image& img) {
  write_png_impl(path, img, false);
}

void write_png_rgb(const std::filesystem::path& path, const Image& img) {
  write_png_impl(path, img, true);
}

Image read_image_any(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".tcd") return image_from_tensor(read_tensor(path));
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw UsageError("unsupported image format: " + path.string());
}

}  // namespace tcd
