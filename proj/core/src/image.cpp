#include "tsdet/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>

#include "tsdet/error.hpp"

namespace tsdet {

ImageBuffer::ImageBuffer(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidInput("image dimensions must be non-negative");
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

ImageBuffer ImageBuffer::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > width_ || y0 + h > height_) {
    throw InvalidInput("crop rectangle outside image");
  }
  ImageBuffer out(w, h);
  const std::size_t row_bytes = static_cast<std::size_t>(w) * 3;
  for (int y = 0; y < h; ++y) {
    const auto src = pixels_.begin() + static_cast<std::ptrdiff_t>(index(x0, y0 + y));
    std::copy(src, src + static_cast<std::ptrdiff_t>(row_bytes),
              out.pixels_.begin() + static_cast<std::ptrdiff_t>(out.index(0, y)));
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const ImageBuffer& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.bytes().data()),
            static_cast<std::streamsize>(img.bytes().size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  // c is the single whitespace byte that terminates the token.
  return tok;
}

int parse_dim(const std::string& tok, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size() && v >= 0) return v;
  } catch (const std::exception&) {
  }
  throw IoError(path.string() + ": bad PPM header field '" + tok + "'");
}

}  // namespace

ImageBuffer read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (header_token(in) != "P6") throw IoError(path.string() + ": not a binary PPM (P6)");
  const int w = parse_dim(header_token(in), path);
  const int h = parse_dim(header_token(in), path);
  const int maxval = parse_dim(header_token(in), path);
  if (maxval != 255) throw IoError(path.string() + ": only maxval 255 is supported");

  ImageBuffer img(w, h);
  in.read(reinterpret_cast<char*>(img.bytes().data()),
          static_cast<std::streamsize>(img.bytes().size()));
  if (in.gcount() != static_cast<std::streamsize>(img.bytes().size())) {
    throw IoError(path.string() + ": truncated pixel data");
  }
  return img;
}

}  // namespace tsdet
