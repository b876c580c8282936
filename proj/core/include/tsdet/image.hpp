#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace tsdet {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB image; pixels.size() == width * height * 3.
class ImageBuffer {
public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Rgb at(int x, int y) const {
    const std::size_t i = index(x, y);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = index(x, y);
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }

  const std::vector<std::uint8_t>& bytes() const { return pixels_; }
  std::vector<std::uint8_t>& bytes() { return pixels_; }

  /// Copy of the rectangle [x0, x0+w) x [y0, y0+h); must lie inside the image.
  ImageBuffer crop(int x0, int y0, int w, int h) const;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Binary PPM (P6, maxval 255). The writer emits exactly "P6\n<w> <h>\n255\n"
/// followed by raw RGB; the reader also accepts comments and arbitrary
/// whitespace in the header. Failures throw IoError.
void write_ppm(const std::filesystem::path& path, const ImageBuffer& img);
ImageBuffer read_ppm(const std::filesystem::path& path);

}  // namespace tsdet
