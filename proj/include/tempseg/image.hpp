#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace tempseg {

/// Interleaved 8-bit image, row-major, `channels` = 1 (index mask) or 3 (RGB).
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;  // height * width * channels

  ImageU8() = default;
  ImageU8(int w, int h, int ch, std::uint8_t fill = 0)
      : width(w), height(h), channels(ch), pixels(static_cast<size_t>(w) * h * ch, fill) {}

  std::uint8_t& at(int y, int x, int c = 0) { return pixels[(static_cast<size_t>(y) * width + x) * channels + c]; }
  std::uint8_t at(int y, int x, int c = 0) const { return pixels[(static_cast<size_t>(y) * width + x) * channels + c]; }

  bool empty() const { return pixels.empty(); }

  /// Axis-aligned crop; the window must be fully inside the image.
  ImageU8 crop(int x0, int y0, int w, int h) const;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ImageU8 read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageU8& img);

}  // namespace tempseg
