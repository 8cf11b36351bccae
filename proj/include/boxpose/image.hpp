#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace boxpose {

/// Interleaved 8-bit image, row-major. channels is 1 (gray), 3 (RGB) or
/// 4 (RGBA).
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  ImageU8() = default;
  ImageU8(int width_in, int height_in, int channels_in, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// Reads an 8-bit PNG. Palette, low-bit-depth and 16-bit inputs are
/// converted; the result has 1, 3 or 4 channels.
ImageU8 read_png(const std::string& path);

/// Writes a 1-, 3- or 4-channel 8-bit PNG with fixed settings, so equal
/// pixels produce equal bytes.
void write_png(const std::string& path, const ImageU8& image);

}  // namespace boxpose
