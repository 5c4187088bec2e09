#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irsim/image.hpp"

namespace irsim {

// Grayscale PNG I/O (8- or 16-bit). Frames are stored 16-bit, instance masks
// 8-bit. read_png_gray returns raw integer sample values as doubles and
// reports the source bit depth.
ImageF read_png_gray(const std::string& path, int* bit_depth = nullptr);

void write_png_gray8(const std::string& path, const std::vector<std::uint8_t>& data,
                     int height, int width);
void write_png_gray16(const std::string& path, const std::vector<std::uint16_t>& data,
                      int height, int width);

} // namespace irsim
