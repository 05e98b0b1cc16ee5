#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "inspire/tensor.hpp"

namespace inspire {

// 8-bit RGB PNG, no alpha. Value v in [-1, 1] maps to
// round((v + 1) / 2 * 255) clamped to [0, 255]; decoding applies the
// inverse affine map 2 * b / 255 - 1.
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
ImageBuffer decode_png(std::span<const std::uint8_t> bytes);

std::uint8_t quantize_unit(double v);
double dequantize_unit(std::uint8_t b);

}  // namespace inspire
