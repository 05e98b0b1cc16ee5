#include "inspire/tensor.hpp"

#include <cmath>
#include <string>

#include "inspire/errors.hpp"

namespace inspire {

ImageBuffer::ImageBuffer(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {
  if (height == 0 || width == 0 || channels == 0) throw DimensionError("image dimensions must be positive");
}

ImageBuffer::ImageBuffer(std::size_t height, std::size_t width, std::size_t channels,
                         std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height == 0 || width == 0 || channels == 0) throw DimensionError("image dimensions must be positive");
  if (data_.size() != height * width * channels)
    throw DimensionError("image data length " + std::to_string(data_.size()) + " != H*W*C");
}

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                         std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                         std::to_string(b.channels()));
}

ImageBuffer downscale_average(const ImageBuffer& img, std::size_t target_side) {
  if (target_side == 0 || img.height() % target_side != 0 || img.width() % target_side != 0)
    throw DimensionError("downscale_average: target side " + std::to_string(target_side) +
                         " does not divide " + std::to_string(img.height()) + "x" +
                         std::to_string(img.width()));
  const std::size_t fy = img.height() / target_side, fx = img.width() / target_side;
  if (fy == 1 && fx == 1) return img;
  const std::size_t ch = img.channels();
  const double inv = 1.0 / static_cast<double>(fy * fx);
  ImageBuffer out(target_side, target_side, ch);
  for (std::size_t y = 0; y < target_side; ++y)
    for (std::size_t x = 0; x < target_side; ++x)
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t by = 0; by < fy; ++by)
          for (std::size_t bx = 0; bx < fx; ++bx) acc += img.at(y * fy + by, x * fx + bx, c);
        out.at(y, x, c) = acc * inv;
      }
  return out;
}

ImageBuffer downscale_average_adjoint(const ImageBuffer& grad_out, std::size_t source_height,
                                      std::size_t source_width) {
  if (source_height % grad_out.height() != 0 || source_width % grad_out.width() != 0)
    throw DimensionError("downscale_average_adjoint: incompatible source size");
  const std::size_t fy = source_height / grad_out.height(), fx = source_width / grad_out.width();
  if (fy == 1 && fx == 1) return grad_out;
  const double inv = 1.0 / static_cast<double>(fy * fx);
  ImageBuffer out(source_height, source_width, grad_out.channels());
  for (std::size_t y = 0; y < source_height; ++y)
    for (std::size_t x = 0; x < source_width; ++x)
      for (std::size_t c = 0; c < grad_out.channels(); ++c) out.at(y, x, c) = grad_out.at(y / fy, x / fx, c) * inv;
  return out;
}

ImageBuffer circular_shift(const ImageBuffer& img, long dy, long dx) {
  const auto h = static_cast<long>(img.height()), w = static_cast<long>(img.width());
  const auto mod = [](long v, long m) { return ((v % m) + m) % m; };
  ImageBuffer out(img.height(), img.width(), img.channels());
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      const auto sy = static_cast<std::size_t>(mod(y - dy, h));
      const auto sx = static_cast<std::size_t>(mod(x - dx, w));
      for (std::size_t c = 0; c < img.channels(); ++c)
        out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = img.at(sy, sx, c);
    }
  return out;
}

bool within_unit_range(const ImageBuffer& img, double eps) {
  for (double v : img.values())
    if (!std::isfinite(v) || v < -1.0 - eps || v > 1.0 + eps) return false;
  return true;
}

}  // namespace inspire
