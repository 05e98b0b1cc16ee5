#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "inspire/kernels.hpp"

namespace inspire {

// H x W x C grid of doubles, row-major and channel-interleaved. Pixel
// values live in [-1, 1] for anything produced by a generator or decoder.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(std::size_t height, std::size_t width, std::size_t channels = 3, double fill = 0.0);
  ImageBuffer(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t pixel_count() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  kernels::GridShape shape() const { return {height_, width_, channels_}; }
  bool same_shape(const ImageBuffer& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  double& at(std::size_t y, std::size_t x, std::size_t c) { return data_[(y * width_ + x) * channels_ + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * width_ + x) * channels_ + c];
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

// Throws DimensionError unless both images have the same shape.
void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what);

// Block-average downsampling to a target_side x target_side image.
// Requires target_side to divide both height and width.
ImageBuffer downscale_average(const ImageBuffer& img, std::size_t target_side);

// Adjoint of downscale_average: spreads each output gradient evenly over
// its source block.
ImageBuffer downscale_average_adjoint(const ImageBuffer& grad_out, std::size_t source_height,
                                      std::size_t source_width);

// out(y, x, c) = in((y - dy) mod H, (x - dx) mod W, c).
ImageBuffer circular_shift(const ImageBuffer& img, long dy, long dx);

// True iff every value is finite and inside [-1 - eps, 1 + eps].
bool within_unit_range(const ImageBuffer& img, double eps = 1e-6);

}  // namespace inspire
