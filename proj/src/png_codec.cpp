#include "inspire/png_codec.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <string>

#include "inspire/errors.hpp"

namespace inspire {

std::uint8_t quantize_unit(double v) {
  if (!std::isfinite(v)) throw NumericError("encode_png: non-finite pixel value");
  const double scaled = std::round((v + 1.0) * 0.5 * 255.0);
  if (scaled <= 0.0) return 0;
  if (scaled >= 255.0) return 255;
  return static_cast<std::uint8_t>(scaled);
}

double dequantize_unit(std::uint8_t b) { return 2.0 * static_cast<double>(b) / 255.0 - 1.0; }

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  if (img.channels() != 3)
    throw DimensionError("encode_png: expected 3 channels, got " + std::to_string(img.channels()));
  std::vector<std::uint8_t> pixels(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) pixels[i] = quantize_unit(img.values()[i]);

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr))
    throw Error(std::string("encode_png: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr))
    throw Error(std::string("encode_png: ") + image.message);
  out.resize(size);
  return out;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (bytes.empty() || !png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw DecodeError(std::string("decode_png: ") + (bytes.empty() ? "empty input" : image.message));
  image.format = PNG_FORMAT_RGB;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw DecodeError("decode_png: zero-sized image");
  }
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError("decode_png: " + msg);
  }
  std::vector<double> values(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) values[i] = dequantize_unit(pixels[i]);
  return ImageBuffer(image.height, image.width, 3, std::move(values));
}

}  // namespace inspire
