#include <cassert>

#include "inspire/kernels.hpp"

namespace inspire::kernels::serial {

void affine(MatrixView w, std::span<const double> x, std::span<const double> b,
            std::span<double> out) {
  assert(x.size() == w.cols && out.size() == w.rows);
  for (std::size_t i = 0; i < w.rows; ++i) {
    double acc = b.empty() ? 0.0 : b[i];
    for (std::size_t j = 0; j < w.cols; ++j) acc += w.data[i * w.cols + j] * x[j];
    out[i] = acc;
  }
}

void affine_transpose(MatrixView w, std::span<const double> g, std::span<double> out) {
  assert(g.size() == w.rows && out.size() == w.cols);
  for (auto& v : out) v = 0.0;
  for (std::size_t i = 0; i < w.rows; ++i)
    for (std::size_t j = 0; j < w.cols; ++j) out[j] += w.data[i * w.cols + j] * g[i];
}

void conv3x3(GridShape s, std::span<const double> in, ConvBank bank, std::span<double> out) {
  assert(s.channels == bank.in_channels);
  const std::size_t h = s.height, wd = s.width, cin = bank.in_channels, cout = bank.out_channels;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < wd; ++x) {
      for (std::size_t k = 0; k < cout; ++k) {
        double acc = bank.bias.empty() ? 0.0 : bank.bias[k];
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t ky = 0; ky < 3; ++ky) {
            const std::size_t sy = (y + h + ky - 1) % h;
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const std::size_t sx = (x + wd + kx - 1) % wd;
              acc += bank.weights[((k * cin + c) * 3 + ky) * 3 + kx] * in[(sy * wd + sx) * cin + c];
            }
          }
        }
        out[(y * wd + x) * cout + k] = acc;
      }
    }
  }
}

void conv3x3_adjoint(GridShape s, std::span<const double> grad_out, ConvBank bank,
                     std::span<double> grad_in) {
  const std::size_t h = s.height, wd = s.width, cin = bank.in_channels, cout = bank.out_channels;
  for (auto& v : grad_in) v = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < wd; ++x) {
      for (std::size_t k = 0; k < cout; ++k) {
        const double g = grad_out[(y * wd + x) * cout + k];
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t ky = 0; ky < 3; ++ky) {
            const std::size_t sy = (y + h + ky - 1) % h;
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const std::size_t sx = (x + wd + kx - 1) % wd;
              grad_in[(sy * wd + sx) * cin + c] += bank.weights[((k * cin + c) * 3 + ky) * 3 + kx] * g;
            }
          }
        }
      }
    }
  }
}

void laplacian(GridShape s, std::span<const double> in, std::span<double> out) {
  const std::size_t h = s.height, wd = s.width, ch = s.channels;
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t up = (y + h - 1) % h, down = (y + 1) % h;
    for (std::size_t x = 0; x < wd; ++x) {
      const std::size_t left = (x + wd - 1) % wd, right = (x + 1) % wd;
      for (std::size_t c = 0; c < ch; ++c) {
        out[(y * wd + x) * ch + c] = in[(up * wd + x) * ch + c] + in[(down * wd + x) * ch + c] +
                                     in[(y * wd + left) * ch + c] + in[(y * wd + right) * ch + c] -
                                     4.0 * in[(y * wd + x) * ch + c];
      }
    }
  }
}

}  // namespace inspire::kernels::serial
