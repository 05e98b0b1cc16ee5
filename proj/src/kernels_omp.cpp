#include <cassert>
#include <cstdint>

#include "inspire/kernels.hpp"

namespace inspire::kernels::omp {

void affine(MatrixView w, std::span<const double> x, std::span<const double> b,
            std::span<double> out) {
  assert(x.size() == w.cols && out.size() == w.rows);
  const auto rows = static_cast<std::int64_t>(w.rows);
  const std::size_t cols = w.cols;
  const bool wide = w.rows * w.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    double acc = b.empty() ? 0.0 : b[r];
    const double* row = w.data.data() + r * cols;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    out[r] = acc;
  }
}

void affine_transpose(MatrixView w, std::span<const double> g, std::span<double> out) {
  assert(g.size() == w.rows && out.size() == w.cols);
  const auto cols = static_cast<std::int64_t>(w.cols);
  const std::size_t rows = w.rows;
  const bool wide = w.rows * w.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t jj = 0; jj < cols; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += w.data[i * w.cols + j] * g[i];
    out[j] = acc;
  }
}

void conv3x3(GridShape s, std::span<const double> in, ConvBank bank, std::span<double> out) {
  assert(s.channels == bank.in_channels);
  const std::size_t h = s.height, wd = s.width, cin = bank.in_channels, cout = bank.out_channels;
  const bool wide = h * wd * cin * cout * 9 >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t yy = 0; yy < static_cast<std::int64_t>(h); ++yy) {
    const auto y = static_cast<std::size_t>(yy);
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
  const bool wide = h * wd * cin * cout * 9 >= kParallelThreshold;
  // Gather form: input pixel (y, x) received contributions from output
  // (y - dy, x - dx) for every tap offset (dy, dx).
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t yy = 0; yy < static_cast<std::int64_t>(h); ++yy) {
    const auto y = static_cast<std::size_t>(yy);
    for (std::size_t x = 0; x < wd; ++x) {
      for (std::size_t c = 0; c < cin; ++c) {
        double acc = 0.0;
        for (std::size_t ky = 0; ky < 3; ++ky) {
          const std::size_t oy = (y + h + 1 - ky) % h;
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const std::size_t ox = (x + wd + 1 - kx) % wd;
            const double* g = grad_out.data() + (oy * wd + ox) * cout;
            for (std::size_t k = 0; k < cout; ++k)
              acc += bank.weights[((k * cin + c) * 3 + ky) * 3 + kx] * g[k];
          }
        }
        grad_in[(y * wd + x) * cin + c] = acc;
      }
    }
  }
}

void laplacian(GridShape s, std::span<const double> in, std::span<double> out) {
  const std::size_t h = s.height, wd = s.width, ch = s.channels;
  const bool wide = s.size() * 5 >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t yy = 0; yy < static_cast<std::int64_t>(h); ++yy) {
    const auto y = static_cast<std::size_t>(yy);
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

}  // namespace inspire::kernels::omp
