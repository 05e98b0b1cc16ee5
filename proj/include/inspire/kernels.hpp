#pragma once

// Dense inner loops shared by the toy generators, the feature extractor and
// the smoothness discriminator.
//
// Two implementations with identical signatures live side by side:
//   kernels::serial  straightforward loops, kept as the reference for tests
//   kernels::omp     OpenMP versions, parallel over independent outputs
//
// The omp kernels never reduce across threads, so each output is summed in
// a fixed order and results do not depend on the thread count. Forward
// kernels are bit-identical to the serial reference; the adjoint kernels
// use gather form and agree with the scatter-form reference to rounding.
// Library code calls the omp versions.

#include <cstddef>
#include <span>

namespace inspire::kernels {

// Row-major dense matrix view.
struct MatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Channel-interleaved H x W x C grid view.
struct GridShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t size() const { return height * width * channels; }
};

// 3x3 kernel bank, index ((out * in_channels + in) * 3 + ky) * 3 + kx where
// ky, kx in {0,1,2} stand for offsets -1, 0, +1.
struct ConvBank {
  std::span<const double> weights;
  std::span<const double> bias;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
};

// Work below this many multiply-adds stays on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

#define INSPIRE_KERNEL_DECLS                                                              \
  /* out = W x + b (b may be empty) */                                                   \
  void affine(MatrixView w, std::span<const double> x, std::span<const double> b,        \
              std::span<double> out);                                                    \
  /* out = W^T g */                                                                      \
  void affine_transpose(MatrixView w, std::span<const double> g, std::span<double> out); \
  /* circular 3x3 convolution (cross-correlation), out has bank.out_channels */          \
  void conv3x3(GridShape in_shape, std::span<const double> in, ConvBank bank,            \
               std::span<double> out);                                                   \
  /* adjoint of conv3x3 w.r.t. its input; bias does not contribute */                    \
  void conv3x3_adjoint(GridShape in_shape, std::span<const double> grad_out,             \
                       ConvBank bank, std::span<double> grad_in);                        \
  /* circular 5-point Laplacian applied per channel */                                   \
  void laplacian(GridShape shape, std::span<const double> in, std::span<double> out);

namespace serial {
INSPIRE_KERNEL_DECLS
}  // namespace serial

namespace omp {
INSPIRE_KERNEL_DECLS
}  // namespace omp

#undef INSPIRE_KERNEL_DECLS

}  // namespace inspire::kernels
