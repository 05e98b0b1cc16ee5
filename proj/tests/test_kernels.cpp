#include <gtest/gtest.h>

#include <omp.h>

#include <random>
#include <vector>

#include "inspire/kernels.hpp"

namespace k = inspire::kernels;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Several threads even on a single core, and shapes above the parallel
// threshold, so the omp paths actually split work.
class KernelParity : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }
  int saved_ = 1;
};

}  // namespace

TEST_P(KernelParity, AffineBitIdentical) {
  const std::size_t rows = 3072, cols = 64;
  const auto w = noise(rows * cols, 1), x = noise(cols, 2), b = noise(rows, 3);
  std::vector<double> a(rows), c(rows);
  k::serial::affine({w, rows, cols}, x, b, a);
  k::omp::affine({w, rows, cols}, x, b, c);
  EXPECT_EQ(a, c);
  k::serial::affine({w, rows, cols}, x, {}, a);
  k::omp::affine({w, rows, cols}, x, {}, c);
  EXPECT_EQ(a, c);
}

TEST_P(KernelParity, AffineTransposeAgrees) {
  const std::size_t rows = 3072, cols = 64;
  const auto w = noise(rows * cols, 4), g = noise(rows, 5);
  std::vector<double> a(cols), c(cols);
  k::serial::affine_transpose({w, rows, cols}, g, a);
  k::omp::affine_transpose({w, rows, cols}, g, c);
  for (std::size_t i = 0; i < cols; ++i) EXPECT_NEAR(a[i], c[i], 1e-10);
}

TEST_P(KernelParity, ConvBitIdenticalAndAdjointAgrees) {
  const k::GridShape shape{32, 32, 8};
  const std::size_t cout = 8;
  const auto in = noise(shape.size(), 6), w = noise(cout * 8 * 9, 7), b = noise(cout, 8);
  const k::ConvBank bank{w, b, 8, cout};
  std::vector<double> a(32 * 32 * cout), c(a.size());
  k::serial::conv3x3(shape, in, bank, a);
  k::omp::conv3x3(shape, in, bank, c);
  EXPECT_EQ(a, c);

  const auto g = noise(a.size(), 9);
  std::vector<double> ga(shape.size()), gc(shape.size());
  k::serial::conv3x3_adjoint(shape, g, bank, ga);
  k::omp::conv3x3_adjoint(shape, g, bank, gc);
  for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_NEAR(ga[i], gc[i], 1e-10);
}

TEST_P(KernelParity, LaplacianBitIdentical) {
  const k::GridShape shape{64, 64, 3};
  const auto in = noise(shape.size(), 10);
  std::vector<double> a(shape.size()), c(shape.size());
  k::serial::laplacian(shape, in, a);
  k::omp::laplacian(shape, in, c);
  EXPECT_EQ(a, c);
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelParity, ::testing::Values(1, 3, 4));

TEST(Kernels, ConvMatchesDirectSum) {
  const k::GridShape shape{5, 4, 2};
  const std::size_t cout = 3;
  const auto in = noise(shape.size(), 11), w = noise(cout * 2 * 9, 12), b = noise(cout, 13);
  std::vector<double> out(5 * 4 * cout);
  k::serial::conv3x3(shape, in, {w, b, 2, cout}, out);
  for (std::size_t y = 0; y < 5; ++y)
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t o = 0; o < cout; ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < 2; ++i)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const std::size_t yy = (y + 5 + ky - 1) % 5, xx = (x + 4 + kx - 1) % 4;
              s += w[((o * 2 + i) * 3 + ky) * 3 + kx] * in[(yy * 4 + xx) * 2 + i];
            }
        EXPECT_NEAR(out[(y * 4 + x) * cout + o], s, 1e-12);
      }
}

TEST(Kernels, AdjointsSatisfyInnerProductIdentity) {
  const std::size_t rows = 20, cols = 7;
  const auto w = noise(rows * cols, 14), x = noise(cols, 15), g = noise(rows, 16);
  std::vector<double> wx(rows), wtg(cols);
  k::omp::affine({w, rows, cols}, x, {}, wx);
  k::omp::affine_transpose({w, rows, cols}, g, wtg);
  EXPECT_NEAR(dot(wx, g), dot(x, wtg), 1e-11);

  const k::GridShape shape{6, 5, 3};
  const std::size_t cout = 4;
  const auto in = noise(shape.size(), 17), cw = noise(cout * 3 * 9, 18), gy = noise(6 * 5 * cout, 19);
  const std::vector<double> zero_bias(cout, 0.0);
  std::vector<double> y(gy.size()), gx(shape.size());
  k::omp::conv3x3(shape, in, {cw, zero_bias, 3, cout}, y);
  k::omp::conv3x3_adjoint(shape, gy, {cw, zero_bias, 3, cout}, gx);
  EXPECT_NEAR(dot(y, gy), dot(in, gx), 1e-11);
}

TEST(Kernels, LaplacianOfConstantIsZeroAndSelfAdjoint) {
  const k::GridShape shape{4, 6, 3};
  std::vector<double> c(shape.size(), 0.7), out(shape.size());
  k::omp::laplacian(shape, c, out);
  for (double v : out) EXPECT_NEAR(v, 0.0, 1e-15);

  const auto a = noise(shape.size(), 20), b = noise(shape.size(), 21);
  std::vector<double> la(a.size()), lb(b.size());
  k::omp::laplacian(shape, a, la);
  k::omp::laplacian(shape, b, lb);
  EXPECT_NEAR(dot(la, b), dot(a, lb), 1e-12);
}
