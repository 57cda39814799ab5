#pragma once

#include <cstddef>

// Dense vector primitives used on the integrator hot path. Every entry has a
// portable scalar reference; an AVX2/FMA table is chosen at runtime when the
// CPU supports it. HMNSS_KERNELS=scalar|avx2 overrides the choice.
namespace hmnss::kernels {

struct Table {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out = x + a*k
  void (*axpy_to)(const double* x, double a, const double* k, double* out, std::size_t n);
  // out = x + h/6 (k1 + 2k2 + 2k3 + k4)
  void (*rk4_combine)(const double* x, const double* k1, const double* k2, const double* k3,
                      const double* k4, double h, double* out, std::size_t n);
  // y = A x, A row-major rows x cols
  void (*matvec)(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols);
  // max |x_i|; NaN if any entry is NaN
  double (*max_abs)(const double* x, std::size_t n);
};

const Table& scalar();
// nullptr when the build or the CPU lacks AVX2+FMA
const Table* avx2();
const Table& active();
// "scalar", "avx2" or "auto"; returns false if the request cannot be honoured
bool select(const char* name);

}  // namespace hmnss::kernels
