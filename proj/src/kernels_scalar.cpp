#include "hmnss/kernels.hpp"

#include <cmath>

namespace hmnss::kernels {
namespace {

double dot_s(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_s(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy_to_s(const double* x, double a, const double* k, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * k[i];
}

void rk4_combine_s(const double* x, const double* k1, const double* k2, const double* k3,
                   const double* k4, double h, double* out, std::size_t n) {
  const double c = h / 6.0;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void matvec_s(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_s(A + r * cols, x, cols);
}

double max_abs_s(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a != a) return a;
    if (a > m) m = a;
  }
  return m;
}

const Table kScalar{"scalar", dot_s, axpy_s, axpy_to_s, rk4_combine_s, matvec_s, max_abs_s};

}  // namespace

const Table& scalar() { return kScalar; }

}  // namespace hmnss::kernels
