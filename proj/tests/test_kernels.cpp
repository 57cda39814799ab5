#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "hmnss/kernels.hpp"
#include "hmnss/rng.hpp"

using namespace hmnss;

namespace {

std::vector<double> rand_vec(Rng& r, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.uniform(-3.0, 3.0);
  return v;
}

double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

void check_table(const kernels::Table& k) {
  Rng r(99);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 33u, 100u}) {
    CAPTURE(n);
    const auto a = rand_vec(r, n), b = rand_vec(r, n), c = rand_vec(r, n), d = rand_vec(r, n);
    CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(naive_dot(a, b)).epsilon(1e-13));

    auto y = b;
    k.axpy(0.7, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(b[i] + 0.7 * a[i]).epsilon(1e-15));

    std::vector<double> out(n);
    k.axpy_to(a.data(), -1.3, b.data(), out.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == doctest::Approx(a[i] - 1.3 * b[i]).epsilon(1e-15));

    const auto x = rand_vec(r, n);
    k.rk4_combine(x.data(), a.data(), b.data(), c.data(), d.data(), 0.01, out.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = x[i] + 0.01 / 6.0 * (a[i] + 2 * b[i] + 2 * c[i] + d[i]);
      CHECK(out[i] == doctest::Approx(e).epsilon(1e-14));
    }

    const std::size_t rows = n % 7 + 1;
    const auto A = rand_vec(r, rows * n);
    std::vector<double> yv(rows);
    k.matvec(A.data(), a.data(), yv.data(), rows, n);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::vector<double> row(A.begin() + i * n, A.begin() + (i + 1) * n);
      CHECK(yv[i] == doctest::Approx(naive_dot(row, a)).epsilon(1e-12));
    }

    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    CHECK(k.max_abs(a.data(), n) == m);
  }
}

}  // namespace

TEST_CASE("scalar kernels match naive loops") { check_table(kernels::scalar()); }

TEST_CASE("avx2 kernels match naive loops when available") {
  const auto* t = kernels::avx2();
  if (!t) {
    MESSAGE("AVX2 not available; skipped");
    return;
  }
  check_table(*t);
}

TEST_CASE("avx2 and scalar agree to rounding on long inputs") {
  const auto* t = kernels::avx2();
  if (!t) return;
  const auto& s = kernels::scalar();
  Rng r(5);
  const std::size_t n = 1001;
  const auto a = rand_vec(r, n), b = rand_vec(r, n);
  const double ds = s.dot(a.data(), b.data(), n), dv = t->dot(a.data(), b.data(), n);
  double mag = 0;
  for (std::size_t i = 0; i < n; ++i) mag += std::fabs(a[i] * b[i]);
  CHECK(std::fabs(ds - dv) <= 1e-14 * mag);
}

TEST_CASE("max_abs propagates NaN in every lane position") {
  for (const auto* t : {&kernels::scalar(), kernels::avx2()}) {
    if (!t) continue;
    for (std::size_t pos = 0; pos < 9; ++pos) {
      std::vector<double> v(9, 1.0);
      v[pos] = std::numeric_limits<double>::quiet_NaN();
      CHECK(std::isnan(t->max_abs(v.data(), v.size())));
    }
  }
}

TEST_CASE("kernel selection honours explicit requests") {
  const std::string before = kernels::active().name;
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  if (kernels::avx2()) {
    CHECK(kernels::select("avx2"));
    CHECK(std::string(kernels::active().name) == "avx2");
  } else {
    CHECK_FALSE(kernels::select("avx2"));
  }
  CHECK_FALSE(kernels::select("sse9"));
  CHECK(kernels::select(before.c_str()));
}
