#include <cmath>

#include "doctest.h"
#include "hmnss/errors.hpp"
#include "hmnss/experiment.hpp"
#include "hmnss/model_free.hpp"
#include "hmnss/network.hpp"
#include "hmnss/partial_info.hpp"
#include "hmnss/rng.hpp"

using namespace hmnss;

TEST_CASE("rational reduction") {
  const auto r = reduce({6, -4});
  CHECK(r.num == -3);
  CHECK(r.den == 2);
  CHECK(reduce({10, 10}).num == 1);
}

TEST_CASE("frequency separation rules") {
  CHECK(validate_frequencies({{3, 2}, {5, 2}, {7, 2}}));
  CHECK_FALSE(validate_frequencies({{1, 1}, {2, 1}}));
  CHECK_FALSE(validate_frequencies({{1, 1}, {3, 1}}));
  CHECK_FALSE(validate_frequencies({{1, 2}, {2, 4}}));
  CHECK(validate_frequencies({{10, 10}, {15, 10}, {19, 10}}));
  CHECK_THROWS_AS(validate_frequencies({{0, 1}}), DomainError);
  CHECK_THROWS_AS(validate_frequencies({{-1, 2}}), DomainError);
  CHECK_THROWS_AS(validate_frequencies({{1, 0}}), DomainError);
}

TEST_CASE("default frequencies are valid and skip clashes") {
  for (int n : {1, 2, 5, 10, 30}) {
    const auto f = default_frequencies(n);
    CHECK(static_cast<int>(f.size()) == n);
    CHECK(validate_frequencies(f));
  }
  const auto f = default_frequencies(4);
  // 3/2, 5/2, 7/2, then 9/2 = 3 * 3/2 is skipped
  CHECK(f[0].num == 3);
  CHECK(f[3].num == 11);
}

TEST_CASE("common period") {
  const auto p = common_period({{3, 2}, {5, 2}});
  CHECK(p.value() == 2.0);
  const auto q = common_period({{10, 10}, {11, 10}, {12, 10}});
  CHECK(q.value() == 10.0);
  for (const auto& f : std::vector<Rational>{{10, 10}, {11, 10}, {12, 10}}) {
    const double cycles = f.value() * q.value();
    CHECK(cycles == doctest::Approx(std::round(cycles)));
  }
}

TEST_CASE("oscillators follow the closed-form rotation and keep unit norm") {
  const int n = 3;
  auto g = catalog::logcosh(n);
  const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 100.0);
  for (double eps_p : {1.0, 1e-2}) {
  const OscillatorBank bank{default_frequencies(n), eps_p, 0.1};
  const auto sys = make_h3_system(g, Graph::complete(n), prm, bank);
  const Layout lay{n, true, false};
  Vec x0 = Vec::Zero(lay.dim());
  x0.segment(lay.tau(), n).setConstant(0.1);
  x0.segment(lay.mu(), 2 * n) = oscillator_initial(n);
  JumpSelector sel;
  const double tend = 20.0;
  const auto arc = run(sys, x0, Horizon{tend}, h3_step(1e-3, bank), sel, {}, {});
  const Vec& x = arc.samples.back().x;
  double drift = 0.0;
  for (const auto& s : arc.samples)
    for (int i = 0; i < n; ++i)
      drift = std::max(drift, std::fabs(std::hypot(s.x(lay.mu() + 2 * i), s.x(lay.mu() + 2 * i + 1)) - 1.0));
  CHECK(drift <= 1e-9);
  // phase error of the integrator stays small only when the dithers are slow
  if (eps_p < 1.0) continue;
  for (int i = 0; i < n; ++i) {
    const double w = 2.0 * M_PI * bank.freqs[i].value() / bank.eps_p;
    CHECK(x(lay.mu() + 2 * i) == doctest::Approx(std::sin(w * tend)).epsilon(1e-6));
    CHECK(x(lay.mu() + 2 * i + 1) == doctest::Approx(std::cos(w * tend)).epsilon(1e-6));
  }
  }
}

TEST_CASE("renormalize projects onto the circle") {
  double mu[4] = {3.0, 4.0, 0.0, 0.0};
  renormalize(mu, 2);
  CHECK(mu[0] == doctest::Approx(0.6));
  CHECK(mu[1] == doctest::Approx(0.8));
  CHECK(mu[2] == 0.0);
}

TEST_CASE("H3 flow map from cost values only") {
  const int n = 2;
  auto g = catalog::example4();
  const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 1.0);
  const OscillatorBank bank{default_frequencies(n), 1e-2, 0.1};
  const Layout lay{n, true, false};
  Vec x(lay.dim());
  x << 1.0, -1.0, 0.5, 0.2, 0.3, 0.6, 0.6, 0.8, -1.0, 0.0;
  const Vec dx = flow_map_h3(g->cost_oracle(), prm, bank, x);
  Vec xd(2);
  xd << 1.0 + 0.1 * 0.6, -1.0 + 0.1 * -1.0;
  for (int i = 0; i < n; ++i) {
    const double mt = x(lay.mu() + 2 * i);
    CHECK(dx(i) == doctest::Approx(2.0 * (x(n + i) - x(i)) / x(2 * n + i)));
    CHECK(dx(n + i) == doctest::Approx(-(4.0 / 0.1) * x(2 * n + i) * g->cost(i, xd) * mt));
    CHECK(dx(2 * n + i) == 0.5);
  }
  const double w0 = 2.0 * M_PI * 1.5 / 1e-2;
  CHECK(dx(lay.mu()) == doctest::Approx(w0 * 0.8));
  CHECK(dx(lay.mu() + 1) == doctest::Approx(-w0 * 0.6));
}

TEST_CASE("dither average of quadratic costs is the pseudogradient") {
  // products of three half-odd dithers never resonate, so the average is exact
  auto g = generate_random_game({4, 0.5, 2.0, false, 12, 2.0});
  const OscillatorBank bank{default_frequencies(4), 1.0, 0.2};
  Rng r(3);
  for (int k = 0; k < 5; ++k) {
    Vec q(4);
    for (int i = 0; i < 4; ++i) q(i) = r.uniform(-2, 2);
    const Vec avg = dither_average(g->cost_oracle(), bank, oscillator_initial(4), q);
    CHECK((avg - g->pseudogradient(q)).norm() < 1e-9);
  }
}

TEST_CASE("dither average of a non-quadratic game converges as eps_a shrinks") {
  auto g = catalog::logcosh(3);
  Vec q(3);
  q << 0.4, -0.3, 0.9;
  double prev = 1e300;
  for (double ea : {0.4, 0.2, 0.1, 0.05}) {
    const OscillatorBank bank{default_frequencies(3), 1.0, ea};
    const double err = (dither_average(g->cost_oracle(), bank, oscillator_initial(3), q) -
                        g->pseudogradient(q)).norm();
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("H4 against H3 at consensus") {
  const int n = 3;
  auto g = generate_random_game({n, 0.5, 1.0, false, 4, 1.0});
  const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 1.0);
  const OscillatorBank bank{default_frequencies(n), 1e-2, 0.1};
  const Layout l3{n, true, false}, l4{n, true, true};
  Vec x3(l3.dim());
  x3 << 0.1, 0.2, 0.3, 0.0, 0.5, -0.1, 0.2, 0.4, 0.9, 0.0, 1.0, 1.0, 0.0, 0.6, 0.8;
  const Mat L = laplacian(Graph::ring(n));
  const Vec d3 = flow_map_h3(g->cost_oracle(), prm, bank, x3);
  Vec x4(l4.dim());
  // estimates agree with the undithered actions: every block but p matches
  x4 << x3, consensus_point(x3.head(n));
  Vec d4 = flow_map_h4(g->cost_oracle(), prm, bank, 0.1, L, x4);
  CHECK((d4.head(n) - d3.head(n)).norm() < 1e-12);
  CHECK((d4.segment(2 * n, 3 * n) - d3.segment(2 * n, 3 * n)).norm() < 1e-12);
  CHECK(d4.tail(n * n - n).norm() < 1e-12);
  // the p block sees other players' dithers only through H3
  CHECK((d4.segment(n, n) - d3.segment(n, n)).norm() < 4.0 * 0.9 * 1.0 * 2.0);
  // estimates that track the dithered actions give the same p block
  Vec qd(n);
  for (int i = 0; i < n; ++i) qd(i) = x3(i) + bank.eps_a * x3(l3.mu() + 2 * i);
  x4 << x3, consensus_point(qd);
  d4 = flow_map_h4(g->cost_oracle(), prm, bank, 0.1, L, x4);
  CHECK((d4.segment(n, n) - d3.segment(n, n)).norm() < 1e-12);
}

TEST_CASE("H4 against a dense-matrix oracle") {
  const int n = 2;
  auto g = catalog::example4();
  const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 1.0);
  const OscillatorBank bank{default_frequencies(n), 1e-2, 0.1};
  const Layout lay{n, true, true};
  Vec x(lay.dim());
  x << 1.0, -1.0, 0.5, 0.2, 0.3, 0.6, 0.6, 0.8, -1.0, 0.0, 0.7, -0.4;
  const Mat L = laplacian(Graph::complete(n));
  const double eps_c = 0.05;
  const Vec d = flow_map_h4(g->cost_oracle(), prm, bank, eps_c, L, x);
  const auto sel = build_selection(n);
  const Mat Lbig = communication_matrix(L);
  const Vec q = x.head(n), p = x.segment(n, n), tau = x.segment(2 * n, n);
  const Vec qhat = x.tail(n * n - n);
  const Vec LE = Lbig * psi_dense(q, qhat, sel);
  Vec qd(n), mt(n);
  for (int i = 0; i < n; ++i) {
    mt(i) = x(lay.mu() + 2 * i);
    qd(i) = q(i) + bank.eps_a * mt(i);
  }
  const Vec E = psi_dense(qd, qhat, sel);
  const Vec dq = (2.0 * (p - q).array() / tau.array()).matrix() - sel.P * LE;
  const Vec dqh = -(1.0 / eps_c) * (sel.Q * LE);
  for (int i = 0; i < n; ++i) {
    CHECK(std::fabs(d(i) - dq(i)) < 1e-12);
    const double phi = g->cost(i, E.segment(i * n, n));
    CHECK(std::fabs(d(n + i) - (-(4.0 / bank.eps_a) * tau(i) * phi * mt(i))) < 1e-12);
  }
  CHECK((d.tail(n * n - n) - dqh).norm() < 1e-12);
  // halving eps_c only doubles the estimate block
  const Vec d2 = flow_map_h4(g->cost_oracle(), prm, bank, eps_c / 2, L, x);
  CHECK((d2.head(lay.qhat()) - d.head(lay.qhat())).norm() == 0.0);
  CHECK((d2.tail(n * n - n) - 2.0 * d.tail(n * n - n)).norm() < 1e-12);
}

TEST_CASE("parameter helpers") {
  const OscillatorBank bank{{{3, 2}, {5, 2}}, 1e-3, 0.1};
  CHECK(bank.max_freq() == 2.5);
  CHECK(h3_step(1.0, bank) == doctest::Approx(1e-3 / (50 * 2.5)));
  CHECK(small_parameter_order_inverted(0.1, 0.01, 0.2));
  CHECK_FALSE(small_parameter_order_inverted(0.001, 0.01, 0.2));
  auto g = catalog::example4();
  const auto prm = HmNssParams::defaults(2, 0.5, 0.1, 1.0);
  CHECK_THROWS_AS(make_h3_system(g, Graph::complete(2), prm, {{{1, 1}, {2, 1}}, 1e-3, 0.1}), DomainError);
  CHECK_THROWS_AS(make_h3_system(g, Graph::complete(2), prm, {{{1, 1}}, 1e-3, 0.1}), DomainError);
  Vec x = Vec::Zero(6);
  x.tail(2).setConstant(0.5);
  CHECK(average_flow_oracle(*g, prm, x) == flow_map_h1(*g, prm, x));
}
