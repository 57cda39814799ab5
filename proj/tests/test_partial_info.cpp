#include <cmath>

#include "doctest.h"
#include "hmnss/errors.hpp"
#include "hmnss/experiment.hpp"
#include "hmnss/partial_info.hpp"

using namespace hmnss;

namespace {

Vec rand_vec(Rng& r, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = r.uniform(-2, 2);
  return v;
}

}  // namespace

TEST_CASE("psi through loops equals psi through selection matrices") {
  Rng r(1);
  for (int n : {2, 3, 6}) {
    const auto sel = build_selection(n);
    const Vec q = rand_vec(r, n), qh = rand_vec(r, n * n - n);
    CHECK((psi(q, qh, n) - psi_dense(q, qh, sel)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("the consensus point makes every estimate row equal q") {
  Rng r(2);
  const int n = 4;
  const Vec q = rand_vec(r, n);
  const Vec e = psi(q, consensus_point(q), n);
  for (int i = 0; i < n; ++i) CHECK((e.segment(i * n, n) - q).norm() == 0.0);
  const Layout lay{n, false, true};
  Vec x = Vec::Zero(lay.dim());
  x.head(n) = q;
  x.segment(lay.qhat(), n * n - n) = consensus_point(q);
  CHECK(consensus_error(lay, x) == 0.0);
}

TEST_CASE("H2 flow map matches the dense stacked form") {
  Rng r(3);
  const int n = 4;
  auto g = generate_random_game({n, 0.5, 2.0, false, 9, 1.0});
  const Graph graph = Graph::path(n);
  const Mat L = laplacian(graph);
  const auto sel = build_selection(n);
  const Mat Lbar = communication_matrix(L);
  const auto prm = HmNssParams::defaults(n, 0.4, 0.1, 1.0);
  const H2Params h2{0.05};
  const Layout lay{n, false, true};
  Vec x(lay.dim());
  x.setZero();
  x.head(2 * n) = rand_vec(r, 2 * n);
  for (int i = 0; i < n; ++i) x(lay.tau() + i) = r.uniform(0.1, 1.0);
  x.segment(lay.qhat(), n * n - n) = rand_vec(r, n * n - n);

  const Vec q = x.head(n), p = x.segment(n, n), tau = x.segment(2 * n, n);
  const Vec qh = x.segment(lay.qhat(), n * n - n);
  const Vec e = psi_dense(q, qh, sel);
  const Vec Le = Lbar * e;
  Vec ghat(n);
  for (int i = 0; i < n; ++i) ghat(i) = (g->A().row(i) * e.segment(i * n, n))(0) + g->b()(i);

  const Vec dx = flow_map_h2(*g, prm, h2, L, x);
  const Vec dq = 2.0 * (p - q).cwiseQuotient(tau) - sel.P * Le;
  const Vec dp = -2.0 * tau.cwiseProduct(ghat);
  const Vec dqh = -(1.0 / h2.epsilon) * (sel.Q * Le);
  CHECK((dx.head(n) - dq).norm() < 1e-12);
  CHECK((dx.segment(n, n) - dp).norm() < 1e-12);
  CHECK((dx.segment(2 * n, n) - Vec::Constant(n, 0.4)).norm() == 0.0);
  CHECK((dx.segment(lay.qhat(), n * n - n) - dqh).norm() < 1e-10);
}

TEST_CASE("at consensus H2 reduces to H1 and estimates are at rest") {
  Rng r(4);
  const int n = 3;
  auto g3 = generate_random_game({n, 1.0, 2.0, true, 1, 1.0});
  const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 1.0);
  const Layout lay{n, false, true};
  const Vec q = rand_vec(r, n), p = rand_vec(r, n);
  const Vec x = h2_initial(q, p, Vec::Constant(n, 0.5));
  Vec xc = x;
  xc.segment(lay.qhat(), n * n - n) = consensus_point(q);
  const Vec d2 = flow_map_h2(*g3, prm, {0.01}, laplacian(Graph::ring(n)), xc);
  const Vec d1 = flow_map_h1(*g3, prm, pack_h1(q, p, Vec::Constant(n, 0.5)));
  CHECK((d2.head(3 * n) - d1).norm() < 1e-12);
  CHECK(d2.segment(lay.qhat(), n * n - n).norm() < 1e-12);
}

TEST_CASE("H2 jumps leave the estimates untouched") {
  const int n = 3;
  const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 1.0);
  const Layout lay{n, false, true};
  Vec x = h2_initial(Vec::Ones(n), Vec::Zero(n), Vec::Constant(n, 0.1));
  x(lay.tau()) = 1.0;
  x.segment(lay.qhat(), n * n - n).setLinSpaced(n * n - n, -1.0, 1.0);
  const Vec before = x.segment(lay.qhat(), n * n - n);
  JumpSelector sel;
  jump_map_g2(prm, Graph::complete(n), lay, x, sel);
  CHECK(x.segment(lay.qhat(), n * n - n) == before);
  CHECK(x(lay.tau()) == 0.1);
}

TEST_CASE("h2 step resolves the fast time scale") {
  CHECK(h2_step(1e-2, {1e-2}) == doctest::Approx(1e-3));
  CHECK(h2_step(1e-4, {1e-2}) == 1e-4);
}

TEST_CASE("H2 approaches H1 as epsilon shrinks") {
  const int n = 3;
  auto g = generate_random_game({n, 1.0, 1.5, true, 21, 1.0});
  const Graph graph = Graph::ring(n);
  const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 1.0);
  Vec q0(n);
  q0 << 1.0, -1.0, 0.5;
  const Vec tau0 = Vec::Constant(n, 0.1);
  JumpSelector s1;
  const auto a1 = run(make_h1_system(g, graph, prm), pack_h1(q0, q0, tau0), Horizon{5.0}, 1e-3, s1, {}, {});
  double prev = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    JumpSelector s2;
    const auto a2 = run(make_h2_system(g, graph, prm, {eps}), h2_initial(q0, q0, tau0), Horizon{5.0},
                        h2_step(1e-3, {eps}), s2, {}, {});
    std::vector<int> cols;
    for (int c = 0; c < 3 * n; ++c) cols.push_back(c);
    HybridArc b;
    for (const auto& s : a2.samples) b.samples.push_back({s.t, s.j, s.x.head(3 * n)});
    const double c = closeness(a1, b, 5.0, 100);
    CHECK(c <= prev);
    prev = c;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("dimension checks") {
  CHECK_THROWS_AS(psi(Vec::Zero(3), Vec::Zero(5), 3), DomainError);
  auto g = catalog::example4();
  const auto prm = HmNssParams::defaults(2, 0.5, 0.1, 1.0);
  CHECK_THROWS_AS(flow_map_h2(*g, prm, {0.1}, laplacian(Graph::complete(2)), Vec::Zero(5)), DomainError);
  CHECK_THROWS_AS(make_h2_system(g, Graph::complete(3), prm, {0.1}), DomainError);
  CHECK_THROWS_AS(make_h2_system(g, Graph::complete(2), prm, {0.0}), DomainError);
}
