#include <cmath>

#include "doctest.h"
#include "hmnss/errors.hpp"
#include "hmnss/hm_nss.hpp"
#include "hmnss/rng.hpp"

using namespace hmnss;

namespace {

HybridArc run_h1(GamePtr g, const Graph& graph, const HmNssParams& prm, const Vec& x0, double T,
                 double h = 1e-3, JumpPolicyKind pol = JumpPolicyKind::LowestIndex, std::uint64_t seed = 0) {
  const auto sys = make_h1_system(g, graph, prm);
  JumpSelector sel(pol, seed);
  return run(sys, x0, Horizon{T}, h, sel, {}, {});
}

}  // namespace

TEST_CASE("H1 flow map matches the momentum equations") {
  auto g = catalog::duopoly();
  const auto prm = HmNssParams::defaults(2, 0.5, 0.1, 1.0);
  Vec x(6);
  x << 1.0, 2.0, 3.0, -1.0, 0.2, 0.7;
  const Vec dx = flow_map_h1(*g, prm, x);
  // G = A q + b
  const double g1 = 10 * 1.0 - 5 * 2.0 - 250, g2 = -5 * 1.0 + 10 * 2.0 - 150;
  CHECK(dx(0) == doctest::Approx(2.0 / 0.2 * (3.0 - 1.0)));
  CHECK(dx(1) == doctest::Approx(2.0 / 0.7 * (-1.0 - 2.0)));
  CHECK(dx(2) == doctest::Approx(-2.0 * 0.2 * g1));
  CHECK(dx(3) == doctest::Approx(-2.0 * 0.7 * g2));
  CHECK(dx(4) == 0.5);
  CHECK(dx(5) == 0.5);
  x(4) = 0.0;
  CHECK_THROWS_AS(flow_map_h1(*g, prm, x), DomainError);
}

TEST_CASE("reset map: alpha 0 kills momentum, alpha 1 keeps p") {
  auto prm = HmNssParams::defaults(2, 0.5, 0.1, 1.0);
  prm.alpha << 0.0, 1.0;
  const auto a = reset_map(prm, {2.0, 5.0, 1.0}, 0);
  CHECK(a.q == 2.0);
  CHECK(a.p == 2.0);
  CHECK(a.tau == 0.1);
  const auto b = reset_map(prm, {2.0, 5.0, 1.0}, 1);
  CHECK(b.p == 5.0);
  CHECK(b.tau == 0.1);
}

TEST_CASE("coordination map thresholds") {
  const auto prm = HmNssParams::defaults(4, 0.5, 0.1, 0.9);  // r = 0.1
  CHECK(coordination_map(prm, 0.15, 0) == std::vector<double>{0.1});
  CHECK(coordination_map(prm, 0.25, 0) == std::vector<double>{0.9});
  CHECK(coordination_map(prm, 0.2, 0) == std::vector<double>{0.1, 0.9});
  CHECK_THROWS_AS(coordination_map(prm, 1.5, 0), DomainError);
}

TEST_CASE("parameter validation") {
  auto p = HmNssParams::defaults(3, 0.5, 0.1, 1.0);
  CHECK_NOTHROW(p.validate(3));
  CHECK_THROWS_AS(p.validate(2), DomainError);
  auto q = p;
  q.eta = 0.6;
  CHECK_THROWS_AS(q.validate(3), DomainError);
  q = p;
  q.T = 0.05;
  CHECK_THROWS_AS(q.validate(3), DomainError);
  q = p;
  q.alpha(1) = 0.5;
  CHECK_THROWS_AS(q.validate(3), DomainError);
  q = p;
  q.r(0) = 0.9 / 3.0;
  CHECK_THROWS_AS(q.validate(3), DomainError);
  CHECK(p.flow_length() == doctest::Approx(1.8));
  CHECK(p.sync_time(3) == doctest::Approx(4.8));
}

TEST_CASE("one jump on a path graph: reset plus pulses") {
  const Graph g = Graph::path(3);
  const auto prm = HmNssParams::defaults(3, 0.5, 0.1, 1.0);  // r = 0.15, threshold 0.25
  const Layout lay{3, false, false};
  Vec x(9);
  x << 1, 2, 3, 4, 5, 6, 1.0, 0.2, 0.5;
  JumpSelector sel;
  const auto o = jump_map_g1(prm, g, lay, x, sel);
  CHECK(o.player == 0);
  CHECK(x(3) == 1.0);  // p_1 <- q_1
  CHECK(x(6) == 0.1);
  CHECK(x(7) == 0.1);  // neighbour below threshold -> T0
  CHECK(x(8) == 0.5);  // not a neighbour of player 1
  CHECK(x(4) == 5.0);  // neighbour p untouched
}

TEST_CASE("neighbour above threshold is pushed to T and jumps next") {
  const Graph g = Graph::complete(3);
  const auto prm = HmNssParams::defaults(3, 0.5, 0.1, 1.0);
  const auto sys = make_h1_system(catalog::logcosh(3), g, prm);
  Vec x(9);
  x << 0, 0, 0, 0, 0, 0, 1.0, 0.8, 0.15;
  JumpSelector sel;
  sys.jump(x, sel);
  CHECK(x(6) == 0.1);
  CHECK(x(7) == 1.0);
  CHECK(x(8) == 0.1);
  CHECK(sys.jump_set(x));
  sys.jump(x, sel);
  CHECK(x.segment(6, 3).maxCoeff() == 0.1);
  CHECK_FALSE(sys.jump_set(x));
}

TEST_CASE("every enumerated cascade ends synchronized below T") {
  Rng r(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(r.index(3));
    const Graph g = n == 2 ? Graph::complete(2) : (trial % 2 ? Graph::ring(n) : Graph::complete(n));
    const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 1.0);
    const Layout lay{n, false, false};
    Vec x = Vec::Zero(3 * n);
    for (int i = 0; i < n; ++i) x(2 * n + i) = r.uniform(0.1, 1.0);
    x(2 * n + static_cast<int>(r.index(n))) = 1.0;
    const auto outs = enumerate_cascades(prm, g, lay, x);
    CHECK(!outs.empty());
    for (const auto& y : outs) CHECK(y.segment(2 * n, n).maxCoeff() < prm.T);
  }
}

TEST_CASE("a tie at the threshold enumerates both branches") {
  const Graph g = Graph::complete(2);
  const auto prm = HmNssParams::defaults(2, 0.5, 0.1, 0.9);  // threshold 0.3
  const Layout lay{2, false, false};
  Vec x = Vec::Zero(6);
  x(4) = 0.9;
  x(5) = 0.3;
  const auto outs = enumerate_cascades(prm, g, lay, x);
  CHECK(outs.size() == 1);  // both branches end at (T0, T0)
  CHECK(outs[0](4) == 0.1);
  CHECK(outs[0](5) == 0.1);
  JumpSelector sel;
  Vec y = x;
  const auto o = jump_map_g1(prm, g, lay, y, sel);
  CHECK(o.branch.find("tie 2->T") != std::string::npos);
  CHECK_THROWS_AS(enumerate_cascades(prm, Graph::complete(5), Layout{5, false, false}, Vec::Zero(15)),
                  PreconditionError);
}

TEST_CASE("distance to the synchronization set") {
  Vec t(3);
  t << 0.1, 1.0, 0.1;
  CHECK(dist_to_sync(t, 0.1, 1.0) < 1e-15);
  t << 0.4, 0.4, 0.4;
  CHECK(dist_to_sync(t, 0.1, 1.0) < 1e-15);
  t << 0.3, 0.5, 0.4;
  // diagonal projection (0.4, 0.4, 0.4): sqrt(0.02); corners farther
  CHECK(dist_to_sync(t, 0.1, 1.0) == doctest::Approx(std::sqrt(0.02)));
}

TEST_CASE("timers synchronize after (T-T0)/eta + n") {
  Rng r(11);
  for (int n : {3, 4, 6}) {
    const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 1.0);
    Vec x0 = Vec::Zero(3 * n);
    for (int i = 0; i < n; ++i) {
      x0(i) = r.uniform(-1, 1);
      x0(n + i) = x0(i);
      x0(2 * n + i) = r.uniform(0.1, 1.0);
    }
    const auto arc = run_h1(catalog::logcosh(n), Graph::ring(n), prm, x0, 10.0, 1e-2);
    CHECK(arc.well_formed());
    CHECK_FALSE(arc.zeno_tripped);
    const Layout lay{n, false, false};
    for (const auto& s : arc.samples) {
      const Vec tau = s.x.segment(lay.tau(), n);
      CHECK(tau.minCoeff() >= prm.T0 - 1e-9);
      CHECK(tau.maxCoeff() <= prm.T + 1e-9);
      if (s.t + s.j >= prm.sync_time(n)) CHECK(dist_to_sync(tau, prm.T0, prm.T) <= 1e-6);
    }
  }
}

TEST_CASE("pseudogradient flow matches the closed form for example 4") {
  auto g = catalog::example4();
  const auto sys = make_psg_flow(g);
  Vec q0(2);
  q0 << -3.0, 4.0;
  JumpSelector sel;
  const auto arc = run(sys, q0, Horizon{1.0}, 1e-3, sel, {}, {});
  // exp(-A t) = e^{-6t} (cos(1.5t) I - sin(1.5t) J), J = [0 1; -1 0]
  const double t = 1.0, c = std::cos(1.5 * t), s = std::sin(1.5 * t), e = std::exp(-6.0 * t);
  const Vec d0 = q0 - g->known_ne[0];
  Vec d(2);
  d << e * (c * d0(0) - s * d0(1)), e * (s * d0(0) + c * d0(1));
  const Vec q1 = arc.samples.back().x;
  CHECK((q1 - g->known_ne[0] - d).norm() < 1e-10);
}

TEST_CASE("baseline ODE carries tau = T0 + eta t in every copy") {
  auto g = catalog::duopoly();
  const auto sys = make_baseline_ode(g, 0.5);
  const Vec x0 = baseline_initial(Vec::Zero(2), Vec::Zero(2), 0.01);
  JumpSelector sel;
  const auto arc = run(sys, x0, Horizon{2.0}, 1e-3, sel, {}, {});
  CHECK(arc.events.empty());
  CHECK(arc.samples.back().x(4) == doctest::Approx(1.01));
  CHECK(arc.samples.back().x(5) == doctest::Approx(1.01));
  CHECK(baseline_initial(Vec::Zero(2), Vec::Zero(2), 0.0)(4) == kTauFloor);
}

TEST_CASE("perturbation targets") {
  auto g = catalog::duopoly();
  Vec q(2);
  q << 1.0, 1.0;
  const double e[2] = {0.5, -0.5};
  double out[2], work[2];
  const Vec G = g->pseudogradient(q);
  perturbed_gradient(*g, q.data(), e, PerturbationTarget::Output, out, work);
  CHECK(out[0] == doctest::Approx(G(0) + 0.5));
  perturbed_gradient(*g, q.data(), e, PerturbationTarget::Input, out, work);
  Vec qe(2);
  qe << 1.5, 0.5;
  CHECK(out[0] == doctest::Approx(g->pseudogradient(qe)(0)));
  perturbed_gradient(*g, q.data(), e, PerturbationTarget::Both, out, work);
  CHECK(out[1] == doctest::Approx(g->pseudogradient(qe)(1) - 0.5));
}

TEST_CASE("H1 converges on a strongly monotone potential game") {
  auto g = catalog::duopoly();
  const auto prm = HmNssParams::defaults(2, 0.5, 0.01, 0.12);
  const Vec x0 = pack_h1(Vec::Zero(2), Vec::Zero(2), Vec::Constant(2, 0.01));
  const auto arc = run_h1(g, Graph::complete(2), prm, x0, 60.0);
  CHECK(dist_to_ne(*g, arc.samples.back().x.head(2)) < 1e-6);
}

TEST_CASE("random jump selection gives a well-formed arc") {
  const int n = 4;
  const auto prm = HmNssParams::defaults(n, 0.5, 0.1, 1.0);
  Vec x0 = Vec::Zero(3 * n);
  x0.segment(2 * n, n) << 1.0, 1.0, 0.5, 1.0;
  const auto arc = run_h1(catalog::logcosh(n), Graph::complete(n), prm, x0, 5.0, 1e-2,
                          JumpPolicyKind::Random, 5);
  CHECK(arc.well_formed());
  CHECK_FALSE(arc.zeno_tripped);
}
