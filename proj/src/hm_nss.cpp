#include "hmnss/hm_nss.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "hmnss/errors.hpp"

namespace hmnss {

HmNssParams HmNssParams::defaults(int n, double eta, double T0, double T) {
  HmNssParams p;
  p.eta = eta;
  p.T0 = T0;
  p.T = T;
  p.alpha = Vec::Zero(n);
  p.r = Vec::Constant(n, (T - T0) / (2.0 * n));
  return p;
}

void HmNssParams::validate(int n) const {
  if (!(eta > 0.0 && eta <= 0.5)) throw DomainError("eta must lie in (0, 1/2]");
  if (!(T0 > 0.0 && T > T0)) throw DomainError("need T > T0 > 0");
  if (alpha.size() != n || r.size() != n) throw DomainError("alpha and r must have n entries");
  for (int i = 0; i < n; ++i) {
    if (alpha(i) != 0.0 && alpha(i) != 1.0) throw DomainError("alpha entries must be 0 or 1");
    if (!(r(i) > 0.0 && r(i) < (T - T0) / n)) throw DomainError("r_j must lie in (0, (T-T0)/n)");
  }
}

void perturbed_gradient(const Game& g, const double* q, const double* e, PerturbationTarget target,
                        double* out, double* work) {
  const int n = g.n();
  if (!e) {
    g.pseudogradient_into(q, out);
    return;
  }
  const bool in = target != PerturbationTarget::Output;
  const bool outp = target != PerturbationTarget::Input;
  if (in) {
    for (int i = 0; i < n; ++i) work[i] = q[i] + e[i];
    g.pseudogradient_into(work, out);
  } else {
    g.pseudogradient_into(q, out);
  }
  if (outp)
    for (int i = 0; i < n; ++i) out[i] += e[i];
}

static void h1_rhs(const Game& g, double eta, const double* x, const double* e,
                   PerturbationTarget target, double* dx, double* work) {
  const int n = g.n();
  const double* q = x;
  const double* p = x + n;
  const double* tau = x + 2 * n;
  double* grad = dx + n;  // written in place, then scaled
  perturbed_gradient(g, q, e, target, grad, work);
  for (int i = 0; i < n; ++i) {
    dx[i] = 2.0 * (p[i] - q[i]) / tau[i];
    grad[i] *= -2.0 * tau[i];
    dx[2 * n + i] = eta;
  }
}

Vec flow_map_h1(const Game& g, const HmNssParams& prm, const Vec& x) {
  const int n = g.n();
  if (x.size() < 3 * n) throw DomainError("flow_map_h1: state dimension");
  for (int i = 0; i < n; ++i)
    if (!(x(2 * n + i) > 0.0)) throw DomainError("flow_map_h1: tau must be positive");
  Vec dx(3 * n);
  std::vector<double> work(n);
  h1_rhs(g, prm.eta, x.data(), nullptr, PerturbationTarget::Output, dx.data(), work.data());
  return dx;
}

PlayerState reset_map(const HmNssParams& prm, const PlayerState& xi, int i) {
  const double a = prm.alpha(i);
  return {xi.q, a * xi.p + (1.0 - a) * xi.q, prm.T0};
}

std::vector<double> coordination_map(const HmNssParams& prm, double tau_j, int j) {
  const double tol = prm.tol_event;
  if (tau_j < prm.T0 - tol || tau_j > prm.T + tol)
    throw DomainError("coordination_map: tau outside [T0, T]");
  const double thr = prm.T0 + prm.r(j);
  if (std::fabs(tau_j - thr) <= tol) return {prm.T0, prm.T};
  if (tau_j > thr) return {prm.T};
  return {prm.T0};
}

double event_value(const HmNssParams& prm, const Layout& lay, const Vec& x) {
  return x.segment(lay.tau(), lay.n).maxCoeff() - prm.T;
}

static std::vector<int> due_players(const HmNssParams& prm, const Layout& lay, const Vec& x) {
  std::vector<int> c;
  for (int i = 0; i < lay.n; ++i)
    if (x(lay.tau() + i) >= prm.T - prm.tol_event) c.push_back(i);
  return c;
}

// applies the reset of player i and the pulse to its neighbours; `tie_high`
// decides ties in the coordination map
static std::string apply_jump(const HmNssParams& prm, const Graph& graph, const Layout& lay, Vec& x,
                              int i, const std::function<bool()>& tie_high) {
  const int n = lay.n;
  const PlayerState r = reset_map(prm, {x(i), x(n + i), x(2 * n + i)}, i);
  x(n + i) = r.p;
  x(2 * n + i) = r.tau;
  std::string label = "reset " + std::to_string(i + 1);
  if (!prm.coordination) return label;
  for (int j : graph.neighbors(i)) {
    const double tj = std::clamp(x(2 * n + j), prm.T0, prm.T);
    const auto set = coordination_map(prm, tj, j);
    if (set.size() == 1) {
      x(2 * n + j) = set[0];
    } else {
      const bool hi = tie_high();
      x(2 * n + j) = hi ? prm.T : prm.T0;
      label += "; tie " + std::to_string(j + 1) + (hi ? "->T" : "->T0");
    }
  }
  return label;
}

JumpOutcome jump_map_g1(const HmNssParams& prm, const Graph& graph, const Layout& lay, Vec& x,
                        JumpSelector& sel) {
  const auto cand = due_players(prm, lay, x);
  if (cand.empty()) throw PreconditionError("jump_map_g1: state not in the jump set");
  const int i = sel.pick(cand);
  std::string label = apply_jump(prm, graph, lay, x, i, [&] { return sel.tie_goes_high(); });
  return {i, std::move(label)};
}

std::vector<Vec> enumerate_cascades(const HmNssParams& prm, const Graph& graph, const Layout& lay,
                                    const Vec& x) {
  if (lay.n > 4) throw PreconditionError("enumerate_cascades is limited to n <= 4");
  std::vector<Vec> out;
  std::function<void(const Vec&, int)> dfs = [&](const Vec& s, int depth) {
    const auto cand = due_players(prm, lay, s);
    if (cand.empty()) {
      for (const auto& o : out)
        if (o == s) return;
      out.push_back(s);
      return;
    }
    if (depth > 10 * lay.n) throw NumericalError("enumerate_cascades: runaway cascade");
    for (int i : cand) {
      // count ties reachable from this reset and branch over each assignment
      std::vector<int> ties;
      if (prm.coordination)
        for (int j : graph.neighbors(i)) {
          const double tj = std::clamp(s(2 * lay.n + j), prm.T0, prm.T);
          if (coordination_map(prm, tj, j).size() == 2) ties.push_back(j);
        }
      const int combos = 1 << ties.size();
      for (int mask = 0; mask < combos; ++mask) {
        Vec y = s;
        int bit = 0;
        apply_jump(prm, graph, lay, y, i, [&] { return ((mask >> bit++) & 1) != 0; });
        dfs(y, depth + 1);
      }
    }
  };
  dfs(x, 0);
  return out;
}

double dist_to_sync(const Vec& tau, double T0, double T) {
  double corner = 0.0;
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    const double d = std::min(std::fabs(tau(i) - T0), std::fabs(tau(i) - T));
    corner += d * d;
  }
  const double m = std::clamp(tau.mean(), T0, T);
  const double diag = (tau.array() - m).matrix().squaredNorm();
  return std::sqrt(std::min(corner, diag));
}

Vec pack_h1(const Vec& q, const Vec& p, const Vec& tau) {
  const auto n = q.size();
  Vec x(3 * n);
  x << q, p, tau;
  return x;
}

HybridSystemDef make_h1_system(GamePtr g, const Graph& graph, const HmNssParams& prm,
                               PerturbationTarget target) {
  const int n = g->n();
  if (graph.n() != n) throw DomainError("graph and game sizes differ");
  prm.validate(n);
  const Layout lay{n, false, false};
  HybridSystemDef sys;
  sys.dim = 3 * n;
  sys.players = n;
  sys.tol_event = prm.tol_event;
  auto work = std::make_shared<std::vector<double>>(n);
  const double eta = prm.eta;
  sys.flow = [g, eta, target, work](double, const double* x, const double* e, double* dx) {
    h1_rhs(*g, eta, x, e, target, dx, work->data());
  };
  const double lo = prm.T0 - 1e-9, hi = prm.T + 1e-9;
  sys.flow_set = [lay, lo, hi](const Vec& x) {
    const auto t = x.segment(lay.tau(), lay.n);
    return t.minCoeff() >= lo && t.maxCoeff() <= hi;
  };
  sys.jump_set = [prm, lay](const Vec& x) { return event_value(prm, lay, x) >= -prm.tol_event; };
  sys.event_value = [prm, lay](const Vec& x) { return event_value(prm, lay, x); };
  sys.jump = [prm, graph, lay](Vec& x, JumpSelector& sel) {
    return jump_map_g1(prm, graph, lay, x, sel);
  };
  return sys;
}

HybridSystemDef make_baseline_ode(GamePtr g, double eta, PerturbationTarget target) {
  const int n = g->n();
  HybridSystemDef sys;
  sys.dim = 3 * n;
  sys.players = n;
  auto work = std::make_shared<std::vector<double>>(n);
  sys.flow = [g, eta, target, work](double, const double* x, const double* e, double* dx) {
    h1_rhs(*g, eta, x, e, target, dx, work->data());
  };
  return sys;
}

Vec baseline_initial(const Vec& q0, const Vec& p0, double T0) {
  const double tau0 = std::max(T0, kTauFloor);
  return pack_h1(q0, p0, Vec::Constant(q0.size(), tau0));
}

HybridSystemDef make_psg_flow(GamePtr g, PerturbationTarget target) {
  const int n = g->n();
  HybridSystemDef sys;
  sys.dim = n;
  sys.players = n;
  auto work = std::make_shared<std::vector<double>>(n);
  sys.flow = [g, target, work](double, const double* x, const double* e, double* dx) {
    perturbed_gradient(*g, x, e, target, dx, work->data());
    for (int i = 0; i < g->n(); ++i) dx[i] = -dx[i];
  };
  return sys;
}

}  // namespace hmnss
