#include "hmnss/partial_info.hpp"

#include <memory>

#include "hmnss/errors.hpp"
#include "hmnss/kernels.hpp"

namespace hmnss {

namespace detail {

void pack_estimates(const double* q, const double* qhat, double* E, int n) {
  for (int i = 0; i < n; ++i) {
    const double* est = qhat + i * (n - 1);
    double* row = E + i * n;
    for (int k = 0, r = 0; k < n; ++k) row[k] = (k == i) ? q[i] : est[r++];
  }
}

void laplacian_times(const Mat& L, const double* E, double* LE, int n) {
  const auto& K = kernels::active();
  for (int i = 0; i < n * n; ++i) LE[i] = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double w = L(i, k);
      if (w != 0.0) K.axpy(w, E + k * n, LE + i * n, n);
    }
}

}  // namespace detail

Vec psi(const Vec& q, const Vec& qhat, int n) {
  if (q.size() != n || qhat.size() != n * n - n) throw DomainError("psi: dimension mismatch");
  Vec e(n * n);
  detail::pack_estimates(q.data(), qhat.data(), e.data(), n);
  return e;
}

Vec psi_dense(const Vec& q, const Vec& qhat, const SelectionMatrices& sel) {
  if (q.size() != sel.P.rows() || qhat.size() != sel.Q.rows())
    throw DomainError("psi: dimension mismatch");
  return sel.P.transpose() * q + sel.Q.transpose() * qhat;
}

Vec consensus_point(const Vec& q) {
  const int n = static_cast<int>(q.size());
  Vec h(n * n - n);
  for (int i = 0, r = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (k != i) h(r++) = q(k);
  return h;
}

double consensus_error(const Layout& lay, const Vec& x) {
  const int n = lay.n;
  const Vec q = x.segment(lay.q(), n);
  return (x.segment(lay.qhat(), n * n - n) - consensus_point(q)).norm();
}

namespace {

struct H2Work {
  std::vector<double> E, LE, grad, tmp;
  explicit H2Work(int n) : E(n * n), LE(n * n), grad(n), tmp(n) {}
};

void h2_rhs(const Game& g, double eta, double eps, const Mat& L, const Layout& lay, const double* x,
            const double* e, PerturbationTarget target, double* dx, H2Work& w) {
  const int n = lay.n;
  const double* q = x + lay.q();
  const double* p = x + lay.p();
  const double* tau = x + lay.tau();
  const double* qhat = x + lay.qhat();
  detail::pack_estimates(q, qhat, w.E.data(), n);
  detail::laplacian_times(L, w.E.data(), w.LE.data(), n);
  const bool in = e && target != PerturbationTarget::Output;
  const bool out = e && target != PerturbationTarget::Input;
  for (int i = 0; i < n; ++i) {
    double* row = w.E.data() + i * n;
    if (in) row[i] += e[i];
    double gi = g.partial(i, row);
    if (in) row[i] -= e[i];
    if (out) gi += e[i];
    dx[lay.q() + i] = 2.0 * (p[i] - q[i]) / tau[i] - w.LE[i * n + i];
    dx[lay.p() + i] = -2.0 * tau[i] * gi;
    dx[lay.tau() + i] = eta;
    double* dqh = dx + lay.qhat() + i * (n - 1);
    const double* lrow = w.LE.data() + i * n;
    for (int k = 0, r = 0; k < n; ++k)
      if (k != i) dqh[r++] = -lrow[k] / eps;
  }
}

}  // namespace

Vec flow_map_h2(const Game& g, const HmNssParams& prm, const H2Params& h2, const Mat& L,
                const Vec& x) {
  const int n = g.n();
  const Layout lay{n, false, true};
  if (x.size() != lay.dim()) throw DomainError("flow_map_h2: state dimension");
  for (int i = 0; i < n; ++i)
    if (!(x(lay.tau() + i) > 0.0)) throw DomainError("flow_map_h2: tau must be positive");
  if (!(h2.epsilon > 0.0)) throw DomainError("flow_map_h2: epsilon must be positive");
  Vec dx(lay.dim());
  H2Work w(n);
  h2_rhs(g, prm.eta, h2.epsilon, L, lay, x.data(), nullptr, PerturbationTarget::Output, dx.data(), w);
  return dx;
}

JumpOutcome jump_map_g2(const HmNssParams& prm, const Graph& graph, const Layout& lay, Vec& x,
                        JumpSelector& sel) {
  return jump_map_g1(prm, graph, lay, x, sel);
}

double h2_step(double h, const H2Params& h2) { return std::min(h, h2.epsilon / 10.0); }

Vec h2_initial(const Vec& q, const Vec& p, const Vec& tau) {
  const int n = static_cast<int>(q.size());
  const Layout lay{n, false, true};
  Vec x(lay.dim());
  x.segment(lay.q(), n) = q;
  x.segment(lay.p(), n) = p;
  x.segment(lay.tau(), n) = tau;
  for (int i = 0; i < n; ++i) x.segment(lay.qhat() + i * (n - 1), n - 1).setConstant(q(i));
  return x;
}

HybridSystemDef make_h2_system(GamePtr g, const Graph& graph, const HmNssParams& prm,
                               const H2Params& h2, PerturbationTarget target) {
  const int n = g->n();
  if (graph.n() != n) throw DomainError("graph and game sizes differ");
  if (!(h2.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  prm.validate(n);
  const Layout lay{n, false, true};
  HybridSystemDef sys = make_h1_system(g, graph, prm, target);
  sys.dim = lay.dim();
  auto work = std::make_shared<H2Work>(n);
  const Mat L = laplacian(graph);
  const double eta = prm.eta, eps = h2.epsilon;
  sys.flow = [g, eta, eps, L, lay, target, work](double, const double* x, const double* e,
                                                  double* dx) {
    h2_rhs(*g, eta, eps, L, lay, x, e, target, dx, *work);
  };
  return sys;
}

}  // namespace hmnss
