#include "hmnss/model_free.hpp"

#include <cmath>
#include <memory>
#include <numeric>

#include "hmnss/errors.hpp"
#include "hmnss/partial_info.hpp"

namespace hmnss {

Rational reduce(Rational r) {
  if (r.den < 0) {
    r.den = -r.den;
    r.num = -r.num;
  }
  const long long g = std::gcd(r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  return r;
}

bool validate_frequencies(const std::vector<Rational>& freqs) {
  for (const auto& f : freqs)
    if (f.den == 0 || (f.num > 0) != (f.den > 0) || f.num == 0)
      throw DomainError("dither frequencies must be positive rationals");
  for (std::size_t i = 0; i < freqs.size(); ++i)
    for (std::size_t j = 0; j < freqs.size(); ++j) {
      if (i == j) continue;
      const Rational a = reduce(freqs[i]), b = reduce(freqs[j]);
      // a = k b  <=>  a.num * b.den = k * b.num * a.den
      const __int128 lhs = static_cast<__int128>(a.num) * b.den;
      const __int128 rhs = static_cast<__int128>(b.num) * a.den;
      if (lhs == rhs || lhs == 2 * rhs || lhs == 3 * rhs) return false;
    }
  return true;
}

std::vector<Rational> default_frequencies(int n) {
  std::vector<Rational> out;
  for (long long i = 1; static_cast<int>(out.size()) < n; ++i) {
    out.push_back({2 * i + 1, 2});
    if (!validate_frequencies(out)) out.pop_back();
  }
  return out;
}

Rational common_period(const std::vector<Rational>& freqs) {
  long long l = 1, g = 0;
  for (const auto& f : freqs) {
    const Rational r = reduce(f);
    l = std::lcm(l, r.den);
    g = std::gcd(g, r.num);
  }
  return reduce({l, g});
}

double OscillatorBank::max_freq() const {
  double m = 0.0;
  for (const auto& f : freqs) m = std::max(m, f.value());
  return m;
}

Vec oscillator_initial(int n) {
  Vec mu(2 * n);
  for (int i = 0; i < n; ++i) {
    mu(2 * i) = 0.0;
    mu(2 * i + 1) = 1.0;
  }
  return mu;
}

static void osc_rhs(const OscillatorBank& bank, const double* mu, double* dmu, int n) {
  for (int i = 0; i < n; ++i) {
    const double w = 2.0 * M_PI * bank.freqs[i].value() / bank.eps_p;
    dmu[2 * i] = w * mu[2 * i + 1];
    dmu[2 * i + 1] = -w * mu[2 * i];
  }
}

Vec oscillator_flow(const OscillatorBank& bank, const Vec& mu) {
  const int n = static_cast<int>(mu.size() / 2);
  if (static_cast<int>(bank.freqs.size()) != n) throw DomainError("oscillator: frequency count");
  Vec d(2 * n);
  osc_rhs(bank, mu.data(), d.data(), n);
  return d;
}

void renormalize(double* mu, int n) {
  for (int i = 0; i < n; ++i) {
    const double r = std::hypot(mu[2 * i], mu[2 * i + 1]);
    if (r > 0.0) {
      mu[2 * i] /= r;
      mu[2 * i + 1] /= r;
    }
  }
}

namespace {

struct H3Work {
  std::vector<double> xd, phi, E, LE;
  explicit H3Work(int n) : xd(n), phi(n), E(n * n), LE(n * n) {}
};

void h3_rhs(const CostOracle& costs, const OscillatorBank& bank, double eta, const Layout& lay,
            const double* x, const double* e, PerturbationTarget target, double* dx, H3Work& w) {
  const int n = lay.n;
  const double* q = x + lay.q();
  const double* p = x + lay.p();
  const double* tau = x + lay.tau();
  const double* mu = x + lay.mu();
  const double ea = bank.eps_a;
  const bool in = e && target != PerturbationTarget::Output;
  const bool out = e && target != PerturbationTarget::Input;
  for (int i = 0; i < n; ++i) w.xd[i] = q[i] + ea * mu[2 * i] + (in ? e[i] : 0.0);
  costs.all(w.xd.data(), w.phi.data());
  for (int i = 0; i < n; ++i) {
    dx[lay.q() + i] = 2.0 * (p[i] - q[i]) / tau[i];
    double dp = -(4.0 / ea) * tau[i] * w.phi[i] * mu[2 * i];
    if (out) dp -= 2.0 * tau[i] * e[i];
    dx[lay.p() + i] = dp;
    dx[lay.tau() + i] = eta;
  }
  osc_rhs(bank, mu, dx + lay.mu(), n);
}

void h4_rhs(const CostOracle& costs, const OscillatorBank& bank, double eta, double eps_c,
            const Mat& L, const Layout& lay, const double* x, const double* e,
            PerturbationTarget target, double* dx, H3Work& w) {
  const int n = lay.n;
  const double* q = x + lay.q();
  const double* p = x + lay.p();
  const double* tau = x + lay.tau();
  const double* mu = x + lay.mu();
  const double* qhat = x + lay.qhat();
  const double ea = bank.eps_a;
  const bool in = e && target != PerturbationTarget::Output;
  const bool out = e && target != PerturbationTarget::Input;
  detail::pack_estimates(q, qhat, w.E.data(), n);
  detail::laplacian_times(L, w.E.data(), w.LE.data(), n);
  for (int i = 0; i < n; ++i) {
    double* row = w.E.data() + i * n;
    const double keep = row[i];
    row[i] = q[i] + ea * mu[2 * i] + (in ? e[i] : 0.0);
    const double phi = costs.one(i, row);
    row[i] = keep;
    dx[lay.q() + i] = 2.0 * (p[i] - q[i]) / tau[i] - w.LE[i * n + i];
    double dp = -(4.0 / ea) * tau[i] * phi * mu[2 * i];
    if (out) dp -= 2.0 * tau[i] * e[i];
    dx[lay.p() + i] = dp;
    dx[lay.tau() + i] = eta;
    double* dqh = dx + lay.qhat() + i * (n - 1);
    const double* lrow = w.LE.data() + i * n;
    for (int k = 0, r = 0; k < n; ++k)
      if (k != i) dqh[r++] = -lrow[k] / eps_c;
  }
  osc_rhs(bank, mu, dx + lay.mu(), n);
}

void check_bank(const OscillatorBank& bank, int n) {
  if (static_cast<int>(bank.freqs.size()) != n) throw DomainError("need one dither frequency per player");
  if (!validate_frequencies(bank.freqs)) throw DomainError("dither frequencies violate the separation rule");
  if (!(bank.eps_p > 0.0 && bank.eps_a > 0.0)) throw DomainError("eps_p and eps_a must be positive");
}

}  // namespace

Vec flow_map_h3(const CostOracle& costs, const HmNssParams& prm, const OscillatorBank& bank,
                const Vec& x) {
  const int n = costs.n();
  const Layout lay{n, true, false};
  if (x.size() != lay.dim()) throw DomainError("flow_map_h3: state dimension");
  Vec dx(lay.dim());
  H3Work w(n);
  h3_rhs(costs, bank, prm.eta, lay, x.data(), nullptr, PerturbationTarget::Output, dx.data(), w);
  return dx;
}

Vec flow_map_h4(const CostOracle& costs, const HmNssParams& prm, const OscillatorBank& bank,
                double eps_c, const Mat& L, const Vec& x) {
  const int n = costs.n();
  const Layout lay{n, true, true};
  if (x.size() != lay.dim()) throw DomainError("flow_map_h4: state dimension");
  Vec dx(lay.dim());
  H3Work w(n);
  h4_rhs(costs, bank, prm.eta, eps_c, L, lay, x.data(), nullptr, PerturbationTarget::Output,
         dx.data(), w);
  return dx;
}

JumpOutcome jump_map_g3(const HmNssParams& prm, const Graph& graph, const Layout& lay, Vec& x,
                        JumpSelector& sel) {
  return jump_map_g1(prm, graph, lay, x, sel);
}

double h3_step(double h, const OscillatorBank& bank) {
  return std::min(h, bank.eps_p / (50.0 * bank.max_freq()));
}

bool small_parameter_order_inverted(double eps_p, double eps_a, double eps_c) {
  return eps_p > eps_a || eps_a > eps_c;
}

HybridSystemDef make_h3_system(GamePtr g, const Graph& graph, const HmNssParams& prm,
                               const OscillatorBank& bank, PerturbationTarget target) {
  const int n = g->n();
  check_bank(bank, n);
  const Layout lay{n, true, false};
  HybridSystemDef sys = make_h1_system(g, graph, prm, target);
  sys.dim = lay.dim();
  auto costs = std::make_shared<CostOracle>(g->cost_oracle());
  auto work = std::make_shared<H3Work>(n);
  const double eta = prm.eta;
  sys.flow = [costs, bank, eta, lay, target, work](double, const double* x, const double* e,
                                                    double* dx) {
    h3_rhs(*costs, bank, eta, lay, x, e, target, dx, *work);
  };
  sys.project = [lay](Vec& x) { renormalize(x.data() + lay.mu(), lay.n); };
  return sys;
}

HybridSystemDef make_h4_system(GamePtr g, const Graph& graph, const HmNssParams& prm,
                               const OscillatorBank& bank, double eps_c,
                               PerturbationTarget target) {
  const int n = g->n();
  check_bank(bank, n);
  if (!(eps_c > 0.0)) throw DomainError("eps_c must be positive");
  const Layout lay{n, true, true};
  HybridSystemDef sys = make_h1_system(g, graph, prm, target);
  sys.dim = lay.dim();
  auto costs = std::make_shared<CostOracle>(g->cost_oracle());
  auto work = std::make_shared<H3Work>(n);
  const Mat L = laplacian(graph);
  const double eta = prm.eta;
  sys.flow = [costs, bank, eta, eps_c, L, lay, target, work](double, const double* x,
                                                              const double* e, double* dx) {
    h4_rhs(*costs, bank, eta, eps_c, L, lay, x, e, target, dx, *work);
  };
  sys.project = [lay](Vec& x) { renormalize(x.data() + lay.mu(), lay.n); };
  return sys;
}

Vec average_flow_oracle(const Game& g, const HmNssParams& prm, const Vec& x) {
  return flow_map_h1(g, prm, x);
}

Vec dither_average(const CostOracle& costs, const OscillatorBank& bank, const Vec& mu0,
                   const Vec& q) {
  const int n = costs.n();
  if (q.size() != n || mu0.size() != 2 * n) throw DomainError("dither_average: dimensions");
  const double Lp = common_period(bank.freqs).value();
  const long N = 64L * static_cast<long>(std::ceil(bank.max_freq() * Lp)) + 1024;
  Vec acc = Vec::Zero(n);
  std::vector<double> xd(n), phi(n), mt(n);
  for (long k = 0; k < N; ++k) {
    const double s = Lp * static_cast<double>(k) / static_cast<double>(N);
    for (int i = 0; i < n; ++i) {
      const double w = 2.0 * M_PI * bank.freqs[i].value() * s;
      mt[i] = mu0(2 * i) * std::cos(w) + mu0(2 * i + 1) * std::sin(w);
      xd[i] = q(i) + bank.eps_a * mt[i];
    }
    costs.all(xd.data(), phi.data());
    for (int i = 0; i < n; ++i) acc(i) += phi[i] * mt[i];
  }
  return acc * (2.0 / bank.eps_a) / static_cast<double>(N);
}

}  // namespace hmnss
