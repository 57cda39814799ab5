#include "hmnss/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "hmnss/errors.hpp"
#include "hmnss/partial_info.hpp"
#include "hmnss/reset_conditions.hpp"

namespace hmnss {

namespace {

double base_lyapunov(const Game& g, bool potential, double c_o, const Layout& lay, const Vec& x,
                     LyapunovSample& s) {
  const int n = lay.n;
  const Vec q = x.segment(lay.q(), n);
  const Vec p = x.segment(lay.p(), n);
  const Vec tau = x.segment(lay.tau(), n);
  s.V1 = 0.25 * (p - q).squaredNorm();
  const double dp = dist_to_ne(g, p);
  s.V2 = 0.25 * dp * dp;
  const double tt = tau.squaredNorm();
  if (potential) {
    s.V3 = tt / n * g.potential_gap(q);
    return s.V1 + s.V2 + s.V3;
  }
  const Vec G = g.pseudogradient(q);
  s.Vt3 = c_o * tt * G.squaredNorm() / (2.0 * n);
  return s.V1 + s.V2 + s.Vt3;
}

void check_variant(const Game& g, const LyapunovVariant& v, const Layout& lay) {
  if (g.known_ne.empty()) throw ConfigError("Lyapunov functions need a stored equilibrium");
  const bool pot = v.kind == LyapunovKind::Potential ||
                   (v.kind == LyapunovKind::Graph && v.base_potential);
  if (pot && !g.has_potential()) throw ConfigError("potential Lyapunov variant needs a potential");
  if (!pot && !(v.c_o > 0.0)) throw ConfigError("non-potential Lyapunov variant needs c_o > 0");
  if (v.kind == LyapunovKind::Graph && !lay.has_qhat)
    throw ConfigError("graph Lyapunov variant needs estimation states");
}

double timer_max(const Layout& lay, const Vec& x) { return x.segment(lay.tau(), lay.n).maxCoeff(); }

}  // namespace

LyapunovSample eval_lyapunov(const Game& g, const LyapunovVariant& v, const Layout& lay,
                             const Vec& x) {
  check_variant(g, v, lay);
  LyapunovSample s;
  switch (v.kind) {
    case LyapunovKind::Potential:
      s.V_total = base_lyapunov(g, true, 0.0, lay, x, s);
      break;
    case LyapunovKind::NonPotential:
      s.V_total = base_lyapunov(g, false, v.c_o, lay, x, s);
      break;
    case LyapunovKind::Graph: {
      const double base = base_lyapunov(g, v.base_potential, v.c_o, lay, x, s);
      const double th = consensus_error(lay, x);
      s.Vtheta = 0.5 * th * th;
      s.V_total = (1.0 - v.d) * base + v.d * s.Vtheta;
      break;
    }
  }
  return s;
}

FlowDecreaseReport check_flow_decrease(const HybridArc& arc, const Game& g,
                                       const LyapunovVariant& v, const Layout& lay, double t_sync) {
  FlowDecreaseReport rep;
  const auto& S = arc.samples;
  if (S.size() < 3) return rep;
  std::vector<double> V(S.size());
  for (std::size_t k = 0; k < S.size(); ++k) V[k] = eval_lyapunov(g, v, lay, S[k].x).V_total;
  for (std::size_t k = 1; k + 1 < S.size(); ++k) {
    if (S[k - 1].j != S[k].j || S[k + 1].j != S[k].j) continue;
    if (S[k].t + S[k].j < t_sync) continue;
    const double dt = S[k + 1].t - S[k - 1].t;
    if (!(dt > 0.0)) continue;
    const double vdot = (V[k + 1] - V[k - 1]) / dt;
    ++rep.checked;
    if (vdot > lyap_tol(V[k])) {
      ++rep.violations;
      rep.max_positive_vdot = std::max(rep.max_positive_vdot, vdot);
      if (rep.locations.size() < 64) rep.locations.push_back({S[k].t, S[k].j});
    }
  }
  return rep;
}

JumpDecreaseReport check_jump_decrease(const HybridArc& arc, const Game& g,
                                       const LyapunovVariant& v, const Layout& lay,
                                       const HmNssParams& prm, double rho_J,
                                       bool check_contraction) {
  JumpDecreaseReport rep;
  rep.gamma = gamma_rate(prm.T, prm.T0, rho_J);
  const auto& S = arc.samples;
  std::size_t k = 0;
  while (k + 1 < S.size()) {
    if (!(S[k + 1].j == S[k].j + 1 && S[k + 1].t == S[k].t)) {
      ++k;
      continue;
    }
    std::size_t e = k + 1;
    while (e + 1 < S.size() && S[e + 1].j == S[e].j + 1 && S[e + 1].t == S[e].t) ++e;
    CascadeRecord c;
    c.t = S[k].t;
    c.j_first = S[k].j;
    c.length = static_cast<int>(e - k);
    c.synchronized = S[k].x.segment(lay.tau(), lay.n).minCoeff() >= prm.T - 1e-8;
    // a cascade cut short by the horizon is not complete
    const bool complete = timer_max(lay, S[e].x) < prm.T - prm.tol_event;
    c.V_pre = eval_lyapunov(g, v, lay, S[k].x).V_total;
    c.V_post = eval_lyapunov(g, v, lay, S[e].x).V_total;
    if (complete && c.V_post - c.V_pre > lyap_tol(c.V_pre)) ++rep.increases;
    if (check_contraction && complete && c.synchronized) {
      ++rep.contraction_checked;
      if (c.V_pre > 0.0) rep.worst_factor = std::max(rep.worst_factor, c.V_post / c.V_pre);
      if (c.V_post > (1.0 - rep.gamma + 1e-6) * c.V_pre) ++rep.contraction_violations;
    }
    rep.cascades.push_back(c);
    k = e;
  }
  return rep;
}

RateBoundReport check_rate_bounds(const HybridArc& arc, const Game& g, const HmNssParams& prm,
                                  RateTheorem theorem, const RateBoundOptions& opt) {
  RateBoundReport rep;
  rep.theorem = theorem;
  if (g.known_ne.empty()) throw ConfigError("rate bounds need a stored equilibrium");
  if (!g.constants) throw ConfigError("rate bounds need game constants");
  const int n = g.n();
  const Layout lay{n, false, false};
  const double kappa = g.constants->kappa, ell = g.constants->ell;
  const double t_sync = prm.sync_time(n);
  const auto& S = arc.samples;
  const double tol = opt.tol;
  auto in_sync = [&](const Sample& s) { return s.t + s.j >= t_sync; };

  const bool needs_strong = theorem == RateTheorem::T1i3 || theorem == RateTheorem::T3i5 ||
                            theorem == RateTheorem::L6;
  if (needs_strong && !(kappa > 0.0)) throw ConfigError("theorem needs a strongly monotone game");
  if ((theorem == RateTheorem::T1i1 || theorem == RateTheorem::T1i3) && !g.has_potential())
    throw ConfigError("theorem needs a potential game");

  rep.worst_margin = std::numeric_limits<double>::infinity();
  if (needs_strong) {
    const Vec& qs = g.known_ne.front();
    double M0 = 0.0;
    for (const auto& s : S) {
      if (in_sync(s)) continue;
      const Vec dq = s.x.segment(lay.q(), n) - qs;
      const Vec dp = s.x.segment(lay.p(), n) - qs;
      M0 = std::max(M0, std::sqrt(dq.squaredNorm() + dp.squaredNorm()));
    }
    rep.M0 = M0;
    const double sphi = ell / kappa, sr = prm.T / prm.T0;
    const bool pot = theorem == RateTheorem::T1i3;
    const double rho_J = pot ? 1.0 / kappa : sphi * sphi / kappa;
    const double gam = gamma_rate(prm.T, prm.T0, rho_J);
    const double pref = pot ? sr * std::sqrt(sphi) : sr * sphi;
    double t_nu = 0.0, nu = 0.0;
    if (theorem == RateTheorem::L6) {
      nu = opt.nu > 0.0 ? opt.nu : 1e-3 * M0;
      t_nu = settling_time(kappa, sphi, sr, prm.eta, prm.T0, nu, M0);
    }
    for (const auto& s : S) {
      if (!in_sync(s)) continue;
      const double val = (s.x.segment(lay.q(), n) - qs).norm();
      double bound;
      if (theorem == RateTheorem::L6) {
        if (s.t < t_nu) continue;
        bound = nu;
      } else {
        const int aj = std::max(0, (s.j - n) / n);
        bound = pref * std::pow(1.0 - gam, 0.5 * aj) * M0;
      }
      ++rep.checked;
      const double margin = (bound - val) / (1.0 + bound);
      rep.worst_margin = std::min(rep.worst_margin, margin);
      if (val > bound * (1.0 + tol) + 1e-300) ++rep.violations;
    }
    return rep;
  }

  // per-interval constants: T1i1 uses 2V, T2 uses 2*ell*V~ with c_o = 1/ell
  const bool pot = theorem == RateTheorem::T1i1;
  LyapunovVariant var;
  var.kind = pot ? LyapunovKind::Potential : LyapunovKind::NonPotential;
  var.c_o = 1.0 / ell;
  auto weighted = [&](const Sample& s) {
    const Vec q = s.x.segment(lay.q(), n);
    const double ts = s.x.segment(lay.tau(), n).maxCoeff();
    const double core = pot ? g.potential_gap(q) : g.pseudogradient(q).squaredNorm();
    return core * ts * ts;
  };
  std::size_t k = 0;
  double prev_c = std::numeric_limits<double>::infinity();
  while (k < S.size()) {
    std::size_t e = k;
    while (e + 1 < S.size() && S[e + 1].j == S[k].j) ++e;
    if (e > k && in_sync(S[k])) {
      const double V = eval_lyapunov(g, var, lay, S[k].x).V_total;
      const double c = pot ? 2.0 * V : 2.0 * ell * V;
      if (c > prev_c * (1.0 + tol) + 1e-300) rep.c_nonincreasing = false;
      prev_c = c;
      rep.c.push_back(c);
      double wprev = weighted(S[k]);
      for (std::size_t m = k; m <= e; ++m) {
        const double w = weighted(S[m]);
        ++rep.checked;
        rep.worst_margin = std::min(rep.worst_margin, (c - w) / (1.0 + c));
        if (w > c * (1.0 + tol) + 1e-300) ++rep.violations;
        if (m > k) {
          ++rep.monotone_checked;
          if (wprev > 0.0) rep.worst_monotone_rel = std::max(rep.worst_monotone_rel, (w - wprev) / wprev);
          if (w > wprev * (1.0 + tol) + 1e-300) ++rep.monotone_violations;
        }
        wprev = w;
      }
    }
    k = e + 1;
  }
  return rep;
}

RateFit fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& dist) {
  RateFit f;
  const std::size_t m = std::min(t.size(), dist.size());
  f.points = static_cast<int>(m);
  if (m < 2) return f;
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::vector<double> y(m);
  for (std::size_t k = 0; k < m; ++k) {
    double d = dist[k];
    if (!(d > 1e-14)) {
      d = 1e-14;
      f.clipped = true;
    }
    y[k] = std::log(d);
    st += t[k];
    sy += y[k];
    stt += t[k] * t[k];
    sty += t[k] * y[k];
  }
  const double mm = static_cast<double>(m);
  const double den = mm * stt - st * st;
  if (den <= 0.0) return f;
  const double slope = (mm * sty - st * sy) / den;
  const double icpt = (sy - slope * st) / mm;
  double ss_tot = 0, ss_res = 0;
  const double ybar = sy / mm;
  for (std::size_t k = 0; k < m; ++k) {
    const double r = y[k] - (icpt + slope * t[k]);
    ss_res += r * r;
    ss_tot += (y[k] - ybar) * (y[k] - ybar);
  }
  f.lambda_hat = -slope;
  if (f.lambda_hat == 0.0) f.lambda_hat = 0.0;  // no negative zero in reports
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

RateFit fit_exponential_rate(const HybridArc& arc, const Game& g, double t0, double t1) {
  std::vector<double> t, d;
  const int n = g.n();
  for (const auto& s : arc.samples) {
    if (s.t < t0 || s.t > t1) continue;
    t.push_back(s.t);
    d.push_back(dist_to_ne(g, s.x.head(n)));
  }
  return fit_exponential_rate(t, d);
}

}  // namespace hmnss
