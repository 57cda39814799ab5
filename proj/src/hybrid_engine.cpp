#include "hmnss/hybrid_engine.hpp"

#include <algorithm>
#include <cmath>

#include "hmnss/errors.hpp"
#include "hmnss/kernels.hpp"

namespace hmnss {

bool HybridArc::well_formed() const {
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const auto& a = samples[k - 1];
    const auto& b = samples[k];
    const bool flow = b.j == a.j && b.t > a.t;
    const bool jump = b.j == a.j + 1 && b.t == a.t;
    if (!flow && !jump) return false;
  }
  return true;
}

int JumpSelector::pick(const std::vector<int>& candidates) {
  if (candidates.empty()) throw PreconditionError("jump selector: no candidate");
  if (kind_ == JumpPolicyKind::Random) return candidates[rng_.index(candidates.size())];
  return *std::min_element(candidates.begin(), candidates.end());
}

bool JumpSelector::tie_goes_high() {
  if (kind_ == JumpPolicyKind::Random) return (rng_.bits() >> 63) != 0;
  return true;
}

static std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void Perturbation::signal(double t, double* e, int m) const {
  switch (mode) {
    case PerturbationMode::None:
      for (int i = 0; i < m; ++i) e[i] = 0.0;
      return;
    case PerturbationMode::Sinusoid: {
      const double v = amplitude * std::sin(omega * t + phase);
      for (int i = 0; i < m; ++i) e[i] = v;
      return;
    }
    case PerturbationMode::Noise: {
      const auto k = static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(t / hold)));
      for (int i = 0; i < m; ++i) {
        const std::uint64_t r = splitmix(seed ^ splitmix(k * 0x100000001b3ULL + static_cast<std::uint64_t>(i)));
        const double u = static_cast<double>(r >> 11) * 0x1.0p-53;
        e[i] = amplitude * (2.0 * u - 1.0);
      }
      return;
    }
  }
}

void Rk4::eval(const FlowFn& f, const Perturbation& pert, int m, double t, const double* x,
               double* dx) {
  if (pert.active()) {
    e_.resize(m);
    pert.signal(t, e_.data(), m);
    f(t, x, e_.data(), dx);
  } else {
    f(t, x, nullptr, dx);
  }
}

void Rk4::step(const FlowFn& f, const Perturbation& pert, int m, double t, const Vec& x, double h,
               Vec& out) {
  const auto& K = kernels::active();
  const std::size_t n = static_cast<std::size_t>(x.size());
  eval(f, pert, m, t, x.data(), k1.data());
  K.axpy_to(x.data(), 0.5 * h, k1.data(), tmp.data(), n);
  eval(f, pert, m, t + 0.5 * h, tmp.data(), k2.data());
  K.axpy_to(x.data(), 0.5 * h, k2.data(), tmp.data(), n);
  eval(f, pert, m, t + 0.5 * h, tmp.data(), k3.data());
  K.axpy_to(x.data(), h, k3.data(), tmp.data(), n);
  eval(f, pert, m, t + h, tmp.data(), k4.data());
  K.rk4_combine(x.data(), k1.data(), k2.data(), k3.data(), k4.data(), h, out.data(), n);
}

static bool blown_up(const Vec& x) {
  const double m = kernels::active().max_abs(x.data(), static_cast<std::size_t>(x.size()));
  return !(m <= kDivergenceBound);
}

FlowResult integrate_flow(const HybridSystemDef& sys, Vec& x, double t0, double max_flow, double h,
                          const Perturbation& pert,
                          const std::function<void(double, const Vec&)>& on_step) {
  if (!(h > 0.0)) throw ConfigError("integrator step must be positive");
  if (sys.flow_set && !sys.flow_set(x)) throw PreconditionError("integrate_flow: state not in C");
  FlowResult res;
  Rk4 rk(sys.dim);
  Vec xn(sys.dim), xb(sys.dim);
  const double tol = sys.tol_event;
  double elapsed = 0.0;
  auto finish = [&](Vec& src, double dt, FlowStatus st) {
    x.swap(src);
    elapsed += dt;
    res.status = st;
    res.elapsed = elapsed;
    return res;
  };
  while (elapsed < max_flow) {
    double hs = std::min(h, max_flow - elapsed);
    if (max_flow - elapsed - hs < 1e-9 * h) hs = max_flow - elapsed;
    const double t = t0 + elapsed;
    rk.step(sys.flow, pert, sys.players, t, x, hs, xn);
    if (sys.project) sys.project(xn);
    if (blown_up(xn)) return finish(xn, hs, FlowStatus::Diverged);
    if (sys.event_value) {
      const double ev = sys.event_value(xn);
      if (ev >= -tol) {
        if (ev <= tol) return finish(xn, hs, FlowStatus::Event);
        double lo = 0.0, hi = hs;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          rk.step(sys.flow, pert, sys.players, t, x, mid, xb);
          if (sys.project) sys.project(xb);
          const double em = sys.event_value(xb);
          if (std::fabs(em) <= tol) return finish(xb, mid, FlowStatus::Event);
          if (em > 0.0)
            hi = mid;
          else
            lo = mid;
          if (hi - lo <= 1e-17 * std::max(1.0, t)) break;
        }
        rk.step(sys.flow, pert, sys.players, t, x, hi, xb);
        if (sys.project) sys.project(xb);
        return finish(xb, hi, FlowStatus::Event);
      }
    } else if (sys.jump_set && sys.jump_set(xn)) {
      return finish(xn, hs, FlowStatus::Event);
    }
    x.swap(xn);
    elapsed += hs;
    if (on_step) on_step(t0 + elapsed, x);
  }
  res.status = FlowStatus::Timeout;
  res.elapsed = elapsed;
  return res;
}

HybridArc run(const HybridSystemDef& sys, const Vec& x0, const Horizon& horizon, double h,
              JumpSelector& selector, const Perturbation& pert, const RecorderSpec& rec) {
  if (static_cast<std::size_t>(x0.size()) != sys.dim) throw DomainError("run: x0 dimension");
  const bool in_c = !sys.flow_set || sys.flow_set(x0);
  const bool in_d = sys.jump_set && sys.jump_set(x0);
  if (!in_c && !in_d) throw PreconditionError("run: x0 outside C and D");
  HybridArc arc;
  Vec x = x0;
  double t = 0.0;
  int j = 0;
  auto push = [&](double tt, int jj, const Vec& xx) {
    if (!arc.samples.empty() && arc.samples.back().t == tt && arc.samples.back().j == jj) return;
    arc.samples.push_back({tt, jj, xx});
  };
  push(t, j, x);
  const long stride = std::max<long>(1, rec.stride);
  long counter = 0;
  const int zeno_cap = 10 * std::max(1, sys.players);
  const double t_end = horizon.t_max;
  while (true) {
    if (sys.jump_set && sys.jump_set(x)) {
      if (j >= horizon.j_max) break;
      int cascade = 0;
      while (sys.jump_set(x) && j < horizon.j_max) {
        if (cascade >= zeno_cap) {
          arc.zeno_tripped = true;
          arc.annotations.push_back("zeno guard tripped at t=" + std::to_string(t));
          return arc;
        }
        const JumpOutcome o = sys.jump(x, selector);
        arc.events.push_back({t, j, o.player, o.branch});
        ++j;
        ++cascade;
        push(t, j, x);
      }
      continue;
    }
    if (t >= t_end - 1e-12 * std::max(1.0, t_end)) break;
    auto on_step = [&](double ts, const Vec& xs) {
      if (++counter % stride == 0) push(ts, j, xs);
    };
    const FlowResult fr = integrate_flow(sys, x, t, t_end - t, h, pert, on_step);
    t += fr.elapsed;
    if (fr.status == FlowStatus::Diverged) {
      push(t, j, x);
      arc.diverged = true;
      arc.annotations.push_back("diverged at t=" + std::to_string(t));
      break;
    }
    push(t, j, x);
    if (fr.status == FlowStatus::Timeout) break;
  }
  return arc;
}

ArcView::ArcView(const HybridArc& a, std::vector<int> columns) : arc(&a), cols(std::move(columns)) {
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    const int j = a.samples[k].j;
    while (j_max < j) {
      ++j_max;
      begin.push_back(k);
      end.push_back(k);
    }
    end[j] = k + 1;
  }
}

namespace {

double state_dist(const std::vector<int>& cols, const double* x, const Vec& y) {
  double s = 0.0;
  if (cols.empty()) {
    for (Eigen::Index i = 0; i < y.size(); ++i) s += (x[i] - y(i)) * (x[i] - y(i));
  } else {
    for (int c : cols) s += (x[c] - y(c)) * (x[c] - y(c));
  }
  return std::sqrt(s);
}

double state_dist_interp(const std::vector<int>& cols, const double* x, const Vec& y0,
                         const Vec& y1, double w) {
  double s = 0.0;
  auto term = [&](int c) {
    const double v = (1.0 - w) * y0(c) + w * y1(c);
    s += (x[c] - v) * (x[c] - v);
  };
  if (cols.empty()) {
    for (Eigen::Index i = 0; i < y0.size(); ++i) term(static_cast<int>(i));
  } else {
    for (int c : cols) term(c);
  }
  return std::sqrt(s);
}

}  // namespace

double ArcView::dist_at(int j, double t, const double* x, std::size_t& hint) const {
  if (j > j_max || begin[j] == end[j]) return kFarApart;
  const auto& S = arc->samples;
  const std::size_t b0 = begin[j], b1 = end[j];
  // first index with time > t
  std::size_t k = std::max(hint, b0);
  if (k > b1) k = b1;
  if (k > b0 && S[k - 1].t > t) k = b0;
  while (k < b1 && S[k].t <= t) ++k;
  hint = k;
  double best;
  if (k == b0) {
    best = std::max(std::fabs(t - S[b0].t), state_dist(cols, x, S[b0].x));
  } else if (k == b1) {
    best = std::max(std::fabs(t - S[b1 - 1].t), state_dist(cols, x, S[b1 - 1].x));
  } else {
    const auto& a = S[k - 1];
    const auto& c = S[k];
    const double w = (t - a.t) / (c.t - a.t);
    best = state_dist_interp(cols, x, a.x, c.x, w);
  }
  for (std::size_t m = k; m < b1 && std::fabs(S[m].t - t) < best; ++m)
    best = std::min(best, std::max(std::fabs(S[m].t - t), state_dist(cols, x, S[m].x)));
  for (std::size_t m = k; m > b0 && std::fabs(S[m - 1].t - t) < best; --m)
    best = std::min(best, std::max(std::fabs(S[m - 1].t - t), state_dist(cols, x, S[m - 1].x)));
  return best;
}

static double directed_closeness(const HybridArc& a, const ArcView& vb, double T, int J) {
  double eps = 0.0;
  std::size_t hint = 0;
  int last_j = -1;
  for (const auto& s : a.samples) {
    if (s.t > T || s.j > J) continue;
    if (s.j != last_j) {
      hint = 0;
      last_j = s.j;
    }
    const double d = vb.dist_at(s.j, s.t, s.x.data(), hint);
    if (d == kFarApart) return kFarApart;
    eps = std::max(eps, d);
  }
  return eps;
}

double closeness(const HybridArc& a, const HybridArc& b, double T, int J,
                 const std::vector<int>& columns) {
  if (a.samples.empty() || b.samples.empty()) throw DomainError("closeness: empty arc");
  const ArcView va(a, columns), vb(b, columns);
  return std::max(directed_closeness(a, vb, T, J), directed_closeness(b, va, T, J));
}

}  // namespace hmnss
