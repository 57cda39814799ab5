#include "hmnss/reset_conditions.hpp"

#include <boost/random/sobol.hpp>
#include <cmath>
#include <limits>

#include "hmnss/errors.hpp"

namespace hmnss {

ConditionNumbers condition_numbers(double kappa, double ell, double T, double T0,
                                   std::optional<Spectrum> spec) {
  ConditionNumbers c;
  c.sigma_phi = kappa > 0.0 ? ell / kappa : std::numeric_limits<double>::infinity();
  c.sigma_r = T / T0;
  c.sigma_L = spec ? spec->sigma_L : 1.0;
  return c;
}

bool check_rc1(double T, double T0, double rho_J, const Vec& alpha) {
  const double amin = alpha.size() ? alpha.minCoeff() : 0.0;
  const double rhs = (1.0 - amin) == 0.0 ? 0.0 : 0.5 * rho_J * (1.0 - amin);
  return T * T - T0 * T0 > rhs;
}

double gamma_rate(double T, double T0, double rho_J) {
  return 1.0 - (T0 * T0) / (T * T) - rho_J / (2.0 * T * T);
}

bool check_rc2(double T, double eta, double ell) {
  const double T2 = T * T;
  return T2 > 0.0 && T2 < (1.0 - eta) / (2.0 * ell);
}

Rc3Result check_rc3(double T, double eta, double sigma_phi, double ell, double kappa,
                    double delta) {
  const double sl = sigma_phi * ell;
  if (!(delta >= 0.0 && delta < (1.0 - eta) / sl))
    throw DomainError("check_rc3: delta outside [0, (1-eta)/(sigma_phi*ell))");
  const double num = 1.0 - eta - delta * sl;
  double den = sl - kappa + delta * num;
  // sigma_phi*ell - kappa = 0 up to rounding when sigma_phi = 1
  if (std::fabs(den) <= 1e-14 * std::max(1.0, sl)) den = 0.0;
  Rc3Result r;
  const double T2 = T * T;
  if (den == 0.0) {
    r.unbounded = num > 0.0;
    r.bound = r.unbounded ? std::numeric_limits<double>::infinity() : 0.0;
    r.holds = r.unbounded && T2 > 0.0;
    return r;
  }
  r.bound = num / den;
  r.holds = T2 > 0.0 && T2 < r.bound;
  return r;
}

bool chi_domain_disagrees(double delta, double T) {
  const bool lin = delta * T * T < 1.0;
  const bool sq = delta * delta * T * T < 1.0;
  return lin != sq;
}

double chi(double rho_F, double delta, double T, double eta) {
  const double T2 = T * T;
  if (!(delta >= 0.0)) throw DomainError("chi: delta must be non-negative");
  if (!(delta * T2 < 1.0) || !(delta * delta * T2 < 1.0))
    throw DomainError("chi: delta*T^2 must be < 1");
  const double d = rho_F * (1.0 - eta) - delta * rho_F * rho_F;
  if (!(rho_F > 0.0) || !(d > 0.0)) throw DomainError("chi: need rho_F(1-eta) > delta rho_F^2");
  return T2 / (1.0 - delta * T2) / d;
}

Mat m_delta(const Game& g, const Vec& q, double rho_F, double delta, double T, double eta) {
  const double c = chi(rho_F, delta, T, eta);
  const int n = g.n();
  const Mat S = rho_F * Mat::Identity(n, n) - g.jacobian(q);
  return Mat::Identity(n, n) - c * (S * S.transpose());
}

double min_eig_sym(const Mat& M) {
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

GcResult is_globally_contractive(const Game& g, double rho_F, double delta, double T, double eta,
                                 const Box& box, int grid, const std::vector<Vec>& extra_points) {
  GcResult r;
  const int n = g.n();
  if (g.is_quadratic()) {
    r.min_eig = min_eig_sym(m_delta(g, Vec::Zero(n), rho_F, delta, T, eta));
    r.points = 1;
    r.holds = r.min_eig > kPdThreshold;
    return r;
  }
  if (box.lo.size() != n || box.hi.size() != n)
    throw DomainError("is_globally_contractive: sample box required for non-quadratic games");
  r.grid_only = true;
  double m = std::numeric_limits<double>::infinity();
  boost::random::sobol seq(static_cast<std::size_t>(n));
  const double scale = 1.0 / (static_cast<double>(seq.max()) + 1.0);
  Vec q(n);
  for (int k = 0; k < grid; ++k) {
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(seq()) * scale;
      q(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * u;
    }
    m = std::min(m, min_eig_sym(m_delta(g, q, rho_F, delta, T, eta)));
    ++r.points;
  }
  for (const auto& p : extra_points) {
    m = std::min(m, min_eig_sym(m_delta(g, p, rho_F, delta, T, eta)));
    ++r.points;
  }
  r.min_eig = m;
  r.holds = m > kPdThreshold;
  return r;
}

double t_opt(double kappa, double sigma_phi, double T0) {
  return std::exp(1.0) * sigma_phi * std::sqrt(1.0 / (2.0 * kappa) + (T0 * T0) / (sigma_phi * sigma_phi));
}

TOpt t_opt_checked(double kappa, double sigma_phi, double T0, double eta, double ell,
                   double rho_J, const Vec& alpha, double delta) {
  TOpt r;
  r.value = t_opt(kappa, sigma_phi, T0);
  r.rc1 = check_rc1(r.value, T0, rho_J, alpha);
  try {
    r.rc3 = check_rc3(r.value, eta, sigma_phi, ell, kappa, delta).holds;
  } catch (const DomainError&) {
    r.rc3 = false;
  }
  return r;
}

double settling_time(double kappa, double sigma_phi, double sigma_r, double eta, double T0,
                     double nu, double M0) {
  if (!(nu > 0.0) || !(M0 > 0.0)) throw DomainError("settling_time: nu and M0 must be positive");
  const double ratio = sigma_phi * sigma_r * M0 / nu;
  if (ratio <= 1.0) return 0.0;
  return (t_opt(kappa, sigma_phi, T0) - T0) / eta * std::log(ratio);
}

double epsilon_star(double sigma_L, double sigma_r, int n, double T, double ell, double lambda_max,
                    double delta, double zeta) {
  if (!(delta > 0.0)) throw DomainError("epsilon_star: delta must be positive");
  if (!(zeta > 0.0)) throw DomainError("epsilon_star: zeta must be positive");
  const double a = 1.0 / (T * T) + 4.0 * ell / (T * lambda_max);
  const double b = 2.0 + 2.0 * ell / (T * lambda_max);
  const double inner = sigma_r * sigma_r * std::max(a, b) / (delta * std::min(1.0, zeta * zeta));
  return 1.0 / (2.0 * sigma_L * std::sqrt(static_cast<double>(n))) / (1.0 + inner);
}

bool lemma5_feasible(double sigma_phi, double eta) {
  const double s2 = sigma_phi * sigma_phi;
  return s2 * s2 - s2 < 2.0 * (1.0 - eta);
}

double gc_threshold_bisect(const Game& g, double rho_F, double eta, double tol) {
  if (!g.is_quadratic()) throw DomainError("gc_threshold_bisect: quadratic games only");
  const Vec q = Vec::Zero(g.n());
  auto me = [&](double T) { return min_eig_sym(m_delta(g, q, rho_F, 0.0, T, eta)); };
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (me(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (me(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CertificateReport certify(const Game& g, const HmNssParams& prm, const Graph* graph,
                          const CertifyOptions& opt) {
  CertificateReport rep;
  double kappa, ell;
  if (g.constants && g.constants->ell > 0.0) {
    kappa = g.constants->kappa;
    ell = g.constants->ell;
  } else {
    const auto c = estimate_constants(g, opt.box, 2000);
    kappa = c.kappa;
    ell = c.ell;
  }
  rep.kappa = kappa;
  rep.ell = ell;
  std::optional<Spectrum> spec;
  if (graph && graph->n() >= 2) spec = spectrum_summary(*graph);
  rep.cn = condition_numbers(kappa, ell, prm.T, prm.T0, spec);
  const double inf = std::numeric_limits<double>::infinity();
  const bool potential = g.has_potential();
  double rho_J;
  if (opt.rho_J)
    rho_J = *opt.rho_J;
  else if (kappa > 0.0)
    rho_J = potential ? 1.0 / kappa : rep.cn.sigma_phi * rep.cn.sigma_phi / kappa;
  else
    rho_J = inf;
  rep.rc1.rho_J = rho_J;
  rep.rc1.holds = check_rc1(prm.T, prm.T0, rho_J, prm.alpha);
  rep.rc2.bound = (1.0 - prm.eta) / (2.0 * ell);
  rep.rc2.holds = check_rc2(prm.T, prm.eta, ell);
  rep.rc3.delta = opt.delta;
  if (kappa > 0.0) {
    try {
      const auto r3 = check_rc3(prm.T, prm.eta, rep.cn.sigma_phi, ell, kappa, opt.delta);
      rep.rc3.holds = r3.holds;
      rep.rc3.bound = r3.bound;
      rep.rc3.unbounded = r3.unbounded;
    } catch (const DomainError&) {
      rep.rc3.admissible = false;
    }
  } else {
    rep.rc3.admissible = false;
  }
  rep.gc.delta = opt.delta;
  rep.gc.rho_F = opt.rho_F ? *opt.rho_F : (opt.delta > 0.0 && kappa > 0.0 ? rep.cn.sigma_phi * ell : ell);
  rep.gc.chi_domain_flag = chi_domain_disagrees(opt.delta, prm.T);
  try {
    const auto gc = is_globally_contractive(g, rep.gc.rho_F, opt.delta, prm.T, prm.eta, opt.box,
                                            opt.grid);
    rep.gc.min_eig = gc.min_eig;
    rep.gc.holds = gc.holds;
    rep.gc.grid_only = gc.grid_only;
    rep.gc.evaluated = true;
  } catch (const DomainError&) {
    rep.gc.evaluated = false;
  }
  rep.gamma = std::isfinite(rho_J) ? gamma_rate(prm.T, prm.T0, rho_J) : -inf;
  rep.t_opt = kappa > 0.0 ? t_opt(kappa, rep.cn.sigma_phi, prm.T0) : inf;
  if (opt.zeta && spec && opt.delta > 0.0)
    rep.epsilon_star = epsilon_star(spec->sigma_L, rep.cn.sigma_r, g.n(), prm.T, ell,
                                    spec->lambda_max, opt.delta, *opt.zeta);
  rep.lemma5_feasible = kappa > 0.0 && lemma5_feasible(rep.cn.sigma_phi, prm.eta);
  return rep;
}

}  // namespace hmnss
