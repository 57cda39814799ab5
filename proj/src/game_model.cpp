#include "hmnss/game_model.hpp"

#include <cmath>
#include <limits>

#include "hmnss/errors.hpp"
#include "hmnss/kernels.hpp"
#include "hmnss/rng.hpp"

namespace hmnss {

bool GameClass::consistent() const {
  if (strongly_monotone && !strictly_monotone) return false;
  if (strictly_monotone && !monotone) return false;
  return true;
}

void CostOracle::all(const double* x, double* out) const {
  if (A_) {
    const auto& k = kernels::active();
    k.matvec(A_->data(), x, out, n_, n_);
    for (int i = 0; i < n_; ++i) {
      const double aii = (*A_)(i, i);
      out[i] = x[i] * (out[i] - 0.5 * aii * x[i] + (*b_)(i));
    }
    return;
  }
  const Eigen::Map<const Vec> xv(x, n_);
  const Vec xc = xv;
  for (int i = 0; i < n_; ++i) out[i] = (*costs_)[i](xc);
}

double CostOracle::one(int i, const double* profile) const {
  if (A_) {
    const double aii = (*A_)(i, i);
    const double row = kernels::active().dot(A_->row(i).data(), profile, n_);
    return profile[i] * (row - 0.5 * aii * profile[i] + (*b_)(i));
  }
  const Vec xc = Eigen::Map<const Vec>(profile, n_);
  return (*costs_)[i](xc);
}

std::shared_ptr<Game> Game::quadratic(Mat A, Vec b) {
  if (A.rows() != A.cols() || A.rows() != b.size() || A.rows() < 1)
    throw DomainError("quadratic game: A must be n x n and b an n-vector");
  if (!A.allFinite() || !b.allFinite()) throw DomainError("quadratic game: non-finite data");
  std::shared_ptr<Game> g(new Game());
  g->n_ = static_cast<int>(A.rows());
  g->quadratic_ = true;
  g->symmetric_ = (A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + A.cwiseAbs().maxCoeff());
  g->A_ = std::move(A);
  g->b_ = std::move(b);
  g->cls.quadratic = true;
  g->cls.potential = g->symmetric_;
  return g;
}

std::shared_ptr<Game> Game::analytic(int n, AnalyticCosts costs) {
  if (n < 1 || static_cast<int>(costs.costs.size()) != n ||
      static_cast<int>(costs.partials.size()) != n)
    throw DomainError("analytic game: need n cost and n partial evaluators");
  std::shared_ptr<Game> g(new Game());
  g->n_ = n;
  g->analytic_ = std::move(costs);
  g->cls.potential = static_cast<bool>(g->analytic_.potential);
  return g;
}

static void require_finite(const Vec& q) {
  if (!q.allFinite()) throw DomainError("non-finite action profile");
}

Vec Game::pseudogradient(const Vec& q) const {
  if (q.size() != n_) throw DomainError("pseudogradient: dimension mismatch");
  require_finite(q);
  Vec out(n_);
  pseudogradient_into(q.data(), out.data());
  return out;
}

void Game::pseudogradient_into(const double* q, double* out) const {
  if (quadratic_) {
    kernels::active().matvec(A_.data(), q, out, n_, n_);
    for (int i = 0; i < n_; ++i) out[i] += b_(i);
    return;
  }
  const Vec qc = Eigen::Map<const Vec>(q, n_);
  for (int i = 0; i < n_; ++i) out[i] = analytic_.partials[i](qc);
}

double Game::partial(int i, const double* e) const {
  if (quadratic_) return kernels::active().dot(A_.row(i).data(), e, n_) + b_(i);
  const Vec ec = Eigen::Map<const Vec>(e, n_);
  return analytic_.partials[i](ec);
}

double Game::cost(int i, const Vec& q) const {
  if (quadratic_) {
    const double row = A_.row(i).dot(q);
    return q(i) * (row - 0.5 * A_(i, i) * q(i) + b_(i));
  }
  return analytic_.costs[i](q);
}

double fd_step(const Vec& q) { return std::max(1e-6, 1e-6 * q.cwiseAbs().maxCoeff()); }

Mat Game::jacobian(const Vec& q) const {
  if (q.size() != n_) throw DomainError("jacobian: dimension mismatch");
  require_finite(q);
  if (quadratic_) return A_;
  const double h = fd_step(q);
  Mat J(n_, n_);
  Vec qp = q, qm = q;
  for (int k = 0; k < n_; ++k) {
    qp(k) = q(k) + h;
    qm(k) = q(k) - h;
    const Vec gp = pseudogradient(qp);
    const Vec gm = pseudogradient(qm);
    J.col(k) = (gp - gm) / (2.0 * h);
    qp(k) = q(k);
    qm(k) = q(k);
  }
  if (!J.allFinite()) throw NumericalError("jacobian: non-finite entries");
  return J;
}

bool Game::has_potential() const {
  return quadratic_ ? symmetric_ : static_cast<bool>(analytic_.potential);
}

double Game::potential(const Vec& q) const {
  if (!has_potential()) throw ConfigError("game has no potential");
  if (quadratic_) return 0.5 * q.dot(A_ * q) + b_.dot(q);
  return analytic_.potential(q);
}

double Game::potential_gap(const Vec& q) const {
  if (!has_potential()) throw ConfigError("game has no potential");
  if (known_ne.empty()) throw ConfigError("potential gap needs a stored equilibrium");
  const Vec& qs = nearest_ne(*this, q);
  if (quadratic_) {
    const Vec d = q - qs;
    return std::max(0.0, 0.5 * d.dot(A_ * d));
  }
  return std::max(0.0, analytic_.potential(q) - analytic_.potential(qs));
}

CostOracle Game::cost_oracle() const {
  CostOracle o;
  o.n_ = n_;
  if (quadratic_) {
    o.A_ = &A_;
    o.b_ = &b_;
  } else {
    o.costs_ = &analytic_.costs;
  }
  o.keep_ = shared_from_this();
  return o;
}

ConstantEstimate estimate_constants(const Game& g, const Box& box, int n_samples,
                                    std::uint64_t seed) {
  if (n_samples < 2) throw DomainError("estimate_constants: n_samples must be >= 2");
  const int n = g.n();
  if (g.is_quadratic()) {
    const Mat S = 0.5 * (g.A() + g.A().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g.A());
    return {es.eigenvalues().minCoeff(), svd.singularValues()(0), false};
  }
  if (box.lo.size() != n || box.hi.size() != n) throw DomainError("sample box dimension");
  for (int i = 0; i < n; ++i)
    if (!(box.hi(i) > box.lo(i))) throw DomainError("degenerate sample box");
  Rng rng(seed);
  auto draw = [&] {
    Vec q(n);
    for (int i = 0; i < n; ++i) q(i) = rng.uniform(box.lo(i), box.hi(i));
    return q;
  };
  double kappa = std::numeric_limits<double>::infinity();
  double ell = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const Vec a = draw(), b = draw();
    const Vec dq = a - b;
    const double nq2 = dq.squaredNorm();
    if (nq2 <= 0.0) continue;
    const Vec dg = g.pseudogradient(a) - g.pseudogradient(b);
    kappa = std::min(kappa, dg.dot(dq) / nq2);
    ell = std::max(ell, dg.norm() / std::sqrt(nq2));
  }
  return {std::max(0.0, kappa), ell, true};
}

Vec solve_quadratic_ne(const Game& g) {
  if (!g.is_quadratic()) throw DomainError("solve_quadratic_ne: game is not quadratic");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g.A());
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw SingularMatrixError("solve_quadratic_ne: singular A");
  Vec q = lu.solve(-g.b());
  // one step of iterative refinement
  const Vec r = g.A() * q + g.b();
  q -= lu.solve(r);
  return q;
}

double ne_residual(const Game& g, const Vec& q) { return g.pseudogradient(q).norm(); }

const Vec& nearest_ne(const Game& g, const Vec& q) {
  if (g.known_ne.empty()) throw ConfigError("no stored equilibrium");
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.known_ne.size(); ++k) {
    const double d = (q - g.known_ne[k]).squaredNorm();
    if (d < bd) {
      bd = d;
      best = k;
    }
  }
  return g.known_ne[best];
}

double dist_to_ne(const Game& g, const Vec& q) { return (q - nearest_ne(g, q)).norm(); }

void finish_quadratic(Game& g) {
  try {
    g.known_ne = {solve_quadratic_ne(g)};
  } catch (const SingularMatrixError&) {
    g.known_ne.clear();
  }
  const auto c = estimate_constants(g, Box{}, 2);
  GameConstants k;
  k.kappa = c.kappa;
  k.ell = c.ell;
  k.cocoercivity = c.kappa > 0 ? c.kappa / (c.ell * c.ell) : 0.0;
  k.reverse_lipschitz = c.kappa;
  g.constants = k;
  g.cls.monotone = c.kappa >= 0.0;
  g.cls.strictly_monotone = c.kappa > 0.0;
  g.cls.strongly_monotone = c.kappa > 0.0;
  g.cls.kappa = c.kappa;
  g.cls.cocoercive = c.kappa > 0.0;
  g.cls.c_o = k.cocoercivity;
}

namespace catalog {

std::shared_ptr<Game> duopoly() {
  Mat A(2, 2);
  A << 10, -5, -5, 10;
  Vec b(2);
  b << -250, -150;
  auto g = Game::quadratic(A, b);
  finish_quadratic(*g);
  g->cls.cocoercive = true;
  g->cls.c_o = 1.0 / g->constants->ell;
  g->constants->cocoercivity = g->cls.c_o;
  return g;
}

std::shared_ptr<Game> example4() {
  Mat A(2, 2);
  A << 6, 1.5, -1.5, 6;
  Vec qs(2);
  qs << 2, -2;
  auto g = Game::quadratic(A, -(A * qs));
  finish_quadratic(*g);
  return g;
}

static double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

std::shared_ptr<Game> logcosh(int n) {
  if (n < 1) throw DomainError("logcosh: n must be positive");
  Vec c(n);
  for (int i = 0; i < n; ++i) c(i) = 0.5 * (i + 1) * ((i % 2) ? -1.0 : 1.0);
  const double w = 0.5 / n;  // W = w 11', eigenvalues {0, 0.5}
  AnalyticCosts ac;
  for (int i = 0; i < n; ++i) {
    ac.costs.push_back([=](const Vec& q) {
      const Vec d = q - c;
      return log_cosh(d(i)) + 0.5 * w * d(i) * d(i) + d(i) * w * (d.sum() - d(i));
    });
    ac.partials.push_back([=](const Vec& q) {
      const Vec d = q - c;
      return std::tanh(d(i)) + w * d.sum();
    });
  }
  ac.potential = [=](const Vec& q) {
    const Vec d = q - c;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += log_cosh(d(i));
    const double t = d.sum();
    return s + 0.5 * w * t * t;
  };
  auto g = Game::analytic(n, std::move(ac));
  g->known_ne = {c};
  GameConstants k;
  k.kappa = 0.0;
  k.ell = 1.5;
  k.cocoercivity = 1.0 / 1.5;
  g->constants = k;
  g->cls.monotone = g->cls.strictly_monotone = true;
  g->cls.potential = true;
  g->cls.cocoercive = true;
  g->cls.c_o = 1.0 / 1.5;
  return g;
}

std::shared_ptr<Game> by_name(const std::string& name, int n) {
  if (name == "duopoly_frihauf" || name == "duopoly") return duopoly();
  if (name == "example4") return example4();
  if (name == "logcosh") return logcosh(n);
  throw ConfigError("unknown catalog game '" + name + "'");
}

}  // namespace catalog

}  // namespace hmnss
