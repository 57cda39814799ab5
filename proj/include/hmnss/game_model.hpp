#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hmnss/linalg.hpp"

namespace hmnss {

struct GameConstants {
  double kappa = 0.0;
  double ell = 0.0;
  double cocoercivity = 0.0;
  double reverse_lipschitz = 0.0;
};

struct GameClass {
  bool monotone = false;
  bool strictly_monotone = false;
  bool strongly_monotone = false;
  bool potential = false;
  bool quadratic = false;
  bool cocoercive = false;
  double kappa = 0.0;
  double c_o = 0.0;

  bool consistent() const;
};

using ScalarField = std::function<double(const Vec&)>;

struct AnalyticCosts {
  std::vector<ScalarField> costs;     // phi_i(q)
  std::vector<ScalarField> partials;  // d phi_i / d q_i (q)
  ScalarField potential;              // optional, diagnostics only
};

// Cost values only; handed to the payoff-based flows so they cannot reach
// the pseudogradient.
class CostOracle {
 public:
  int n() const { return n_; }
  // out[i] = phi_i(x) for one common profile x
  void all(const double* x, double* out) const;
  // phi_i(profile)
  double one(int i, const double* profile) const;

 private:
  friend class Game;
  int n_ = 0;
  const Mat* A_ = nullptr;
  const Vec* b_ = nullptr;
  const std::vector<ScalarField>* costs_ = nullptr;
  std::shared_ptr<const void> keep_;
};

class Game : public std::enable_shared_from_this<Game> {
 public:
  static std::shared_ptr<Game> quadratic(Mat A, Vec b);
  static std::shared_ptr<Game> analytic(int n, AnalyticCosts costs);

  int n() const { return n_; }
  bool is_quadratic() const { return quadratic_; }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

  Vec pseudogradient(const Vec& q) const;
  // unchecked hot-path variant
  void pseudogradient_into(const double* q, double* out) const;
  // player i's own partial evaluated at profile e (the estimate vector of player i)
  double partial(int i, const double* e) const;
  double cost(int i, const Vec& q) const;
  Mat jacobian(const Vec& q) const;

  bool has_potential() const;
  double potential(const Vec& q) const;
  // P(q) - P(q*) against the first stored equilibrium, clipped at 0
  double potential_gap(const Vec& q) const;

  CostOracle cost_oracle() const;

  std::vector<Vec> known_ne;
  std::optional<GameConstants> constants;
  GameClass cls;

 private:
  Game() = default;
  int n_ = 0;
  bool quadratic_ = false;
  bool symmetric_ = false;
  Mat A_;
  Vec b_;
  AnalyticCosts analytic_;
};

using GamePtr = std::shared_ptr<const Game>;

struct Box {
  Vec lo;
  Vec hi;
};

struct ConstantEstimate {
  double kappa = 0.0;
  double ell = 0.0;
  bool estimated = false;  // sampled bounds rather than exact values
};

double fd_step(const Vec& q);
ConstantEstimate estimate_constants(const Game& g, const Box& box, int n_samples,
                                    std::uint64_t seed = 1);
Vec solve_quadratic_ne(const Game& g);
double ne_residual(const Game& g, const Vec& q);
// Euclidean distance to the nearest stored equilibrium
double dist_to_ne(const Game& g, const Vec& q);
const Vec& nearest_ne(const Game& g, const Vec& q);

// stores the equilibrium (when A is nonsingular), exact constants and class flags
void finish_quadratic(Game& g);

namespace catalog {
// A=[[10,-5],[-5,10]], b=(-250,-150)
std::shared_ptr<Game> duopoly();
// (6,1.5;-1.5,6)(q-q*), q*=(2,-2)
std::shared_ptr<Game> example4();
// sum log cosh(q_i-c_i) + 0.5 (q-c)'W(q-c), W rank one: monotone, not strongly
std::shared_ptr<Game> logcosh(int n);
std::shared_ptr<Game> by_name(const std::string& name, int n);
}  // namespace catalog

}  // namespace hmnss
