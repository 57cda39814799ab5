#pragma once

#include <string>
#include <vector>

#include "hmnss/game_model.hpp"
#include "hmnss/hm_nss.hpp"

namespace hmnss {

enum class LyapunovKind { Potential, NonPotential, Graph };

struct LyapunovVariant {
  LyapunovKind kind = LyapunovKind::Potential;
  double c_o = 0.0;        // cocoercivity weight in the non-potential term
  double d = 0.5;          // graph weight
  bool base_potential = false;  // which base function the graph variant wraps
};

struct LyapunovSample {
  double t = 0.0;
  int j = 0;
  double V1 = 0.0, V2 = 0.0, V3 = 0.0, Vt3 = 0.0, Vtheta = 0.0;
  double V_total = 0.0;
};

LyapunovSample eval_lyapunov(const Game& g, const LyapunovVariant& v, const Layout& lay,
                             const Vec& x);

struct FlowDecreaseReport {
  int checked = 0;
  int violations = 0;
  double max_positive_vdot = 0.0;
  std::vector<HybridTime> locations;
};

// samples with t + j >= t_sync only
FlowDecreaseReport check_flow_decrease(const HybridArc& arc, const Game& g,
                                       const LyapunovVariant& v, const Layout& lay, double t_sync);

struct CascadeRecord {
  double t = 0.0;
  int j_first = 0;
  int length = 0;
  bool synchronized = false;
  double V_pre = 0.0, V_post = 0.0;
};

struct JumpDecreaseReport {
  std::vector<CascadeRecord> cascades;
  int increases = 0;            // V_post - V_pre > tol
  int contraction_checked = 0;
  int contraction_violations = 0;
  double worst_factor = 0.0;    // max V_post/V_pre over checked cascades
  double gamma = 0.0;
};

// cascades are maximal runs of jumps at one t; the contraction test applies to
// cascades that start from a synchronized timer vector when check_contraction is set
JumpDecreaseReport check_jump_decrease(const HybridArc& arc, const Game& g,
                                       const LyapunovVariant& v, const Layout& lay,
                                       const HmNssParams& prm, double rho_J,
                                       bool check_contraction);

enum class RateTheorem { T1i1, T1i3, T2, T3i5, L6 };

struct RateBoundReport {
  RateTheorem theorem = RateTheorem::T1i3;
  int checked = 0;
  int violations = 0;
  double worst_margin = 0.0;  // min over samples of (bound - value) / (1 + bound)
  double M0 = 0.0;
  std::vector<double> c;      // per-interval constants (T1i1, T2)
  int monotone_checked = 0;
  int monotone_violations = 0;  // within-interval increases of the tau_s^2-weighted quantity
  double worst_monotone_rel = 0.0;
  bool c_nonincreasing = true;
};

struct RateBoundOptions {
  double nu = 0.0;  // L6 target radius; 0 -> 1e-3*M0
  double tol = 1e-6;
};

RateBoundReport check_rate_bounds(const HybridArc& arc, const Game& g, const HmNssParams& prm,
                                  RateTheorem theorem, const RateBoundOptions& opt = {});

struct RateFit {
  double lambda_hat = 0.0;
  double r2 = 0.0;
  bool clipped = false;
  int points = 0;
};

RateFit fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& dist);
RateFit fit_exponential_rate(const HybridArc& arc, const Game& g, double t0, double t1);

constexpr double lyap_tol(double V) { return 1e-6 * (1.0 + V); }

}  // namespace hmnss
