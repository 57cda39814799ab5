#pragma once

#include <vector>

#include "hmnss/game_model.hpp"
#include "hmnss/hybrid_engine.hpp"
#include "hmnss/network.hpp"

namespace hmnss {

// Offsets of the blocks inside a packed state vector: q, p, tau, [mu], [qhat].
struct Layout {
  int n = 0;
  bool has_mu = false;
  bool has_qhat = false;

  int q() const { return 0; }
  int p() const { return n; }
  int tau() const { return 2 * n; }
  int mu() const { return 3 * n; }
  int qhat() const { return 3 * n + (has_mu ? 2 * n : 0); }
  int dim() const { return qhat() + (has_qhat ? n * n - n : 0); }
};

struct HmNssParams {
  double eta = 0.5;
  double T0 = 0.1;
  double T = 1.0;
  Vec alpha;  // entries in {0,1}
  Vec r;      // coordination thresholds
  bool coordination = true;
  double tol_event = 1e-10;

  // alpha = 0, r_j = (T-T0)/(2n)
  static HmNssParams defaults(int n, double eta, double T0, double T);
  void validate(int n) const;
  double flow_length() const { return (T - T0) / eta; }
  double sync_time(int n) const { return flow_length() + n; }
  double min_alpha() const { return alpha.size() ? alpha.minCoeff() : 0.0; }
};

struct PlayerState {
  double q, p, tau;
};

// pseudogradient with the perturbation applied at its input and/or output
void perturbed_gradient(const Game& g, const double* q, const double* e, PerturbationTarget target,
                        double* out, double* work);

Vec flow_map_h1(const Game& g, const HmNssParams& prm, const Vec& x);
PlayerState reset_map(const HmNssParams& prm, const PlayerState& xi, int i);
std::vector<double> coordination_map(const HmNssParams& prm, double tau_j, int j);
double event_value(const HmNssParams& prm, const Layout& lay, const Vec& x);
JumpOutcome jump_map_g1(const HmNssParams& prm, const Graph& graph, const Layout& lay, Vec& x,
                        JumpSelector& sel);
// every post-cascade state reachable through the sequential orderings (n <= 4)
std::vector<Vec> enumerate_cascades(const HmNssParams& prm, const Graph& graph, const Layout& lay,
                                    const Vec& x);

// distance of a timer vector to {T0,T}^n union 1*[T0,T]
double dist_to_sync(const Vec& tau, double T0, double T);

HybridSystemDef make_h1_system(GamePtr g, const Graph& graph, const HmNssParams& prm,
                               PerturbationTarget target = PerturbationTarget::Output);
// un-restarted momentum ODE; the scalar tau is carried as n identical copies
HybridSystemDef make_baseline_ode(GamePtr g, double eta,
                                  PerturbationTarget target = PerturbationTarget::Output);
constexpr double kTauFloor = 1e-6;
Vec baseline_initial(const Vec& q0, const Vec& p0, double T0);
// q' = -G(q)
HybridSystemDef make_psg_flow(GamePtr g, PerturbationTarget target = PerturbationTarget::Output);

Vec pack_h1(const Vec& q, const Vec& p, const Vec& tau);

}  // namespace hmnss
