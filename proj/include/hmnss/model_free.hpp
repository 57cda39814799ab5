#pragma once

#include <vector>

#include "hmnss/hm_nss.hpp"

namespace hmnss {

struct Rational {
  long long num = 1;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Rational reduce(Rational r);
bool validate_frequencies(const std::vector<Rational>& freqs);
// (2i+1)/2 for i = 1, 2, ... skipping members that clash with earlier picks
std::vector<Rational> default_frequencies(int n);
// least common period of the dithers in units of fast time (eps_p = 1)
Rational common_period(const std::vector<Rational>& freqs);

struct OscillatorBank {
  std::vector<Rational> freqs;
  double eps_p = 1e-2;
  double eps_a = 5e-2;
  double max_freq() const;
};

// mu_i(0) = (0,1) for every player
Vec oscillator_initial(int n);
Vec oscillator_flow(const OscillatorBank& bank, const Vec& mu);
void renormalize(double* mu, int n);

// derivative of (q, p, tau, mu); only cost values are queried
Vec flow_map_h3(const CostOracle& costs, const HmNssParams& prm, const OscillatorBank& bank,
                const Vec& x);
// derivative of (q, p, tau, mu, qhat)
Vec flow_map_h4(const CostOracle& costs, const HmNssParams& prm, const OscillatorBank& bank,
                double eps_c, const Mat& L, const Vec& x);
JumpOutcome jump_map_g3(const HmNssParams& prm, const Graph& graph, const Layout& lay, Vec& x,
                        JumpSelector& sel);

HybridSystemDef make_h3_system(GamePtr g, const Graph& graph, const HmNssParams& prm,
                               const OscillatorBank& bank,
                               PerturbationTarget target = PerturbationTarget::Output);
HybridSystemDef make_h4_system(GamePtr g, const Graph& graph, const HmNssParams& prm,
                               const OscillatorBank& bank, double eps_c,
                               PerturbationTarget target = PerturbationTarget::Output);
double h3_step(double h, const OscillatorBank& bank);
// true when (eps_p, eps_a, eps_c) is not in non-decreasing order
bool small_parameter_order_inverted(double eps_p, double eps_a, double eps_c);

// the averaged system is the full-information flow
Vec average_flow_oracle(const Game& g, const HmNssParams& prm, const Vec& x);

// time average over one common period of (2/eps_a) phi_i(q + eps_a mu~) mu~_i at frozen q,
// with mu(0) = mu0
Vec dither_average(const CostOracle& costs, const OscillatorBank& bank, const Vec& mu0,
                   const Vec& q);

}  // namespace hmnss
