#pragma once

#include "hmnss/hm_nss.hpp"

namespace hmnss {

struct H2Params {
  double epsilon = 1e-2;
};

// e = P'q + Q'qhat, stacked n x n (row i is player i's estimate vector)
Vec psi(const Vec& q, const Vec& qhat, int n);
// same thing through the dense selection matrices (reference path)
Vec psi_dense(const Vec& q, const Vec& qhat, const SelectionMatrices& sel);
// h(q) = Q(1 kron q)
Vec consensus_point(const Vec& q);
double consensus_error(const Layout& lay, const Vec& x);

// derivative of the packed state (q, p, tau, qhat)
Vec flow_map_h2(const Game& g, const HmNssParams& prm, const H2Params& h2, const Mat& L,
                const Vec& x);
JumpOutcome jump_map_g2(const HmNssParams& prm, const Graph& graph, const Layout& lay, Vec& x,
                        JumpSelector& sel);

HybridSystemDef make_h2_system(GamePtr g, const Graph& graph, const HmNssParams& prm,
                               const H2Params& h2,
                               PerturbationTarget target = PerturbationTarget::Output);
// estimates start at each player's own action
Vec h2_initial(const Vec& q, const Vec& p, const Vec& tau);
double h2_step(double h, const H2Params& h2);

namespace detail {
// shared by the H2 and H4 flows: E (n x n) = psi; LE = L * E
void laplacian_times(const Mat& L, const double* E, double* LE, int n);
void pack_estimates(const double* q, const double* qhat, double* E, int n);
}  // namespace detail

}  // namespace hmnss
