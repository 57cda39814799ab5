#pragma once

#include <optional>
#include <vector>

#include "hmnss/game_model.hpp"
#include "hmnss/hm_nss.hpp"
#include "hmnss/network.hpp"

namespace hmnss {

struct ConditionNumbers {
  double sigma_phi = 1.0;
  double sigma_r = 1.0;
  double sigma_L = 1.0;
};

ConditionNumbers condition_numbers(double kappa, double ell, double T, double T0,
                                   std::optional<Spectrum> spec = std::nullopt);

bool check_rc1(double T, double T0, double rho_J, const Vec& alpha);
double gamma_rate(double T, double T0, double rho_J);
bool check_rc2(double T, double eta, double ell);

struct Rc3Result {
  bool holds = false;
  double bound = 0.0;      // upper limit on T^2
  bool unbounded = false;  // zero denominator with positive numerator: any T admissible
};

Rc3Result check_rc3(double T, double eta, double sigma_phi, double ell, double kappa, double delta);

double chi(double rho_F, double delta, double T, double eta);
// the two published readings of the domain of chi (delta*T^2 < 1 versus
// delta^2*T^2 < 1) give different answers
bool chi_domain_disagrees(double delta, double T);

Mat m_delta(const Game& g, const Vec& q, double rho_F, double delta, double T, double eta);
double min_eig_sym(const Mat& M);

constexpr double kPdThreshold = 1e-10;

struct GcResult {
  bool holds = false;
  double min_eig = 0.0;
  bool grid_only = false;  // sampled certificate, not a proof
  int points = 0;
};

GcResult is_globally_contractive(const Game& g, double rho_F, double delta, double T, double eta,
                                 const Box& box, int grid = 10000,
                                 const std::vector<Vec>& extra_points = {});

struct TOpt {
  double value = 0.0;
  std::optional<bool> rc1;
  std::optional<bool> rc3;
};

double t_opt(double kappa, double sigma_phi, double T0);
TOpt t_opt_checked(double kappa, double sigma_phi, double T0, double eta, double ell,
                   double rho_J, const Vec& alpha, double delta);
double settling_time(double kappa, double sigma_phi, double sigma_r, double eta, double T0,
                     double nu, double M0);
double epsilon_star(double sigma_L, double sigma_r, int n, double T, double ell, double lambda_max,
                    double delta, double zeta);
bool lemma5_feasible(double sigma_phi, double eta);

// T at which the smallest eigenvalue of M_0 crosses zero (quadratic games)
double gc_threshold_bisect(const Game& g, double rho_F, double eta, double tol = 1e-12);

struct CertificateReport {
  struct {
    bool holds = false;
    double rho_J = 0.0;
  } rc1;
  struct {
    bool holds = false;
    double bound = 0.0;
  } rc2;
  struct {
    bool holds = false;
    double bound = 0.0;
    double delta = 0.0;
    bool unbounded = false;
    bool admissible = true;
  } rc3;
  struct {
    double rho_F = 0.0;
    double delta = 0.0;
    double min_eig = 0.0;
    bool holds = false;
    bool grid_only = false;
    bool chi_domain_flag = false;
    bool evaluated = false;
  } gc;
  double gamma = 0.0;
  double t_opt = 0.0;
  std::optional<double> epsilon_star;
  bool lemma5_feasible = false;
  ConditionNumbers cn;
  double kappa = 0.0;
  double ell = 0.0;
};

struct CertifyOptions {
  double delta = 0.0;
  std::optional<double> rho_F;
  std::optional<double> rho_J;
  std::optional<double> zeta;
  Box box;
  int grid = 10000;
};

CertificateReport certify(const Game& g, const HmNssParams& prm, const Graph* graph,
                          const CertifyOptions& opt);

}  // namespace hmnss
