#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmnss/hybrid_engine.hpp"
#include "hmnss/linalg.hpp"
#include "hmnss/model_free.hpp"

namespace hmnss {

enum class Variant { BaselineOde, PsgFlow, H1, H2, H3, H4 };

const char* variant_name(Variant v);

struct GameSpecConfig {
  std::string type = "quadratic";  // quadratic | catalog | random
  Mat A;
  Vec b;
  std::string catalog;
  int n = 0;
  double kappa = 0.0;
  double ell = 0.0;
  bool potential = true;
  std::uint64_t seed = 0;
  double ne_scale = 5.0;
  std::optional<Vec> reference_ne;
};

struct GraphConfig {
  std::string type = "complete";  // complete | ring | path | erdos_renyi | edges
  double p = 0.5;
  std::uint64_t seed = 0;
  std::vector<std::pair<int, int>> edges;  // 0-based after parsing
};

struct InitialConfig {
  std::optional<Vec> q;
  double q_lo = -1.0, q_hi = 1.0;
  std::uint64_t q_seed = 0;
  std::optional<Vec> p;  // default p = q
  std::string tau_mode = "T0";  // T0 | random | explicit
  std::optional<Vec> tau;
  std::uint64_t tau_seed = 0;
  std::string qhat_mode = "own";  // own | consensus
  std::string phase = "sin";      // sin -> mu_i(0) = (0,1); cos -> (1,0)
};

struct ExperimentConfig {
  std::string name;
  Variant variant = Variant::H1;
  GameSpecConfig game;
  GraphConfig graph;

  double eta = 0.5;
  double T0 = 0.1;
  double T = 1.0;
  std::vector<double> alpha{0.0};
  std::optional<std::vector<double>> r;
  bool coordination = true;
  JumpPolicyKind jump_policy = JumpPolicyKind::LowestIndex;
  std::uint64_t jump_seed = 0;

  double epsilon = 1e-2;
  double d = 0.5;
  std::optional<double> zeta;

  double eps_a = 5e-2;
  double eps_p = 1e-2;
  double eps_c = 1e-1;
  std::optional<std::vector<Rational>> freqs;

  Perturbation perturbation;
  InitialConfig initial;

  double t_max = 10.0;
  long j_max = 100000000;
  std::optional<double> h;
  long stride = 1;

  double cert_delta = 0.0;
  std::optional<double> cert_rho_F;
  std::optional<double> cert_rho_J;
  double cert_box_lo = -10.0, cert_box_hi = 10.0;
  int cert_grid = 10000;

  std::string output_dir = "out";
  // ordered axes: dotted key -> values
  std::vector<std::pair<std::string, std::vector<double>>> sweep;

  std::string canonical;  // normalised text of the table, used for the hash
  std::string hash;
  std::vector<std::string> warnings;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

// one config per sweep grid point; axes sorted by key, last axis fastest
std::vector<ExperimentConfig> expand_sweep(const std::string& text, const std::string& source);

std::string fnv1a_hex(const std::string& s);

}  // namespace hmnss
