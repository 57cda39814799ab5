#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hmnss/config.hpp"
#include "hmnss/diagnostics.hpp"
#include "hmnss/game_model.hpp"
#include "hmnss/hm_nss.hpp"
#include "hmnss/network.hpp"
#include "hmnss/reset_conditions.hpp"

namespace hmnss {

struct RandomGameSpec {
  int n = 2;
  double kappa = 1.0;
  double ell = 1.0;
  bool potential = true;
  std::uint64_t seed = 0;
  double ne_scale = 5.0;
};

// quadratic game with lambda_min(sym A) = kappa and sigma_max(A) = ell;
// symmetric A when potential, NE at a seeded point via b = -A q*
std::shared_ptr<Game> generate_random_game(const RandomGameSpec& spec);

GamePtr build_game(const GameSpecConfig& gc);
Graph build_graph(const GraphConfig& gc, int n);
HmNssParams build_params(const ExperimentConfig& c, int n);

// everything needed to integrate one configured run
struct Setup {
  GamePtr game;
  std::optional<Graph> graph;
  HmNssParams prm;
  Layout lay;
  bool state_is_q_only = false;  // psg flow carries q alone
  HybridSystemDef sys;
  Vec x0;
  double h = 1e-3;
  std::optional<LyapunovVariant> lyap;
};

Setup build_setup(const ExperimentConfig& c);
HybridArc simulate(const Setup& s, const ExperimentConfig& c);

struct RunSummary {
  std::string name;
  std::string hash;
  std::string variant;
  int n = 0;
  std::optional<CertificateReport> cert;
  double initial_dist = 0.0;
  double final_dist = 0.0;
  double min_dist = 0.0;
  double max_dist = 0.0;
  bool diverged = false;
  bool zeno = false;
  std::string behavior;  // converged | diverged | oscillatory | bounded
  std::optional<double> sync_time;
  long jumps = 0;
  int flow_violations = 0;
  int jump_increases = 0;
  RateFit rate;
  Vec ne;
  Vec final_q;
  std::optional<double> reference_ne_gap;
  std::vector<std::string> warnings;
  std::vector<std::string> annotations;
  double wall_seconds = 0.0;
};

RunSummary summarize(const ExperimentConfig& c, const Setup& s, const HybridArc& arc);
std::string summary_json(const RunSummary& r);

std::vector<std::string> csv_header(const Setup& s);
void write_trajectory_csv(const std::string& path, const Setup& s, const HybridArc& arc);

struct RunOptions {
  bool write = true;
  std::string dir;  // empty -> <output_dir>/<name>
};

RunSummary run_experiment(const ExperimentConfig& c, const RunOptions& opt = {});

// threads <= 0 -> HMNSS_THREADS or hardware concurrency
std::vector<RunSummary> run_sweep(const std::vector<ExperimentConfig>& runs, int threads = 0,
                                  bool write = true);

struct CsvArc {
  std::vector<std::string> columns;  // state columns, in file order
  HybridArc arc;
};

CsvArc load_arc_csv(const std::string& path);
// closeness on the state columns the two files share
double compare_csv(const std::string& a, const std::string& b, double T, int J);

int thread_count_from_env();

}  // namespace hmnss
