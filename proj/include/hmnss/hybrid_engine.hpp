#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hmnss/linalg.hpp"
#include "hmnss/rng.hpp"

namespace hmnss {

struct HybridTime {
  double t = 0.0;
  int j = 0;
};

struct Sample {
  double t = 0.0;
  int j = 0;
  Vec x;
};

struct JumpRecord {
  double t = 0.0;
  int j_before = 0;
  int player = -1;
  std::string branch;
};

struct HybridArc {
  std::vector<Sample> samples;
  std::vector<JumpRecord> events;
  bool diverged = false;
  bool zeno_tripped = false;
  std::vector<std::string> annotations;

  // true when every consecutive pair satisfies the hybrid-time ordering rules
  bool well_formed() const;
};

enum class JumpPolicyKind { LowestIndex, Random, EnumerateAll };

// Resolves the set-valued choices inside a jump map.
class JumpSelector {
 public:
  explicit JumpSelector(JumpPolicyKind kind = JumpPolicyKind::LowestIndex, std::uint64_t seed = 0)
      : kind_(kind), rng_(seed) {}

  int pick(const std::vector<int>& candidates);
  // element chosen at a coordination tie: true -> T, false -> T0
  bool tie_goes_high();
  JumpPolicyKind kind() const { return kind_; }

 private:
  JumpPolicyKind kind_;
  Rng rng_;
};

enum class PerturbationMode { None, Sinusoid, Noise };
enum class PerturbationTarget { Output, Input, Both };

struct Perturbation {
  PerturbationMode mode = PerturbationMode::None;
  double amplitude = 0.0;
  double omega = 1.0;  // rad/s for the sinusoid
  double phase = 0.0;
  double hold = 1e-2;  // noise is piecewise constant over windows of this length
  std::uint64_t seed = 0;
  PerturbationTarget target = PerturbationTarget::Output;

  bool active() const { return mode != PerturbationMode::None && amplitude != 0.0; }
  // fills e[0..m) with the signal at time t; |e_i| <= amplitude
  void signal(double t, double* e, int m) const;
};

using FlowFn = std::function<void(double t, const double* x, const double* e, double* dx)>;

struct JumpOutcome {
  int player = -1;
  std::string branch;
};

struct HybridSystemDef {
  std::size_t dim = 0;
  int players = 1;
  FlowFn flow;
  std::function<bool(const Vec&)> flow_set;
  std::function<bool(const Vec&)> jump_set;
  // negative inside C away from D, zero on the boundary; empty for pure flows
  std::function<double(const Vec&)> event_value;
  std::function<JumpOutcome(Vec&, JumpSelector&)> jump;
  // applied after every integrator step (e.g. projection onto an invariant manifold)
  std::function<void(Vec&)> project;
  double tol_event = 1e-10;
};

struct Horizon {
  double t_max = 1.0;
  long j_max = std::numeric_limits<int>::max();
};

struct RecorderSpec {
  long stride = 1;
};

constexpr double kDivergenceBound = 1e12;

enum class FlowStatus { Event, Timeout, Diverged };

struct FlowResult {
  FlowStatus status = FlowStatus::Timeout;
  double elapsed = 0.0;
};

class Rk4 {
 public:
  explicit Rk4(std::size_t dim) : k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim) {}
  void step(const FlowFn& f, const Perturbation& pert, int m, double t, const Vec& x, double h,
            Vec& out);

 private:
  void eval(const FlowFn& f, const Perturbation& pert, int m, double t, const double* x,
            double* dx);
  Vec k1, k2, k3, k4, tmp;
  std::vector<double> e_;
};

// Flows from x (in place) until the jump set is reached or max_flow elapses.
FlowResult integrate_flow(const HybridSystemDef& sys, Vec& x, double t0, double max_flow, double h,
                          const Perturbation& pert = {},
                          const std::function<void(double, const Vec&)>& on_step = {});

HybridArc run(const HybridSystemDef& sys, const Vec& x0, const Horizon& horizon, double h,
              JumpSelector& selector, const Perturbation& pert, const RecorderSpec& rec);

// state of the arc at hybrid time (t, j) by linear interpolation inside the j-th interval
struct ArcView {
  const HybridArc* arc;
  std::vector<std::size_t> begin, end;  // sample ranges per j
  int j_max = -1;
  explicit ArcView(const HybridArc& a, std::vector<int> columns = {});
  std::vector<int> cols;
  double dist_at(int j, double s, const double* x, std::size_t& hint) const;
};

constexpr double kFarApart = std::numeric_limits<double>::infinity();

// smallest eps so that a and b are (T,J,eps)-close on the selected state columns
// (all columns when empty), up to the sampling grid
double closeness(const HybridArc& a, const HybridArc& b, double T, int J,
                 const std::vector<int>& columns = {});

}  // namespace hmnss
