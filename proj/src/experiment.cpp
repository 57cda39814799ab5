#include "hmnss/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "hmnss/errors.hpp"
#include "hmnss/kernels.hpp"
#include "hmnss/model_free.hpp"
#include "hmnss/partial_info.hpp"
#include "hmnss/rng.hpp"
#include "json.hpp"

namespace hmnss {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Mat random_orthogonal(int n, Rng& rng) {
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  // fix column signs so the factorisation is unique
  const Eigen::MatrixXd R = qr.matrixQR();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

double sigma_max(const Mat& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues()(0);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::shared_ptr<Game> generate_random_game(const RandomGameSpec& s) {
  if (s.n < 2) throw ConfigError("random game: n must be >= 2");
  if (!(s.kappa > 0.0) || !(s.ell > 0.0)) throw ConfigError("random game: kappa and ell must be positive");
  if (s.kappa > s.ell) throw ConfigError("random game: kappa must not exceed ell");
  const int n = s.n;
  Rng rng(s.seed);
  const Mat Q = random_orthogonal(n, rng);
  Vec ev(n);
  Mat A;
  if (s.potential) {
    ev(0) = s.kappa;
    ev(n - 1) = s.ell;
    for (int i = 1; i < n - 1; ++i) ev(i) = rng.uniform(s.kappa, s.ell);
    A = Q * ev.asDiagonal() * Q.transpose();
    A = (0.5 * (A + A.transpose())).eval();
  } else {
    const double top = s.kappa + 0.5 * (s.ell - s.kappa);
    ev(0) = s.kappa;
    for (int i = 1; i < n; ++i) ev(i) = rng.uniform(s.kappa, top);
    Mat S = Q * ev.asDiagonal() * Q.transpose();
    S = (0.5 * (S + S.transpose())).eval();
    Mat K(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) K(i, j) = rng.normal();
    K = (0.5 * (K - K.transpose())).eval();
    K /= sigma_max(K);
    const double base = sigma_max(S);
    if (base > s.ell * (1.0 + 1e-12)) throw ConfigError("random game: infeasible kappa/ell targets");
    double lo = 0.0, hi = 1.0;
    while (sigma_max(S + hi * K) < s.ell) {
      hi *= 2.0;
      if (hi > 1e12) throw ConfigError("random game: infeasible kappa/ell targets");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (sigma_max(S + mid * K) < s.ell ? lo : hi) = mid;
    }
    A = S + 0.5 * (lo + hi) * K;
  }
  Vec qs(n);
  for (int i = 0; i < n; ++i) qs(i) = rng.uniform(-s.ne_scale, s.ne_scale);
  const Vec b = -(A * qs);
  auto g = Game::quadratic(A, b);
  finish_quadratic(*g);
  return g;
}

GamePtr build_game(const GameSpecConfig& gc) {
  std::shared_ptr<Game> g;
  if (gc.type == "quadratic") {
    try {
      g = Game::quadratic(gc.A, gc.b);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("game: ") + e.what());
    }
    finish_quadratic(*g);
  } else if (gc.type == "catalog") {
    try {
      g = catalog::by_name(gc.catalog, gc.n);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("game.name: ") + e.what());
    }
  } else {
    g = generate_random_game({gc.n, gc.kappa, gc.ell, gc.potential, gc.seed, gc.ne_scale});
  }
  if (gc.reference_ne && gc.reference_ne->size() != g->n())
    throw ConfigError("game.reference_ne has the wrong length");
  return g;
}

Graph build_graph(const GraphConfig& gc, int n) {
  try {
    if (gc.type == "complete") return Graph::complete(n);
    if (gc.type == "ring") return Graph::ring(n);
    if (gc.type == "path") return Graph::path(n);
    if (gc.type == "erdos_renyi") return Graph::erdos_renyi(n, gc.p, gc.seed);
    return Graph(n, gc.edges);
  } catch (const GraphError& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
}

HmNssParams build_params(const ExperimentConfig& c, int n) {
  HmNssParams prm = HmNssParams::defaults(n, c.eta, c.T0, c.T);
  if (c.alpha.size() == 1) {
    prm.alpha = Vec::Constant(n, c.alpha[0]);
  } else if (static_cast<int>(c.alpha.size()) == n) {
    prm.alpha = Eigen::Map<const Vec>(c.alpha.data(), n);
  } else {
    throw ConfigError("params.alpha must be a scalar or have one entry per player");
  }
  if (c.r) {
    if (static_cast<int>(c.r->size()) != n) throw ConfigError("params.r must have one entry per player");
    prm.r = Eigen::Map<const Vec>(c.r->data(), n);
  }
  prm.coordination = c.coordination;
  try {
    prm.validate(n);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  return prm;
}

namespace {

Vec initial_q(const InitialConfig& I, int n) {
  if (I.q) {
    if (I.q->size() != n) throw ConfigError("initial.q has the wrong length");
    return *I.q;
  }
  Rng rng(I.q_seed);
  Vec q(n);
  for (int i = 0; i < n; ++i) q(i) = rng.uniform(I.q_lo, I.q_hi);
  return q;
}

Vec initial_tau(const InitialConfig& I, const HmNssParams& prm, int n) {
  if (I.tau_mode == "explicit") {
    if (I.tau->size() != n) throw ConfigError("initial.tau has the wrong length");
    for (int i = 0; i < n; ++i)
      if ((*I.tau)(i) < prm.T0 || (*I.tau)(i) > prm.T) throw ConfigError("initial.tau must lie in [T0, T]");
    return *I.tau;
  }
  if (I.tau_mode == "random") {
    Rng rng(I.tau_seed);
    Vec t(n);
    for (int i = 0; i < n; ++i) t(i) = rng.uniform(prm.T0, prm.T);
    return t;
  }
  return Vec::Constant(n, prm.T0);
}

Vec mu_initial(const std::string& phase, int n) {
  Vec mu = oscillator_initial(n);
  if (phase == "cos")
    for (int i = 0; i < n; ++i) {
      mu(2 * i) = 1.0;
      mu(2 * i + 1) = 0.0;
    }
  return mu;
}

bool needs_graph(Variant v) { return v != Variant::BaselineOde && v != Variant::PsgFlow; }

}  // namespace

Setup build_setup(const ExperimentConfig& c) {
  Setup s;
  s.game = build_game(c.game);
  const int n = s.game->n();
  s.prm = build_params(c, n);
  if (needs_graph(c.variant)) s.graph = build_graph(c.graph, n);
  const auto target = c.perturbation.target;

  const Vec q0 = initial_q(c.initial, n);
  Vec p0 = q0;
  if (c.initial.p) {
    if (c.initial.p->size() != n) throw ConfigError("initial.p has the wrong length");
    p0 = *c.initial.p;
  }
  const Vec tau0 = initial_tau(c.initial, s.prm, n);
  const double h = c.h ? *c.h : 1e-3;
  s.h = h;
  s.lay = Layout{n, false, false};

  std::vector<Rational> freqs;
  if (c.variant == Variant::H3 || c.variant == Variant::H4) {
    freqs = c.freqs ? *c.freqs : default_frequencies(n);
    if (static_cast<int>(freqs.size()) != n)
      throw ConfigError("model_free.freqs must have one entry per player");
    try {
      if (!validate_frequencies(freqs))
        throw ConfigError("model_free.freqs violate the distinctness/resonance conditions");
    } catch (const DomainError& e) {
      throw ConfigError(std::string("model_free.freqs: ") + e.what());
    }
  }
  const OscillatorBank bank{freqs, c.eps_p, c.eps_a};

  switch (c.variant) {
    case Variant::BaselineOde:
      s.sys = make_baseline_ode(s.game, c.eta, target);
      s.x0 = baseline_initial(q0, p0, c.T0);
      break;
    case Variant::PsgFlow:
      s.sys = make_psg_flow(s.game, target);
      s.x0 = q0;
      s.state_is_q_only = true;
      break;
    case Variant::H1:
      s.sys = make_h1_system(s.game, *s.graph, s.prm, target);
      s.x0 = pack_h1(q0, p0, tau0);
      break;
    case Variant::H2: {
      if (!(c.epsilon > 0.0)) throw ConfigError("partial.epsilon must be positive");
      const H2Params h2{c.epsilon};
      s.sys = make_h2_system(s.game, *s.graph, s.prm, h2, target);
      s.lay.has_qhat = true;
      s.x0 = h2_initial(q0, p0, tau0);
      if (c.initial.qhat_mode == "consensus") s.x0.tail(n * n - n) = consensus_point(q0);
      s.h = h2_step(h, h2);
      break;
    }
    case Variant::H3:
    case Variant::H4: {
      if (!(c.eps_a > 0.0) || !(c.eps_p > 0.0)) throw ConfigError("model_free: eps_a and eps_p must be positive");
      const bool h4 = c.variant == Variant::H4;
      if (h4) {
        if (!(c.eps_c > 0.0)) throw ConfigError("model_free.eps_c must be positive");
        s.sys = make_h4_system(s.game, *s.graph, s.prm, bank, c.eps_c, target);
      } else {
        s.sys = make_h3_system(s.game, *s.graph, s.prm, bank, target);
      }
      s.lay.has_mu = true;
      s.lay.has_qhat = h4;
      s.x0 = Vec::Zero(s.lay.dim());
      s.x0.segment(s.lay.q(), n) = q0;
      s.x0.segment(s.lay.p(), n) = p0;
      s.x0.segment(s.lay.tau(), n) = tau0;
      s.x0.segment(s.lay.mu(), 2 * n) = mu_initial(c.initial.phase, n);
      if (h4) {
        const Vec est = c.initial.qhat_mode == "consensus"
                            ? consensus_point(q0)
                            : Vec(h2_initial(q0, p0, tau0).tail(n * n - n));
        s.x0.segment(s.lay.qhat(), n * n - n) = est;
      }
      s.h = h3_step(h, bank);
      if (h4) s.h = std::min(s.h, c.eps_c / 10.0);
      break;
    }
  }

  if (!s.state_is_q_only) {
    LyapunovVariant v;
    const bool pot = s.game->has_potential();
    v.kind = pot ? LyapunovKind::Potential : LyapunovKind::NonPotential;
    v.c_o = s.game->cls.c_o;
    if (s.lay.has_qhat) {
      v.kind = LyapunovKind::Graph;
      v.base_potential = pot;
      v.d = c.d;
    }
    try {
      eval_lyapunov(*s.game, v, s.lay, s.x0);
      s.lyap = v;
    } catch (const Error&) {
      s.lyap.reset();
    }
  }
  return s;
}

HybridArc simulate(const Setup& s, const ExperimentConfig& c) {
  JumpSelector sel(c.jump_policy, c.jump_seed);
  Horizon hz{c.t_max, c.j_max};
  return run(s.sys, s.x0, hz, s.h, sel, c.perturbation, RecorderSpec{c.stride});
}

std::vector<std::string> csv_header(const Setup& s) {
  const int n = s.game->n();
  std::vector<std::string> h{"t", "j"};
  auto idx = [](int i) { return std::to_string(i + 1); };
  for (int i = 0; i < n; ++i) h.push_back("q_" + idx(i));
  if (!s.state_is_q_only) {
    for (int i = 0; i < n; ++i) h.push_back("p_" + idx(i));
    for (int i = 0; i < n; ++i) h.push_back("tau_" + idx(i));
    if (s.lay.has_mu)
      for (int i = 0; i < n; ++i) {
        h.push_back("mu_" + idx(i) + "_c");
        h.push_back("mu_" + idx(i) + "_s");
      }
    if (s.lay.has_qhat)
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
          if (k != i) h.push_back("qhat_" + idx(i) + "_" + idx(k));
  }
  h.push_back("dist_to_ne");
  h.push_back("V_total");
  return h;
}

void write_trajectory_csv(const std::string& path, const Setup& s, const HybridArc& arc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const auto header = csv_header(s);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << "\n";
  const int n = s.game->n();
  const bool have_ne = !s.game->known_ne.empty();
  std::string line;
  for (const auto& smp : arc.samples) {
    line = fmt(smp.t);
    line += ",";
    line += std::to_string(smp.j);
    for (Eigen::Index k = 0; k < smp.x.size(); ++k) {
      line += ",";
      line += fmt(smp.x(k));
    }
    const double d = have_ne ? dist_to_ne(*s.game, smp.x.head(n)) : kNan;
    double V = kNan;
    if (s.lyap && smp.x.allFinite()) V = eval_lyapunov(*s.game, *s.lyap, s.lay, smp.x).V_total;
    line += ",";
    line += fmt(d);
    line += ",";
    line += fmt(V);
    out << line << "\n";
  }
}

RunSummary summarize(const ExperimentConfig& c, const Setup& s, const HybridArc& arc) {
  RunSummary r;
  const Game& g = *s.game;
  const int n = g.n();
  r.name = c.name;
  r.hash = c.hash;
  r.variant = variant_name(c.variant);
  r.n = n;
  r.warnings = c.warnings;
  r.annotations = arc.annotations;
  r.diverged = arc.diverged;
  r.zeno = arc.zeno_tripped;
  r.jumps = static_cast<long>(arc.events.size());
  if (!g.known_ne.empty()) r.ne = g.known_ne.front();
  if (c.game.reference_ne && r.ne.size() == n) r.reference_ne_gap = (*c.game.reference_ne - r.ne).norm();

  if (!s.state_is_q_only) {
    CertifyOptions co;
    co.delta = c.cert_delta;
    co.rho_F = c.cert_rho_F;
    co.rho_J = c.cert_rho_J;
    co.zeta = c.zeta;
    co.box = Box{Vec::Constant(n, c.cert_box_lo), Vec::Constant(n, c.cert_box_hi)};
    co.grid = c.cert_grid;
    try {
      r.cert = certify(g, s.prm, s.graph ? &*s.graph : nullptr, co);
    } catch (const DomainError& e) {
      r.warnings.push_back(std::string("certificate skipped: ") + e.what());
    }
  }

  const auto& S = arc.samples;
  if (!S.empty() && !g.known_ne.empty()) {
    std::vector<double> dist(S.size());
    for (std::size_t k = 0; k < S.size(); ++k) {
      const Vec q = S[k].x.head(n);
      dist[k] = q.allFinite() ? dist_to_ne(g, q) : std::numeric_limits<double>::infinity();
    }
    r.initial_dist = dist.front();
    r.final_dist = dist.back();
    r.min_dist = *std::min_element(dist.begin(), dist.end());
    r.max_dist = *std::max_element(dist.begin(), dist.end());
    double tail_max = 0.0;
    const double t_end = S.back().t;
    for (std::size_t k = 0; k < S.size(); ++k)
      if (S[k].t >= 0.8 * t_end) tail_max = std::max(tail_max, dist[k]);
    const double ref = std::max(r.initial_dist, 1e-300);
    if (r.diverged)
      r.behavior = "diverged";
    else if (r.final_dist <= 0.1 * ref && tail_max <= 0.1 * ref)
      r.behavior = "converged";
    else if (r.max_dist >= 10.0 * std::max(r.min_dist, 1e-300))
      r.behavior = "oscillatory";
    else
      r.behavior = "bounded";
    r.final_q = S.back().x.head(n);
    std::vector<double> t;
    for (const auto& smp : S) t.push_back(smp.t);
    if (!r.diverged) r.rate = fit_exponential_rate(t, dist);
  }

  if (!s.state_is_q_only && c.variant != Variant::BaselineOde && !S.empty()) {
    // first sample after which the timers stay synchronized
    std::optional<double> ts;
    for (const auto& smp : S) {
      const Vec tau = smp.x.segment(s.lay.tau(), n);
      const bool sync = dist_to_sync(tau, s.prm.T0, s.prm.T) <= 1e-6;
      if (!sync)
        ts.reset();
      else if (!ts)
        ts = smp.t;
    }
    r.sync_time = ts;
  }

  if (s.lyap && !r.diverged && c.variant != Variant::BaselineOde) {
    const double ts = s.prm.sync_time(n);
    r.flow_violations = check_flow_decrease(arc, g, *s.lyap, s.lay, ts).violations;
    const double rho_J = r.cert ? r.cert->rc1.rho_J : std::numeric_limits<double>::infinity();
    if (std::isfinite(rho_J))
      r.jump_increases = check_jump_decrease(arc, g, *s.lyap, s.lay, s.prm, rho_J, false).increases;
  }
  return r;
}

std::string summary_json(const RunSummary& r) {
  json j;
  j["name"] = r.name;
  j["config_hash"] = r.hash;
  j["variant"] = r.variant;
  j["n"] = r.n;
  if (r.cert) {
    const auto& c = *r.cert;
    json cj;
    cj["kappa"] = c.kappa;
    cj["ell"] = c.ell;
    cj["sigma_phi"] = c.cn.sigma_phi;
    cj["sigma_r"] = c.cn.sigma_r;
    cj["sigma_L"] = c.cn.sigma_L;
    cj["rc1"] = {{"holds", c.rc1.holds}, {"rho_J", c.rc1.rho_J}};
    cj["rc2"] = {{"holds", c.rc2.holds}, {"T_bound", c.rc2.bound}};
    cj["rc3"] = {{"holds", c.rc3.holds},
                 {"T2_bound", c.rc3.bound},
                 {"delta", c.rc3.delta},
                 {"unbounded", c.rc3.unbounded},
                 {"admissible", c.rc3.admissible}};
    cj["gc"] = {{"evaluated", c.gc.evaluated},
                {"holds", c.gc.holds},
                {"rho_F", c.gc.rho_F},
                {"delta", c.gc.delta},
                {"min_eig", c.gc.min_eig},
                {"grid_only", c.gc.grid_only},
                {"chi_domain_flag", c.gc.chi_domain_flag}};
    cj["gamma"] = c.gamma;
    cj["t_opt"] = c.t_opt;
    cj["epsilon_star"] = opt_json(c.epsilon_star);
    cj["lemma5_feasible"] = c.lemma5_feasible;
    j["certificate"] = cj;
  } else {
    j["certificate"] = nullptr;
  }
  j["initial_dist"] = r.initial_dist;
  j["final_dist"] = r.final_dist;
  j["min_dist"] = r.min_dist;
  j["max_dist"] = r.max_dist;
  j["diverged"] = r.diverged;
  j["zeno"] = r.zeno;
  j["behavior"] = r.behavior;
  j["sync_time"] = opt_json(r.sync_time);
  j["jumps"] = r.jumps;
  j["flow_violations"] = r.flow_violations;
  j["jump_increases"] = r.jump_increases;
  j["rate"] = {{"lambda_hat", r.rate.lambda_hat}, {"r2", r.rate.r2}, {"clipped", r.rate.clipped}};
  j["ne"] = vec_json(r.ne);
  j["final_q"] = vec_json(r.final_q);
  j["reference_ne_gap"] = opt_json(r.reference_ne_gap);
  j["warnings"] = r.warnings;
  j["annotations"] = r.annotations;
  return j.dump(2) + "\n";
}

RunSummary run_experiment(const ExperimentConfig& c, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Setup s = build_setup(c);
  const HybridArc arc = simulate(s, c);
  RunSummary r = summarize(c, s, arc);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opt.write) {
    const fs::path dir = opt.dir.empty() ? fs::path(c.output_dir) / c.name : fs::path(opt.dir);
    fs::create_directories(dir);
    write_trajectory_csv((dir / "trajectory.csv").string(), s, arc);
    std::ofstream((dir / "summary.json").string(), std::ios::binary) << summary_json(r);
    std::ofstream((dir / "config.toml").string(), std::ios::binary) << c.canonical;
    json t;
    t["wall_seconds"] = r.wall_seconds;
    t["kernels"] = kernels::active().name;
    std::ofstream((dir / "timing.json").string(), std::ios::binary) << t.dump(2) << "\n";
  }
  return r;
}

int thread_count_from_env() {
  if (const char* e = std::getenv("HMNSS_THREADS")) {
    const int v = std::atoi(e);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

std::vector<RunSummary> run_sweep(const std::vector<ExperimentConfig>& runs, int threads,
                                  bool write) {
  if (runs.empty()) return {};
  if (threads <= 0) threads = thread_count_from_env();
  threads = std::min<int>(threads, static_cast<int>(runs.size()));
  const fs::path root = fs::path(runs.front().output_dir) / runs.front().name;
  const bool single = runs.size() == 1 && runs.front().sweep.empty();
  std::vector<RunSummary> out(runs.size());
  std::vector<std::exception_ptr> errs(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < runs.size();) {
      try {
        char sub[32];
        std::snprintf(sub, sizeof sub, "run_%04zu", k);
        RunOptions o{write, single ? std::string() : (root / sub).string()};
        out[k] = run_experiment(runs[k], o);
      } catch (...) {
        errs[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  if (write && !single) {
    fs::create_directories(root);
    std::ofstream csv((root / "sweep.csv").string(), std::ios::binary);
    csv << "run";
    for (const auto& ax : runs.front().sweep) csv << "," << ax.first;
    csv << ",config_hash,final_dist,diverged,behavior,jumps,gc_holds,rc2_holds,lambda_hat\n";
    std::vector<std::size_t> idx(runs.front().sweep.size(), 0);
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto& r = out[k];
      csv << k;
      for (std::size_t a = 0; a < idx.size(); ++a) csv << "," << fmt(runs.front().sweep[a].second[idx[a]]);
      csv << "," << r.hash << "," << fmt(r.final_dist) << "," << (r.diverged ? 1 : 0) << ","
          << r.behavior << "," << r.jumps << ","
          << (r.cert ? (r.cert->gc.holds ? "1" : "0") : "") << ","
          << (r.cert ? (r.cert->rc2.holds ? "1" : "0") : "") << "," << fmt(r.rate.lambda_hat)
          << "\n";
      for (std::size_t a = idx.size(); a > 0; --a) {
        if (++idx[a - 1] < runs.front().sweep[a - 1].second.size()) break;
        idx[a - 1] = 0;
      }
    }
  }
  return out;
}

CsvArc load_arc_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "t" || header[1] != "j")
    throw ConfigError(path + ": expected a trajectory file starting with t,j");
  std::vector<std::size_t> keep;
  CsvArc out;
  for (std::size_t k = 2; k < header.size(); ++k)
    if (header[k] != "dist_to_ne" && header[k] != "V_total") {
      keep.push_back(k);
      out.columns.push_back(header[k]);
    }
  long lineno = 1;
  std::vector<double> row(header.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const char* p = line.c_str();
    for (std::size_t k = 0; k < header.size(); ++k) {
      char* end = nullptr;
      row[k] = std::strtod(p, &end);
      if (end == p) throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number");
      p = end;
      if (k + 1 < header.size()) {
        if (*p != ',') throw ConfigError(path + ":" + std::to_string(lineno) + ": too few columns");
        ++p;
      }
    }
    Sample s;
    s.t = row[0];
    s.j = static_cast<int>(row[1]);
    s.x.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) s.x(static_cast<Eigen::Index>(k)) = row[keep[k]];
    out.arc.samples.push_back(std::move(s));
  }
  return out;
}

double compare_csv(const std::string& a, const std::string& b, double T, int J) {
  const CsvArc A = load_arc_csv(a);
  const CsvArc B = load_arc_csv(b);
  // restrict both to the shared columns, in A's order
  std::vector<int> ca, cb;
  for (std::size_t i = 0; i < A.columns.size(); ++i)
    for (std::size_t k = 0; k < B.columns.size(); ++k)
      if (A.columns[i] == B.columns[k]) {
        ca.push_back(static_cast<int>(i));
        cb.push_back(static_cast<int>(k));
      }
  if (ca.empty()) throw ConfigError("the two trajectories share no state columns");
  auto project = [](const HybridArc& src, const std::vector<int>& cols) {
    HybridArc r;
    for (const auto& s : src.samples) {
      Sample t{s.t, s.j, Vec(static_cast<Eigen::Index>(cols.size()))};
      for (std::size_t k = 0; k < cols.size(); ++k) t.x(static_cast<Eigen::Index>(k)) = s.x(cols[k]);
      r.samples.push_back(std::move(t));
    }
    return r;
  };
  return closeness(project(A.arc, ca), project(B.arc, cb), T, J);
}

}  // namespace hmnss
