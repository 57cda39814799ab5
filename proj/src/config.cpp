#include "hmnss/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hmnss/errors.hpp"
#include "toml.hpp"

namespace hmnss {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::BaselineOde: return "baseline_ode";
    case Variant::PsgFlow: return "psg_flow";
    case Variant::H1: return "h1";
    case Variant::H2: return "h2";
    case Variant::H3: return "h3";
    case Variant::H4: return "h4";
  }
  return "?";
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct Ctx {
  std::string source;
  std::string where(const toml::node& n, const std::string& key) const {
    const auto& b = n.source().begin;
    std::ostringstream os;
    os << source;
    if (b.line) os << ":" << b.line;
    os << ": '" << key << "'";
    return os.str();
  }
};

class Section {
 public:
  Section(const Ctx& ctx, const toml::table* t, std::string path)
      : ctx_(ctx), t_(t), path_(std::move(path)) {}

  bool present() const { return t_ != nullptr; }
  bool has(const std::string& k) const { return t_ && t_->contains(k); }

  const toml::node* node(const std::string& k) {
    if (!t_) return nullptr;
    used_.insert(k);
    return t_->get(k);
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  [[noreturn]] void fail(const toml::node& n, const std::string& k, const std::string& msg) const {
    throw ConfigError(ctx_.where(n, key(k)) + ": " + msg);
  }
  [[noreturn]] void missing(const std::string& k) const {
    throw ConfigError(ctx_.source + ": missing required key '" + key(k) + "'");
  }

  double num(const toml::node& n, const std::string& k) const {
    if (auto v = n.as_floating_point()) return v->get();
    if (auto v = n.as_integer()) return static_cast<double>(v->get());
    fail(n, k, "expected a number");
  }

  double get_num(const std::string& k, double def) {
    const auto* n = node(k);
    return n ? num(*n, k) : def;
  }
  double req_num(const std::string& k) {
    const auto* n = node(k);
    if (!n) missing(k);
    return num(*n, k);
  }
  std::optional<double> opt_num(const std::string& k) {
    const auto* n = node(k);
    if (!n) return std::nullopt;
    return num(*n, k);
  }

  long long integer(const toml::node& n, const std::string& k) const {
    if (auto v = n.as_integer()) return v->get();
    if (auto v = n.as_floating_point()) {
      const double d = v->get();
      if (std::floor(d) == d && std::fabs(d) < 9e15) return static_cast<long long>(d);
    }
    fail(n, k, "expected an integer");
  }
  long long get_int(const std::string& k, long long def) {
    const auto* n = node(k);
    return n ? integer(*n, k) : def;
  }
  std::uint64_t req_seed(const std::string& k) {
    const auto* n = node(k);
    if (!n) throw ConfigError(ctx_.source + ": '" + key(k) + "' is required when randomness is requested");
    const long long v = integer(*n, k);
    if (v < 0) fail(*n, k, "seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }

  std::string get_str(const std::string& k, const std::string& def) {
    const auto* n = node(k);
    if (!n) return def;
    if (auto v = n->as_string()) return v->get();
    fail(*n, k, "expected a string");
  }
  bool get_bool(const std::string& k, bool def) {
    const auto* n = node(k);
    if (!n) return def;
    if (auto v = n->as_boolean()) return v->get();
    fail(*n, k, "expected a boolean");
  }

  Vec vec(const toml::node& n, const std::string& k) const {
    const auto* a = n.as_array();
    if (!a) fail(n, k, "expected an array of numbers");
    Vec v(static_cast<Eigen::Index>(a->size()));
    for (std::size_t i = 0; i < a->size(); ++i) v(static_cast<Eigen::Index>(i)) = num(*a->get(i), k);
    return v;
  }
  std::optional<Vec> opt_vec(const std::string& k) {
    const auto* n = node(k);
    if (!n) return std::nullopt;
    return vec(*n, k);
  }

  Mat mat(const std::string& k) {
    const auto* n = node(k);
    if (!n) missing(k);
    const auto* a = n->as_array();
    if (!a || a->empty()) fail(*n, k, "expected an array of rows");
    const std::size_t rows = a->size();
    Mat M;
    for (std::size_t r = 0; r < rows; ++r) {
      const Vec row = vec(*a->get(r), k);
      if (r == 0) M.resize(static_cast<Eigen::Index>(rows), row.size());
      if (row.size() != M.cols()) fail(*n, k, "rows have different lengths");
      M.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return M;
  }

  Section sub(const std::string& k) {
    const auto* n = node(k);
    if (!n) return Section(ctx_, nullptr, key(k));
    const auto* t = n->as_table();
    if (!t) fail(*n, k, "expected a table");
    return Section(ctx_, t, key(k));
  }

  void finish() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_) {
      const std::string ks(k.str());
      if (!used_.count(ks)) throw ConfigError(ctx_.where(v, key(ks)) + ": unknown key");
    }
  }

 private:
  const Ctx& ctx_;
  const toml::table* t_;
  std::string path_;
  std::set<std::string> used_;
};

Variant parse_variant(const std::string& s) {
  if (s == "baseline_ode") return Variant::BaselineOde;
  if (s == "psg_flow") return Variant::PsgFlow;
  if (s == "h1") return Variant::H1;
  if (s == "h2") return Variant::H2;
  if (s == "h3") return Variant::H3;
  if (s == "h4") return Variant::H4;
  throw ConfigError("unknown variant '" + s + "'");
}

ExperimentConfig from_table(const toml::table& tbl, const std::string& source) {
  Ctx ctx{source};
  Section root(ctx, &tbl, "");
  ExperimentConfig c;
  c.name = root.get_str("name", "");
  if (c.name.empty()) root.missing("name");
  for (char ch : c.name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-'))
      throw ConfigError(source + ": name may only contain letters, digits, '_' and '-'");
  try {
    c.variant = parse_variant(root.get_str("variant", "h1"));
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }

  {
    auto g = root.sub("game");
    if (!g.present()) root.missing("game");
    c.game.type = g.get_str("type", "quadratic");
    if (c.game.type == "quadratic") {
      c.game.A = g.mat("A");
      const auto b = g.opt_vec("b");
      if (!b) g.missing("b");
      c.game.b = *b;
      if (c.game.A.rows() != c.game.A.cols() || c.game.A.rows() != c.game.b.size())
        throw ConfigError(source + ": game.A must be n x n and game.b of length n");
    } else if (c.game.type == "catalog") {
      c.game.catalog = g.get_str("name", "");
      if (c.game.catalog.empty()) g.missing("name");
      c.game.n = static_cast<int>(g.get_int("n", 2));
    } else if (c.game.type == "random") {
      c.game.n = static_cast<int>(g.get_int("n", 0));
      if (c.game.n < 2) throw ConfigError(source + ": game.n must be >= 2");
      c.game.kappa = g.req_num("kappa");
      c.game.ell = g.req_num("ell");
      c.game.potential = g.get_bool("potential", true);
      c.game.seed = g.req_seed("seed");
      c.game.ne_scale = g.get_num("ne_scale", 5.0);
    } else {
      throw ConfigError(source + ": game.type must be quadratic, catalog or random");
    }
    c.game.reference_ne = g.opt_vec("reference_ne");
    g.finish();
  }

  {
    auto g = root.sub("graph");
    c.graph.type = g.get_str("type", "complete");
    if (c.graph.type == "erdos_renyi") {
      c.graph.p = g.req_num("p");
      c.graph.seed = g.req_seed("seed");
    } else if (c.graph.type == "edges") {
      const auto* n = g.node("edges");
      if (!n) g.missing("edges");
      const auto* a = n->as_array();
      if (!a) g.fail(*n, "edges", "expected an array of pairs");
      for (const auto& e : *a) {
        const Vec pr = g.vec(e, "edges");
        if (pr.size() != 2) g.fail(e, "edges", "each edge is a pair [i, j]");
        c.graph.edges.push_back({static_cast<int>(pr(0)) - 1, static_cast<int>(pr(1)) - 1});
      }
    } else if (c.graph.type != "complete" && c.graph.type != "ring" && c.graph.type != "path") {
      throw ConfigError(source + ": unknown graph.type '" + c.graph.type + "'");
    }
    g.finish();
  }

  {
    auto p = root.sub("params");
    c.eta = p.get_num("eta", 0.5);
    c.T0 = p.get_num("T0", 0.1);
    c.T = p.get_num("T", 1.0);
    if (const auto* a = p.node("alpha")) {
      if (a->is_array()) {
        const Vec v = p.vec(*a, "alpha");
        c.alpha.assign(v.data(), v.data() + v.size());
      } else {
        c.alpha = {p.num(*a, "alpha")};
      }
    }
    if (auto r = p.opt_vec("r")) c.r = std::vector<double>(r->data(), r->data() + r->size());
    c.coordination = p.get_bool("coordination", true);
    const std::string pol = p.get_str("jump_policy", "lowest_index");
    if (pol == "lowest_index") {
      c.jump_policy = JumpPolicyKind::LowestIndex;
    } else if (pol == "random") {
      c.jump_policy = JumpPolicyKind::Random;
      c.jump_seed = p.req_seed("jump_seed");
    } else {
      throw ConfigError(source + ": jump_policy must be lowest_index or random");
    }
    p.finish();
  }

  {
    auto s = root.sub("partial");
    c.epsilon = s.get_num("epsilon", 1e-2);
    c.d = s.get_num("d", 0.5);
    c.zeta = s.opt_num("zeta");
    s.finish();
  }

  {
    auto s = root.sub("model_free");
    c.eps_a = s.get_num("eps_a", 5e-2);
    c.eps_p = s.get_num("eps_p", 1e-2);
    c.eps_c = s.get_num("eps_c", 1e-1);
    if (const auto* f = s.node("freqs")) {
      const auto* a = f->as_array();
      if (!a) s.fail(*f, "freqs", "expected an array of [num, den] pairs");
      std::vector<Rational> fr;
      for (const auto& e : *a) {
        const auto* pr = e.as_array();
        if (!pr || pr->size() != 2) s.fail(e, "freqs", "each frequency is [num, den]");
        fr.push_back({s.integer(*pr->get(0), "freqs"), s.integer(*pr->get(1), "freqs")});
      }
      c.freqs = fr;
    }
    s.finish();
  }

  {
    auto s = root.sub("perturbation");
    const std::string mode = s.get_str("mode", "none");
    auto& P = c.perturbation;
    if (mode == "none") {
      P.mode = PerturbationMode::None;
    } else if (mode == "sinusoid") {
      P.mode = PerturbationMode::Sinusoid;
    } else if (mode == "noise") {
      P.mode = PerturbationMode::Noise;
      P.seed = s.req_seed("seed");
    } else {
      throw ConfigError(source + ": perturbation.mode must be none, sinusoid or noise");
    }
    P.amplitude = s.get_num("amplitude", 0.0);
    P.omega = s.get_num("omega", 1.0);
    P.phase = s.get_num("phase", 0.0);
    P.hold = s.get_num("hold", 1e-2);
    const std::string tgt = s.get_str("target", "output");
    if (tgt == "output")
      P.target = PerturbationTarget::Output;
    else if (tgt == "input")
      P.target = PerturbationTarget::Input;
    else if (tgt == "both")
      P.target = PerturbationTarget::Both;
    else
      throw ConfigError(source + ": perturbation.target must be output, input or both");
    if (P.amplitude < 0.0) throw ConfigError(source + ": perturbation.amplitude must be >= 0");
    if (!(P.hold > 0.0)) throw ConfigError(source + ": perturbation.hold must be positive");
    s.finish();
  }

  {
    auto s = root.sub("initial");
    auto& I = c.initial;
    I.q = s.opt_vec("q");
    if (const auto* b = s.node("q_box")) {
      const Vec v = s.vec(*b, "q_box");
      if (v.size() != 2 || !(v(1) > v(0))) s.fail(*b, "q_box", "expected [lo, hi] with lo < hi");
      I.q_lo = v(0);
      I.q_hi = v(1);
      I.q_seed = s.req_seed("q_seed");
    } else if (!I.q) {
      I.q_seed = s.req_seed("q_seed");
    }
    if (const auto* p = s.node("p")) {
      if (auto str = p->as_string()) {
        if (str->get() != "q") s.fail(*p, "p", "expected \"q\" or an array");
      } else {
        I.p = s.vec(*p, "p");
      }
    }
    if (const auto* t = s.node("tau")) {
      if (auto str = t->as_string()) {
        I.tau_mode = str->get();
        if (I.tau_mode != "T0" && I.tau_mode != "random")
          s.fail(*t, "tau", "expected \"T0\", \"random\" or an array");
        if (I.tau_mode == "random") I.tau_seed = s.req_seed("tau_seed");
      } else {
        I.tau_mode = "explicit";
        I.tau = s.vec(*t, "tau");
      }
    }
    I.qhat_mode = s.get_str("qhat", "own");
    if (I.qhat_mode != "own" && I.qhat_mode != "consensus")
      throw ConfigError(source + ": initial.qhat must be own or consensus");
    I.phase = s.get_str("phase", "sin");
    if (I.phase != "sin" && I.phase != "cos")
      throw ConfigError(source + ": initial.phase must be sin or cos");
    s.finish();
  }

  {
    auto s = root.sub("horizon");
    c.t_max = s.get_num("t_max", 10.0);
    c.j_max = s.get_int("j_max", 100000000);
    if (!(c.t_max > 0.0)) throw ConfigError(source + ": horizon.t_max must be positive");
    s.finish();
  }
  {
    auto s = root.sub("integrator");
    c.h = s.opt_num("h");
    c.stride = s.get_int("stride", 1);
    if (c.h && !(*c.h > 0.0)) throw ConfigError(source + ": integrator.h must be positive");
    if (c.stride < 1) throw ConfigError(source + ": integrator.stride must be >= 1");
    s.finish();
  }
  {
    auto s = root.sub("certify");
    c.cert_delta = s.get_num("delta", 0.0);
    c.cert_rho_F = s.opt_num("rho_F");
    c.cert_rho_J = s.opt_num("rho_J");
    if (const auto* b = s.node("box")) {
      const Vec v = s.vec(*b, "box");
      if (v.size() != 2 || !(v(1) > v(0))) s.fail(*b, "box", "expected [lo, hi] with lo < hi");
      c.cert_box_lo = v(0);
      c.cert_box_hi = v(1);
    }
    c.cert_grid = static_cast<int>(s.get_int("grid", 10000));
    s.finish();
  }
  {
    auto s = root.sub("output");
    c.output_dir = s.get_str("dir", "out");
    s.finish();
  }
  {
    auto s = root.sub("sweep");
    if (s.present()) {
      const auto* t = tbl.get("sweep")->as_table();
      for (const auto& [k, v] : *t) {
        const std::string ks(k.str());
        const Vec vals = s.vec(*s.node(ks), ks);
        if (vals.size() == 0) throw ConfigError(ctx.where(v, "sweep." + ks) + ": empty axis");
        c.sweep.push_back({ks, std::vector<double>(vals.data(), vals.data() + vals.size())});
      }
    }
    s.finish();
  }
  root.finish();

  if (c.variant == Variant::H4 && small_parameter_order_inverted(c.eps_p, c.eps_a, c.eps_c))
    c.warnings.push_back("model_free: expected eps_p <= eps_a <= eps_c");
  if (c.variant == Variant::H3 && c.eps_p > c.eps_a)
    c.warnings.push_back("model_free: expected eps_p <= eps_a");

  std::ostringstream os;
  os << tbl;
  c.canonical = os.str();
  c.hash = fnv1a_hex(c.canonical);
  return c;
}

toml::table parse_table(const std::string& text, const std::string& source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw ConfigError(os.str());
  }
}

void set_path(toml::table& tbl, const std::string& path, double value) {
  toml::table* cur = &tbl;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      const auto* old = cur->get(part);
      if (old && old->is_integer() && std::floor(value) == value)
        cur->insert_or_assign(part, static_cast<std::int64_t>(value));
      else
        cur->insert_or_assign(part, value);
      return;
    }
    if (!cur->contains(part)) cur->insert(part, toml::table{});
    auto* next = cur->get(part)->as_table();
    if (!next) throw ConfigError("sweep axis '" + path + "' does not name a table path");
    cur = next;
    start = dot + 1;
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  const toml::table tbl = parse_table(text, source);
  return from_table(tbl, source);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str(), path);
}

std::vector<ExperimentConfig> expand_sweep(const std::string& text, const std::string& source) {
  const toml::table tbl = parse_table(text, source);
  const ExperimentConfig base = from_table(tbl, source);
  if (base.sweep.empty()) return {base};
  std::vector<std::size_t> idx(base.sweep.size(), 0);
  std::vector<ExperimentConfig> out;
  while (true) {
    toml::table t = tbl;
    t.erase("sweep");
    for (std::size_t a = 0; a < idx.size(); ++a) set_path(t, base.sweep[a].first, base.sweep[a].second[idx[a]]);
    ExperimentConfig c = from_table(t, source);
    c.sweep = base.sweep;
    out.push_back(std::move(c));
    std::size_t a = idx.size();
    while (a > 0) {
      --a;
      if (++idx[a] < base.sweep[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
  }
}

}  // namespace hmnss
