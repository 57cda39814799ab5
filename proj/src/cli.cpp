#include "hmnss/cli.hpp"

#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "hmnss/errors.hpp"
#include "hmnss/experiment.hpp"
#include "json.hpp"

namespace hmnss {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void print_warnings(const ExperimentConfig& c, std::ostream& err) {
  for (const auto& w : c.warnings) err << "warning: " << w << "\n";
}

int cmd_run(const std::string& path, const std::string& out_dir, std::ostream& out,
            std::ostream& err) {
  ExperimentConfig c = load_config(path);
  if (!out_dir.empty()) c.output_dir = out_dir;
  if (!c.sweep.empty()) err << "note: [sweep] ignored by 'run'; use 'sweep'\n";
  print_warnings(c, err);
  const RunSummary r = run_experiment(c);
  out << c.name << ": " << r.behavior << " final_dist=" << r.final_dist
      << " jumps=" << r.jumps << (r.diverged ? " (diverged)" : "") << "\n";
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& out_dir, int threads, std::ostream& out,
              std::ostream& err) {
  auto runs = expand_sweep(read_file(path), path);
  if (!out_dir.empty())
    for (auto& c : runs) c.output_dir = out_dir;
  if (!runs.empty()) print_warnings(runs.front(), err);
  const auto rs = run_sweep(runs, threads);
  for (std::size_t k = 0; k < rs.size(); ++k)
    out << "run " << k << ": " << rs[k].behavior << " final_dist=" << rs[k].final_dist << "\n";
  return 0;
}

int cmd_certify(const std::string& path, std::ostream& out) {
  const ExperimentConfig c = load_config(path);
  const Setup s = build_setup(c);
  HybridArc empty;
  RunSummary r = summarize(c, s, empty);
  const auto j = nlohmann::ordered_json::parse(summary_json(r));
  out << j["certificate"].dump(2) << "\n";
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, double T, int J, std::ostream& out) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", compare_csv(a, b, T, J));
  out << buf << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"hybrid momentum Nash seeking experiments"};
  app.require_subcommand(1);
  std::string cfg, out_dir, arc_a, arc_b;
  int threads = 0;
  double T = 10.0;
  int J = 1000;

  auto* run = app.add_subcommand("run", "simulate one configuration");
  run->add_option("config", cfg, "TOML config")->required();
  run->add_option("--out", out_dir, "override output.dir");
  auto* sweep = app.add_subcommand("sweep", "simulate every point of the [sweep] grid");
  sweep->add_option("config", cfg, "TOML config")->required();
  sweep->add_option("--out", out_dir, "override output.dir");
  sweep->add_option("--threads", threads, "worker threads (default HMNSS_THREADS)");
  auto* cert = app.add_subcommand("certify", "print the certificate report without simulating");
  cert->add_option("config", cfg, "TOML config")->required();
  auto* cmp = app.add_subcommand("compare", "closeness of two trajectory files");
  cmp->add_option("a", arc_a)->required();
  cmp->add_option("b", arc_b)->required();
  cmp->add_option("--T", T, "flow-time window");
  cmp->add_option("--J", J, "jump window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(cfg, out_dir, out, err);
    if (*sweep) return cmd_sweep(cfg, out_dir, threads, out, err);
    if (*cert) return cmd_certify(cfg, out);
    if (*cmp) return cmd_compare(arc_a, arc_b, T, J, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace hmnss
