#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "adiabatica/harness.hpp"
#include "adiabatica/svg.hpp"

using namespace adiabatica;

namespace {

constexpr int kUsage = 3;

void print_report(const ExperimentReport& r) {
  fmt::print("example   {}\nexpected  {}\nmetric    {}\n", r.example, r.expected.label(), to_string(r.metric));
  fmt::print("{:>14} {:>14} {:>14} {:>14}\n", "epsilon", "sup_dev", "adiab_resid", "comm_resid");
  for (const auto& x : r.records)
    fmt::print("{:>14.6g} {:>14.6g} {:>14.3g} {:>14.3g}\n", x.eps, x.sup_dev, x.adiab_resid, x.comm_resid);
  if (r.fit) fmt::print("slope     {:.4f} [{:.4f}, {:.4f}] (95%)\n", r.fit->slope, r.fit->lo(), r.fit->hi());
  for (const auto& n : r.notes) fmt::print("note      {}\n", n);
  fmt::print("verdict   {} ({})\n", r.verdict, r.verdict_pass ? "pass" : "fail");
  if (!r.invariant_pass) fmt::print("invariants FAILED\n");
}

ParamMap parse_params(const std::vector<std::string>& kv) {
  ParamMap m;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects name=value, got '" + s + "'");
    try {
      m[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("--param value is not a number: '" + s + "'");
    }
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adiabatic evolution laboratory"};
  app.require_subcommand(1);
  std::string level = "warn";
  app.add_option("--log-level", level, "trace, debug, info, warn, error, off");

  auto* run_cmd = app.add_subcommand("run", "run an eps sweep from a TOML config");
  std::string config, out_dir;
  int jobs = 0;
  bool force = false, timing = false;
  run_cmd->add_option("--config", config, "config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides [output].dir)");
  run_cmd->add_option("--jobs", jobs, "worker threads (default ADIABATICA_JOBS or 1)")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--force", force, "keep eps values below the example's floor_epsilon");
  run_cmd->add_flag("--timing", timing, "record wall-clock runtime_ms (breaks byte-identical reports)");

  auto* list_cmd = app.add_subcommand("list-examples", "list registry examples");
  bool as_json = false;
  list_cmd->add_flag("--json", as_json, "print the machine-readable manifest");

  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite for one example");
  std::string name;
  double eps = 1e-2;
  std::vector<std::string> params;
  verify_cmd->add_option("--example", name, "registry name")->required();
  verify_cmd->add_option("--eps", eps, "adiabatic parameter")->required()->check(CLI::PositiveNumber);
  verify_cmd->add_option("--param", params, "name=value, repeatable");

  auto* plot_cmd = app.add_subcommand("plot", "render a report CSV as a log-log SVG");
  std::string csv_path, svg_path;
  plot_cmd->add_option("report", csv_path, "report CSV")->required();
  plot_cmd->add_option("-o,--output", svg_path, "SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(level));

  try {
    if (*run_cmd) {
      ExperimentConfig cfg = load_config(config);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (jobs > 0) cfg.jobs = jobs;
      if (force) cfg.force = true;
      if (timing) cfg.timing = true;
      const ExperimentReport r = run(cfg);
      print_report(r);
      return r.exit_code();
    }
    if (*list_cmd) {
      if (as_json) {
        std::cout << registry_manifest_json();
        return 0;
      }
      for (const auto& e : registry()) {
        fmt::print("{:<26} {:<20} {}\n", e.name, e.expected.label(), e.description);
        for (const auto& p : e.params)
          fmt::print("    {:<18} default {:<8g} [{:g}, {:g}]{} {}\n", p.name, p.def, p.lo, p.hi,
                     p.integer ? " int" : "", p.doc);
      }
      return 0;
    }
    if (*verify_cmd) {
      const VerifyResult v = verify(name, parse_params(params), eps);
      for (const auto& c : v.checks)
        fmt::print("{:<4} {:<40} {:.3e} (tol {:.1e})\n", c.pass ? "ok" : "FAIL", c.name, c.value, c.tol);
      return v.pass() ? 0 : 2;
    }
    if (*plot_cmd) {
      const ExperimentReport r = read_report_csv(csv_path);
      write_text(svg_path, render_svg(r));
      return 0;
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const IoError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const RegistryError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const ParameterError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return kUsage;
}
