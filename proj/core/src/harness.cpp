#include "adiabatica/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <toml.hpp>

#include "adiabatica/svg.hpp"

namespace adiabatica {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string g12(double v) { return fmt::format("{:.12g}", v); }

double toml_number(const toml::node& n, const std::string& where) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError("config: " + where + " must be a number");
}

}  // namespace

std::vector<double> geometric_grid(double hi, double lo, int points) {
  if (points < 1) throw ConfigError("eps grid: need at least one point");
  if (!(hi > 0.0 && lo > 0.0)) throw ConfigError("eps grid: bounds must be positive");
  if (points == 1) return {hi};
  std::vector<double> g(static_cast<size_t>(points));
  const double lh = std::log(hi), ll = std::log(lo);
  for (int k = 0; k < points; ++k) g[static_cast<size_t>(k)] = std::exp(lh + (ll - lh) * k / (points - 1));
  g.front() = hi;
  g.back() = lo;
  return g;
}

int default_jobs() {
  if (const char* s = std::getenv("ADIABATICA_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
    spdlog::warn("ignoring ADIABATICA_JOBS='{}'", s);
  }
  return 1;
}

ExperimentConfig parse_config(const std::string& text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("config: {} (line {})", e.description(), e.source().begin.line));
  }
  ExperimentConfig cfg;
  cfg.jobs = default_jobs();
  auto name = tbl["example"].value<std::string>();
  if (!name) throw ConfigError("config: missing string key 'example'");
  cfg.example = *name;

  if (auto* p = tbl["params"].as_table())
    for (auto&& [k, v] : *p) cfg.params[std::string(k.str())] = toml_number(v, "params." + std::string(k.str()));

  double hi = 1e-1, lo = 1e-3;
  int points = 8;
  bool explicit_grid = false;
  if (auto* s = tbl["sweep"].as_table()) {
    if (auto* arr = (*s)["eps"].as_array()) {
      for (auto&& v : *arr) cfg.eps.push_back(toml_number(v, "sweep.eps"));
      explicit_grid = true;
    }
    if (auto v = (*s)["eps_max"].value<double>()) hi = *v;
    if (auto v = (*s)["eps_min"].value<double>()) lo = *v;
    if (auto v = (*s)["points"].value<int64_t>()) points = static_cast<int>(*v);
    if (auto v = (*s)["metric"].value<std::string>()) {
      try {
        cfg.metric = parse_metric(*v);
      } catch (const ParameterError& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }
  }
  if (!explicit_grid) cfg.eps = geometric_grid(hi, lo, points);

  if (auto* s = tbl["integrator"].as_table()) {
    if (auto v = (*s)["tol"].value<double>()) cfg.tol_step = *v;
    if (auto v = (*s)["rk4_step"].value<double>()) cfg.rk4_step = *v;
    if (auto v = (*s)["method"].value<std::string>()) {
      if (*v == "cf4")
        cfg.integrator = Integrator::cf4;
      else if (*v == "rk4")
        cfg.integrator = Integrator::rk4;
      else
        throw ConfigError("config: integrator.method must be cf4 or rk4");
    }
  }
  if (auto* s = tbl["nogap"].as_table()) {
    if (auto v = (*s)["n"].value<int64_t>()) cfg.nogap_n = static_cast<int>(*v);
    if (auto v = (*s)["schedule"].value<std::string>()) {
      try {
        cfg.schedule = parse_schedule(*v);
      } catch (const ParameterError& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }
    if (auto v = (*s)["probe_points"].value<int64_t>()) cfg.probe_points = static_cast<int>(*v);
  }
  if (auto* s = tbl["output"].as_table()) {
    if (auto v = (*s)["dir"].value<std::string>()) cfg.out_dir = *v;
    if (auto v = (*s)["profiles"].value<bool>()) cfg.write_profiles = *v;
    if (auto v = (*s)["svg"].value<bool>()) cfg.write_svg = *v;
    if (auto v = (*s)["timing"].value<bool>()) cfg.timing = *v;
  }
  if (auto v = tbl["jobs"].value<int64_t>()) cfg.jobs = static_cast<int>(*v);
  if (auto v = tbl["force"].value<bool>()) cfg.force = *v;
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.eps.empty()) throw ConfigError("config: empty eps grid");
  for (size_t i = 0; i < cfg.eps.size(); ++i) {
    if (!(cfg.eps[i] > 0.0 && cfg.eps[i] <= 10.0)) throw ConfigError(fmt::format("config: eps {} outside (0, 10]", cfg.eps[i]));
    if (i && !(cfg.eps[i] < cfg.eps[i - 1])) throw ConfigError("config: eps grid must be strictly decreasing");
  }
  if (!(cfg.tol_step > 0.0 && cfg.tol_step < 1e-2)) throw ConfigError("config: integrator.tol must lie in (0, 1e-2)");
  if (!(cfg.rk4_step > 0.0)) throw ConfigError("config: integrator.rk4_step must be positive");
  if (cfg.nogap_n < 1) throw ConfigError("config: nogap.n must be >= 1");
  if (cfg.jobs < 1) throw ConfigError("config: jobs must be >= 1");
  if (cfg.probe_points < 2) throw ConfigError("config: nogap.probe_points must be >= 2");
}

SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& value) {
  if (eps.size() != value.size()) throw ParameterError("fit_slope: size mismatch");
  const size_t n = eps.size();
  if (n < 4) throw ParameterError("fit_slope: need at least 4 points");
  std::vector<double> x(n), y(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0) || !(value[i] > 0.0))
      throw ParameterError(fmt::format("fit_slope: nonpositive pair ({}, {})", eps[i], value[i]));
    x[i] = std::log(eps[i]);
    y[i] = std::log(value[i]);
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw ParameterError("fit_slope: eps values are all equal");
  SlopeFit f;
  f.points = static_cast<int>(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  const double se = std::sqrt(sse / (n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  f.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return f;
}

std::string ExperimentReport::csv() const {
  std::string s = "example,epsilon,sup_dev,adiab_resid,comm_resid,runtime_ms\n";
  for (const auto& r : records)
    s += fmt::format("{},{},{},{},{},{}\n", example, g12(r.eps), g12(r.sup_dev), g12(r.adiab_resid), g12(r.comm_resid),
                     g12(r.runtime_ms));
  return s;
}

void assess(ExperimentReport& r) {
  const auto& rec = r.records;
  if (rec.empty()) throw ParameterError("assess: empty report");
  std::vector<double> e, v;
  for (const auto& x : rec) {
    e.push_back(x.eps);
    v.push_back(x.sup_dev);
  }
  bool positive = std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
  r.fit.reset();
  if (positive && rec.size() >= 4 && r.expected.kind != RateKind::trivial) r.fit = fit_slope(e, v);

  const double first = v.front(), last = v.back();
  int inversions = 0;
  for (size_t i = 1; i < v.size(); ++i) inversions += v[i] > v[i - 1] ? 1 : 0;
  const bool decays = last <= 0.5 * first && inversions <= 1;

  switch (r.expected.kind) {
    case RateKind::trivial: {
      const double worst = *std::max_element(v.begin(), v.end());
      r.verdict_pass = worst <= 1e-7;
      r.verdict = r.verdict_pass ? "trivially adiabatic" : fmt::format("deviation {:.3g} > 1e-7", worst);
      break;
    }
    case RateKind::order_eps:
      r.verdict_pass = r.fit && r.fit->slope >= 0.85 && r.fit->slope <= 1.3;
      r.verdict = r.fit ? fmt::format("slope {:.4f}", r.fit->slope) : "no fit";
      if (r.verdict_pass) r.verdict = "O(eps) " + r.verdict;
      break;
    case RateKind::power:
      r.verdict_pass = r.fit && r.fit->slope >= r.expected.exponent - 0.1;
      r.verdict = r.fit ? fmt::format("slope {:.4f}", r.fit->slope) : "no fit";
      if (r.verdict_pass) r.verdict = r.expected.label() + " " + r.verdict;
      break;
    case RateKind::little_o:
      r.verdict_pass = decays;
      r.verdict = decays ? "o(1)" : fmt::format("no decay: ratio {:.3g}, {} inversions", last / first, inversions);
      break;
    case RateKind::non_adiabatic:
      r.verdict_pass = last >= 0.9 * first;
      r.verdict = r.verdict_pass ? "non-adiabatic" : fmt::format("decays: ratio {:.3g}", last / first);
      break;
  }
}

namespace {

struct ProbeCache {
  std::mutex mu;
  std::map<double, double> eta;
  std::optional<double> gap_resid;
};

double eta_sum(const Example& ex, double delta, ProbeCache& cache) {
  {
    std::lock_guard<std::mutex> lk(cache.mu);
    auto it = cache.eta.find(delta);
    if (it != cache.eta.end()) return it->second;
  }
  const EtaPair e = compute_eta(ex.A, ex.curve, ex.P, delta, 1e-4);
  const double v = e.plus + e.minus;
  std::lock_guard<std::mutex> lk(cache.mu);
  cache.eta[delta] = v;
  return v;
}

double commutator_residual(const Example& ex, double eps, const ExperimentConfig& cfg, ProbeCache* cache) {
  if (ex.info.metric == Metric::leak) return kNaN;  // P is not differentiable
  const std::vector<double> probes = uniform_grid(0.0, 1.0, cfg.probe_points);
  if (ex.info.gapped) {
    if (cache) {
      std::lock_guard<std::mutex> lk(cache->mu);
      if (cache->gap_resid) return *cache->gap_resid;
    }
    const double v = solve_gap_contour(ex.A, ex.P, ex.curve).max_residual(probes);
    if (cache) {
      std::lock_guard<std::mutex> lk(cache->mu);
      cache->gap_resid = v;
    }
    return v;
  }
  ProbeCache local;
  ProbeCache& c = cache ? *cache : local;
  const auto deltas = delta_schedule(
      eps, ex.curve.m0, [&](double d) { return eta_sum(ex, d, c); }, cfg.schedule, ex.curve.delta0);
  return solve_nogap(ex.A, ex.P, ex.curve, cfg.nogap_n, deltas).max_residual(probes);
}

SweepRecord run_point_impl(const Example& ex, double eps, const ExperimentConfig& cfg, ProbeCache* cache) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> grid = uniform_grid(0.0, 1.0, ex.info.grid_points);
  PropagateOptions opt;
  opt.tol_step = cfg.tol_step;
  opt.integrator = cfg.integrator;
  opt.rk4_step = cfg.rk4_step;
  const Metric metric = cfg.metric.value_or(ex.info.metric);

  SweepRecord rec;
  rec.eps = eps;
  DeviationProfile prof;
  switch (metric) {
    case Metric::sup_norm: {
      const PropagatorTable u = propagate(ex.A, eps, grid, opt);
      const PropagatorTable v = propagate_intertwined(ex.A, ex.P, eps, grid, opt);
      prof = deviation(u, v);
      rec.adiab_resid = adiabaticity_residual(v, ex.P);
      break;
    }
    case Metric::projected: {
      const ThinFactor f = thin_factor(ex.P(0.0));
      opt.basis = f.X;
      const PropagatorTable u = propagate(ex.A, eps, grid, opt);
      const PropagatorTable v = propagate_projected(ex.A, ex.P, eps, grid, opt);
      prof = deviation(u, v, f.Y);
      rec.adiab_resid = adiabaticity_residual(v, ex.P);
      break;
    }
    case Metric::leak: {
      const ThinFactor f = thin_factor(ex.P(0.0));
      opt.basis = f.X;
      const PropagatorTable u = propagate(ex.A, eps, grid, opt);
      prof.t = u.t;
      for (size_t k = 0; k < u.size(); ++k) {
        const CMatrix q = CMatrix::Identity(u.dim(), u.dim()) - ex.P(u.t[k]);
        prof.value.push_back(norm2(q * u.U[k] * f.Y));
        prof.sup = std::max(prof.sup, prof.value.back());
      }
      rec.adiab_resid = adiabaticity_residual(u, ex.P);
      break;
    }
  }
  rec.sup_dev = prof.sup;
  rec.t = std::move(prof.t);
  rec.profile = std::move(prof.value);
  rec.comm_resid = commutator_residual(ex, eps, cfg, cache);
  if (cfg.timing)
    rec.runtime_ms = std::round(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  return rec;
}

}  // namespace

SweepRecord run_point(const Example& ex, double eps, const ExperimentConfig& cfg) {
  return run_point_impl(ex, eps, cfg, nullptr);
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

ExperimentReport run(const ExperimentConfig& cfg_in) {
  validate(cfg_in);
  ExperimentConfig cfg = cfg_in;
  const Example ex = example(cfg.example, cfg.params);

  ExperimentReport rep;
  rep.example = ex.info.name;
  rep.expected = ex.info.expected;
  rep.metric = cfg.metric.value_or(ex.info.metric);

  if (!ex.info.gapped) {
    std::vector<double> kept;
    for (double e : cfg.eps)
      if (e >= ex.info.floor_epsilon) kept.push_back(e);
    if (kept.size() != cfg.eps.size()) {
      if (cfg.force) {
        rep.notes.push_back(fmt::format("forced below floor_epsilon {:.6g}; results outside the emulation regime",
                                        ex.info.floor_epsilon));
      } else {
        rep.notes.push_back(fmt::format("dropped {} eps values below floor_epsilon {:.6g} (use --force to keep)",
                                        cfg.eps.size() - kept.size(), ex.info.floor_epsilon));
        cfg.eps = kept;
      }
    }
    if (cfg.eps.empty()) throw ConfigError("every eps lies below floor_epsilon; pass --force to run anyway");
  }

  ProbeCache cache;
  std::vector<SweepRecord> out(cfg.eps.size());
  std::vector<std::string> errors(cfg.eps.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k; (k = next.fetch_add(1)) < cfg.eps.size();) {
      try {
        out[k] = run_point_impl(ex, cfg.eps[k], cfg, &cache);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(cfg.eps.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (size_t k = 0; k < errors.size(); ++k)
    if (!errors[k].empty()) throw Error(fmt::format("eps = {}: {}", cfg.eps[k], errors[k]));
  rep.records = std::move(out);

  for (const auto& r : rep.records) {
    if (rep.metric != Metric::leak && r.adiab_resid > kAdiabResidLimit) {
      rep.invariant_pass = false;
      rep.notes.push_back(fmt::format("adiabaticity residual {:.3g} at eps {}", r.adiab_resid, g12(r.eps)));
    }
    if (!std::isnan(r.comm_resid) && r.comm_resid > kCommResidLimit) {
      rep.invariant_pass = false;
      rep.notes.push_back(fmt::format("commutator residual {:.3g} at eps {}", r.comm_resid, g12(r.eps)));
    }
  }
  assess(rep);

  if (!cfg.out_dir.empty()) {
    const std::string base = cfg.out_dir + "/" + rep.example;
    if (cfg.write_profiles) {
      for (size_t k = 0; k < rep.records.size(); ++k) {
        auto& r = rep.records[k];
        r.profile_path = fmt::format("{}_profile_{}.csv", base, k);
        std::string s = "t,deviation\n";
        for (size_t i = 0; i < r.t.size(); ++i) s += g12(r.t[i]) + "," + g12(r.profile[i]) + "\n";
        write_text(r.profile_path, s);
      }
    }
    write_text(base + ".csv", rep.csv());
    if (cfg.write_svg) write_text(base + ".svg", render_svg(rep));
  }
  return rep;
}

ExperimentReport read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "example,epsilon,sup_dev,adiab_resid,comm_resid,runtime_ms")
    throw IoError("'" + path + "' is not a sweep report (bad header)");
  ExperimentReport rep;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    if (f.size() != 6) throw IoError(fmt::format("'{}' row {}: expected 6 fields", path, row));
    if (rep.example.empty()) rep.example = f[0];
    SweepRecord r;
    try {
      r.eps = std::stod(f[1]);
      r.sup_dev = std::stod(f[2]);
      r.adiab_resid = std::stod(f[3]);
      r.comm_resid = std::stod(f[4]);
      r.runtime_ms = std::stod(f[5]);
    } catch (const std::exception&) {
      throw IoError(fmt::format("'{}' row {}: bad number", path, row));
    }
    rep.records.push_back(std::move(r));
  }
  if (rep.records.empty()) throw IoError("'" + path + "' has no data rows");
  try {
    const auto& e = registry_entry(rep.example);
    rep.expected = e.expected;
    rep.metric = e.metric;
  } catch (const RegistryError&) {
    rep.expected = {RateKind::little_o, 0.0};
  }
  assess(rep);
  return rep;
}

VerifyResult verify(const std::string& name, const ParamMap& params, double eps) {
  if (!(eps > 0.0)) throw ParameterError("verify: eps must be positive");
  const Example ex = example(name, params);
  const std::vector<double> grid = uniform_grid(0.0, 1.0, 21);
  VerifyResult out;
  auto append = [&](const InvariantReport& r) { out.checks.insert(out.checks.end(), r.begin(), r.end()); };
  append(check_operator_family(ex.A, grid, ex.info.c_fd));
  if (ex.info.metric != Metric::leak) {
    append(check_projection_family(ex.P, grid));
    std::vector<double> deltas;
    for (int j = 0; j < 4; ++j) deltas.push_back(ex.curve.delta0 * std::pow(10.0, -0.5 * j));
    append(check_curve(ex.A, ex.curve, ex.P, grid, deltas));
  }
  ExperimentConfig cfg;
  cfg.eps = {eps};
  cfg.jobs = 1;
  const SweepRecord r = run_point(ex, eps, cfg);
  if (ex.info.metric != Metric::leak)
    out.checks.push_back({"adiabaticity_residual", r.adiab_resid, kAdiabResidLimit, r.adiab_resid <= kAdiabResidLimit});
  if (!std::isnan(r.comm_resid))
    out.checks.push_back({"commutator_residual", r.comm_resid, kCommResidLimit, r.comm_resid <= kCommResidLimit});
  return out;
}

}  // namespace adiabatica
