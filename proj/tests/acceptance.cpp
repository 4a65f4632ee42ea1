// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <fmt/format.h>

#include "adiabatica/commutator.hpp"
#include "adiabatica/harness.hpp"
#include "adiabatica/openq.hpp"
#include "adiabatica/registry.hpp"
#include "adiabatica/spectral.hpp"
#include "adiabatica/switching.hpp"

using namespace adiabatica;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string config_path(const std::string& name) { return (fs::path(ADIABATICA_CONFIG_DIR) / name).string(); }

ExperimentConfig quiet_config(const std::string& name) {
  ExperimentConfig c = load_config(config_path(name));
  c.out_dir.clear();
  c.jobs = 1;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int inversions(const ExperimentReport& r) {
  int n = 0;
  for (size_t i = 1; i < r.records.size(); ++i) n += r.records[i].sup_dev > r.records[i - 1].sup_dev;
  return n;
}

// 1. gap_uniform, eps geometric [1e-1, 1e-3] (8 points): slope in [0.85, 1.3], <= 60 s on one thread
Outcome gap_rate() {
  Outcome o;
  ExperimentConfig c = quiet_config("gap_uniform.toml");
  o.require(c.params.at("d") == 6.0 && c.eps.size() == 8 && std::abs(c.eps.front() - 1e-1) < 1e-15 &&
                std::abs(c.eps.back() - 1e-3) < 1e-15,
            "config is not d = 6 with 8 points on [1e-3, 1e-1]");
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentReport r = run(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(r.fit.has_value(), "no slope fit");
  if (r.fit) {
    o.note(fmt::format("slope {:.4f} [{:.4f}, {:.4f}]", r.fit->slope, r.fit->lo(), r.fit->hi()));
    o.require(r.fit->slope >= 0.85 && r.fit->slope <= 1.3, "slope outside [0.85, 1.3]");
  }
  o.note(fmt::format("{:.1f} s", secs));
  o.require(secs <= 60.0, "runtime above 60 s");
  o.require(r.invariant_pass, "invariants");
  return o;
}

// 2. gap_crossing: dev(1e-3) <= 0.5 dev(1e-1), at most one inversion
Outcome crossing() {
  Outcome o;
  const ExperimentReport r = run(quiet_config("gap_crossing.toml"));
  const auto& f = r.records.front();
  const auto& l = r.records.back();
  o.require(std::abs(f.eps - 1e-1) < 1e-15 && std::abs(l.eps - 1e-3) < 1e-15, "sweep endpoints are not 1e-1, 1e-3");
  o.note(fmt::format("dev {:.4g} -> {:.4g}, {} inversions", f.sup_dev, l.sup_dev, inversions(r)));
  o.require(l.sup_dev <= 0.5 * f.sup_dev, "deviation did not halve");
  o.require(inversions(r) <= 1, "more than one inversion");
  o.require(r.invariant_pass, "invariants");
  return o;
}

// 3. nogap_dense_rationals (D = 64), eps >= floor_epsilon: projected deviation drops >= 2x,
//    adiabaticity residual <= 1e-7
Outcome gapless() {
  Outcome o;
  const ExperimentConfig c = quiet_config("nogap_dense_rationals.toml");
  o.require(c.params.count("D") && c.params.at("D") == 64.0, "config is not D = 64");
  const Example ex = example(c.example, c.params);
  const ExperimentReport r = run(c);
  o.require(r.records.size() >= 2, "fewer than two eps in the emulation regime");
  double worst = 0.0;
  for (const auto& x : r.records) {
    o.require(x.eps >= ex.info.floor_epsilon, fmt::format("eps {} below floor", x.eps));
    worst = std::max(worst, x.adiab_resid);
  }
  const double ratio = r.records.front().sup_dev / r.records.back().sup_dev;
  o.note(fmt::format("eps {:.3g} -> {:.3g} (floor {:.4g}), drop {:.2f}x, adiab {:.2g}", r.records.front().eps,
                     r.records.back().eps, ex.info.floor_epsilon, ratio, worst));
  o.require(ratio >= 2.0, "drop below 2x");
  o.require(worst <= 1e-7, "adiabaticity residual above 1e-7");
  return o;
}

// 4. hölder_density: alpha = 1 slope >= 0.15, alpha = 1/2 slope >= 0.07
Outcome holder() {
  Outcome o;
  for (const auto& [file, alpha, bound] :
       {std::tuple{"holder_alpha1.toml", 1.0, 0.15}, std::tuple{"holder_alpha_half.toml", 0.5, 0.07}}) {
    const ExperimentConfig c = quiet_config(file);
    o.require(c.params.at("alpha") == alpha, fmt::format("{} has alpha {}", file, c.params.at("alpha")));
    const ExperimentReport r = run(c);
    if (!r.fit) {
      o.require(false, fmt::format("alpha {}: no fit ({} points)", alpha, r.records.size()));
      continue;
    }
    o.note(fmt::format("alpha {}: slope {:.3f} on {} points", alpha, r.fit->slope, r.fit->points));
    o.require(r.fit->slope >= bound, fmt::format("alpha {} slope below {}", alpha, bound));
    o.require(r.invariant_pass, "invariants");
  }
  return o;
}

// Residual checks for one family; returns the worst values seen.
struct CommWorst {
  double contour = 0, pole = 0, approx = 0, agree = 0, oracle = 0;
  void merge(const CommWorst& w) {
    contour = std::max(contour, w.contour);
    pole = std::max(pole, w.pole);
    approx = std::max(approx, w.approx);
    agree = std::max(agree, w.agree);
    oracle = std::max(oracle, w.oracle);
  }
};

double projector_agreement(const OperatorFamily& a, const SpectralCurve& curve, int rank,
                           const std::vector<double>& ts) {
  double worst = 0.0;
  for (double t : ts) {
    const CMatrix at = a(t);
    const cplx lam = curve.lambda(t);
    const CMatrix riesz = riesz_projection(at, contour_around(at, lam, rank));
    const CMatrix schur = weakly_associated_projection(at, lam).P;
    worst = std::max(worst, norm2(riesz - schur) / std::max(1.0, norm2(schur)));
  }
  return worst;
}

CommWorst check_family(const OperatorFamily& a, const ProjectionFamily& p, const SpectralCurve& curve, bool gapped,
                       const std::vector<double>& probes) {
  CommWorst w;
  if (gapped) {
    const auto con = solve_gap_contour(a, p, curve);
    const auto pole = solve_gap_pole(a, p, curve.lambda, curve.m0);
    w.contour = con.max_residual(probes);
    w.pole = pole.max_residual(probes);
    if (curve.m0 == 1)
      for (double t : probes) w.agree = std::max(w.agree, norm2(con.at(t).B - pole.at(t).B));
  }
  const auto deltas = delta_schedule(1e-2, curve.m0, [](double d) { return d; }, Schedule::quantitative, curve.delta0);
  w.approx = solve_nogap(a, p, curve, 8, deltas).max_residual(probes);
  return w;
}

// 5. commutator identities on the registry and 50 random instances
Outcome commutators() {
  Outcome o;
  const auto probes = uniform_grid(0.0, 1.0, 9);
  CommWorst all;
  int families = 0;
  for (const auto& e : registry()) {
    const Example ex = example(e.name);
    if (ex.info.metric == Metric::leak) {
      o.note(e.name + " skipped (P not differentiable)");
      continue;
    }
    all.merge(check_family(ex.A, ex.P, ex.curve, ex.info.gapped, probes));
    // probe times avoid the crossings (t = 1/2 in gap_crossing, t = 0 in the rotation example, t = 1 in the
    // dense rationals)
    CommWorst pw;
    pw.oracle = projector_agreement(ex.A, ex.curve, ex.P.rank(), {0.37, 0.71, 0.93});
    all.merge(pw);
    ++families;
  }
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> g(0.0, 0.5);
  for (int k = 0; k < 50; ++k) {
    const int n = 3 + k % 4;
    CMatrix s(n, n), h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        s(i, j) = cplx(g(rng), g(rng)) / std::sqrt(double(n));
        h(i, j) = cplx(g(rng), g(rng));
      }
    s += 2.0 * CMatrix::Identity(n, n);
    const CMatrix c = h - h.adjoint();
    CMatrix d = CMatrix::Zero(n, n), e0 = CMatrix::Zero(n, n);
    d(0, 0) = cplx(g(rng), g(rng));
    for (int i = 1; i < n; ++i) d(i, i) = d(0, 0) + std::polar(1.0 + std::abs(g(rng)), 2 * std::numbers::pi * i / n);
    e0(0, 0) = 1.0;
    const CMatrix si = s.inverse();
    const cplx lam = d(0, 0);
    const OperatorFamily a = similarity_family(constant_family(s * d * si), c);
    const ProjectionFamily p = similarity_projection(s * e0 * si, c);
    double gap = 1e300;
    for (int i = 1; i < n; ++i) gap = std::min(gap, std::abs(d(i, i) - lam));
    const SpectralCurve curve{[lam](double) { return lam; }, [](double) { return 0.0; }, 0.5 * gap, 1};
    all.merge(check_family(a, p, curve, true, probes));
    CommWorst pw;
    pw.oracle = projector_agreement(a, curve, 1, {0.0, 0.5, 1.0});
    all.merge(pw);
    ++families;
  }
  o.note(fmt::format("{} families: contour {:.1e}, pole {:.1e}, approximate {:.1e}, contour-pole {:.1e}, "
                     "contour-Schur {:.1e}",
                     families, all.contour, all.pole, all.approx, all.agree, all.oracle));
  o.require(all.contour <= 1e-8, "contour residual");
  o.require(all.pole <= 1e-8, "pole-form residual");
  o.require(all.approx <= 1e-8, "approximate residual");
  o.require(all.agree <= 1e-8, "contour vs pole form");
  o.require(all.oracle <= 1e-9, "contour vs Schur projector");
  return o;
}

// 6. rotation counterexample: <e1, U(1/4) e1> >= 1 + (1/eps) int_0^{1/4} t cos^2(2 pi t) dt - 1e-6
Outcome counterexample() {
  Outcome o;
  // int_0^{1/4} t cos^2(2 pi t) dt = 1/64 - 1/(16 pi^2)
  const double integral = 1.0 / 64.0 - 1.0 / (16.0 * std::numbers::pi * std::numbers::pi);
  const Example ex = example("rotation_counterexample");
  o.require(ex.info.params.at("rate") == 1.0, "lambda(t) != t");
  for (double eps : {1e-1, 1e-2}) {
    const PropagatorTable u = propagate(ex.A, eps, {0.0, 0.125, 0.25});
    const cplx v = u.U.back()(0, 0);
    const double bound = 1.0 + integral / eps - 1e-6;
    o.note(fmt::format("eps {}: {:.6g} >= {:.6g}", eps, v.real(), bound));
    o.require(v.real() >= bound && std::abs(v.imag()) < 1e-9 * std::abs(v), fmt::format("bound at eps {}", eps));
  }
  const ExperimentReport r = run(quiet_config("rotation.toml"));
  o.note("verdict " + r.verdict);
  o.require(r.verdict == "non-adiabatic" && r.verdict_pass, "harness verdict");
  return o;
}

// 7. P' = 0 gives U = V to 1e-7; the damped family has slope >= 1 and obeys
//    ||U(t) - V(t)|| <= M^2 c e^{Mc} t e^{-gamma t / eps}
Outcome trivial() {
  Outcome o;
  const ExperimentReport st = run(quiet_config("gap_static.toml"));
  double worst = 0.0;
  for (const auto& x : st.records) worst = std::max(worst, x.sup_dev);
  o.note(fmt::format("P' = 0: max dev {:.2g}", worst));
  o.require(worst <= 1e-7 && st.verdict_pass, "P' = 0 deviation above 1e-7");

  const ExperimentConfig c = quiet_config("damped.toml");
  const Example ex = example(c.example, c.params);
  const double gamma = ex.info.params.at("gamma");
  // ||U(t, s)|| <= e^{-gamma (t - s)/eps} follows from Re A(t) <= -gamma, so M = 1
  double top = -1e300, cmax = 0.0;
  for (double t : uniform_grid(0.0, 1.0, 201)) {
    const CMatrix a = ex.A(t);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    top = std::max(top, es.eigenvalues().maxCoeff());
    cmax = std::max(cmax, norm2(ex.P.commutator_target(t)));
  }
  o.require(top <= -gamma + 1e-12, "damped family is not uniformly dissipative");
  const double m = 1.0;
  const ExperimentReport r = run(c);
  double excess = -1e300;
  for (const auto& rec : r.records)
    for (size_t k = 0; k < rec.t.size(); ++k) {
      const double t = rec.t[k];
      const double bound = m * m * cmax * std::exp(m * cmax) * t * std::exp(-gamma * t / rec.eps);
      excess = std::max(excess, rec.profile[k] - bound);
    }
  o.require(r.fit.has_value(), "no slope fit");
  if (r.fit) o.note(fmt::format("damped slope {:.3f}, c = {:.3f}, max(dev - bound) {:.2g}", r.fit->slope, cmax, excess));
  o.require(r.fit && r.fit->slope >= 1.0, "damped slope below 1");
  o.require(excess <= 1e-9, "pointwise bound violated");
  return o;
}

// 8. open systems
Outcome open_systems() {
  Outcome o;
  const Superoperator deph = build_lindblad(dephasing_qubit());
  const NonDephasingExample nd = non_dephasing_example(6);
  const Superoperator ndop = build_lindblad(nd.spec);
  double trace = 0.0, choi = 1e300;
  for (const Superoperator* s : {&deph, &ndop}) {
    trace = std::max(trace, trace_functional_norm(*s));
    for (double t : {0.01, 0.5, 2.0}) choi = std::min(choi, choi_min_eigenvalue(*s, t));
  }
  o.note(fmt::format("trace {:.1e}, Choi min {:.1e}", trace, choi));
  o.require(trace <= 1e-9, "trace preservation");
  o.require(choi >= -1e-9, "Choi positivity");

  const KernelReport kd = kernel_diagnostics(deph);
  o.note(fmt::format("dephasing: ker A {} ker Z0 {}", kd.dim_ker_A, kd.dim_ker_Z0));
  o.require(kd.dephasing && kd.equal, "dephasing qubit: expected dephasing with ker A = ker Z0");
  const KernelReport kn = kernel_diagnostics(ndop, nd.sector);
  o.note(fmt::format("non-dephasing: sector ker A {} ker Z0 {}, full {} vs {}", kn.sector_ker_A, kn.sector_ker_Z0,
                     kn.dim_ker_A, kn.dim_ker_Z0));
  o.require(!kn.dephasing && kn.inclusion && kn.has_sector && kn.sector_equal,
            "non-dephasing example: expected ker A = ker Z0 on the point spectrum without dephasing");

  double rage = 0.0;
  for (const CMatrix& hh : {dephasing_qubit().H, nd.spec.H}) {
    const CMatrix r = rage_projection(hh);
    const WeakProjection w = weakly_associated_projection(hamiltonian_part(hh), 0.0);
    rage = std::max(rage, norm2(r - w.P));
  }
  o.note(fmt::format("RAGE vs weak projection {:.1e}", rage));
  o.require(rage <= 1e-8, "RAGE projection");
  return o;
}

// 9. Gell-Mann-Low on the degenerate 4x4 setup at eps = 1e-3
Outcome gell_mann_low() {
  Outcome o;
  const double eps = 1e-3;
  const SwitchingSetup s = degenerate_example();
  const CurveFrame f = continue_eigencurves(s);
  const CMatrix h = cplx(0.0, -1.0) * (s.A0 + s.V);  // Hermitian
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  double worst_dist = 0.0, worst_rel = 0.0, worst_gap = 0.0;
  for (size_t j = 0; j < f.P_start.size(); ++j) {
    const CVector x = thin_factor(f.P_start[j]).X.col(0);
    const GmlResult g = gml_ratio(s, eps, x, x);
    Eigen::Index best = 0;
    (es.eigenvalues().array() - f.lambda_end[static_cast<size_t>(g.curve)].imag()).abs().minCoeff(&best);
    worst_dist = std::max(worst_dist, projective_distance(g.ratio, es.eigenvectors().col(best)));
    const cplx exact = exact_shift(s, x);
    const cplx lg = energy_shift(s, eps, x, x, ShiftFormula::log_derivative);
    const cplx ex = energy_shift(s, eps, x, x, ShiftFormula::exp_switch);
    worst_rel = std::max({worst_rel, std::abs(lg - exact) / std::abs(exact), std::abs(ex - exact) / std::abs(exact)});
    worst_gap = std::max(worst_gap, std::abs(lg - ex));
  }
  o.note(fmt::format("{} curves: projective {:.2e}, shift rel err {:.2e}, formulas differ {:.2e}", f.P_start.size(),
                     worst_dist, worst_rel, worst_gap));
  o.require(worst_dist <= 0.05, "projective distance above 0.05");
  o.require(worst_rel <= 0.05, "energy shift off by more than 5%");
  o.require(worst_gap <= 1e-4, "shift formulas differ by more than 1e-4");
  return o;
}

// 10. the CLI writes byte-identical CSV on repeated and on parallel runs
Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "adiabatica_acceptance_determinism";
  fs::remove_all(root);
  int compared = 0;
  for (const char* cfg : {"gap_uniform.toml", "gap_crossing.toml", "rotation.toml", "damped.toml"}) {
    const ExperimentConfig c = load_config(config_path(cfg));
    std::vector<std::string> csv;
    for (const auto& [tag, jobs] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"p", 4}}) {
      const fs::path out = root / (std::string(cfg) + "." + tag);
      const std::string cmd = fmt::format("\"{}\" run --config \"{}\" --out \"{}\" --jobs {} > /dev/null", ADIABATICA_CLI,
                                          config_path(cfg), out.string(), jobs);
      const int rc = std::system(cmd.c_str());
      o.require(rc != -1 && WEXITSTATUS(rc) <= 1, fmt::format("{} exited with {}", cmd, rc));
      csv.push_back(slurp(out / (c.example + ".csv")));
    }
    o.require(!csv[0].empty(), std::string(cfg) + " wrote no CSV");
    o.require(csv[0] == csv[1], std::string(cfg) + " repeated run differs");
    o.require(csv[0] == csv[2], std::string(cfg) + " parallel run differs");
    ++compared;
  }
  o.note(fmt::format("{} configs x (2 serial + 1 parallel)", compared));
  fs::remove_all(root);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gap-case rate", gap_rate},         {"crossing", crossing},
      {"gapless convergence", gapless},    {"hoelder rate", holder},
      {"commutator identities", commutators}, {"counterexample", counterexample},
      {"trivial cases", trivial},          {"open systems", open_systems},
      {"gell-mann-low", gell_mann_low},    {"determinism", determinism},
  };
  // optional argument: run a single criterion by number
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool ok = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    ok = ok && o.pass;
    fmt::print("criterion {:>2} {:<22} {}  {}\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
