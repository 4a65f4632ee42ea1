#include "adiabatica/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace adiabatica {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double scale_of(const CMatrix& a) {
  double s = norm2(a);
  return s > 0.0 ? s : 1.0;
}

CVector eigenvalues_of(const CMatrix& a) {
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigenvalue solver did not converge");
  return es.eigenvalues();
}

std::vector<double> sorted_distances(const CVector& ev, cplx z) {
  std::vector<double> d(static_cast<size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) d[static_cast<size_t>(i)] = std::abs(ev(i) - z);
  std::sort(d.begin(), d.end());
  return d;
}

// 1/||R||_F bounds sigma_min from below; only fall back to the exact norm
// when that cheap bound is inconclusive.
bool resolvent_ok(const CMatrix& r, double floor) {
  const double f = r.norm();
  if (!std::isfinite(f)) return false;
  if (1.0 / f > floor) return true;
  return 1.0 / norm2(r) > floor;
}

}  // namespace

RieszResult riesz_projection_ex(const CMatrix& a, const Contour& c) {
  require_square(a, "riesz_projection");
  require_finite(a, "riesz_projection");
  if (!(c.radius > 0.0)) throw ContourError("riesz_projection: radius must be positive");
  const int n = static_cast<int>(a.rows());
  const double floor = 1e-10 * scale_of(a);
  const CMatrix id = CMatrix::Identity(n, n);

  // P = (1/N) sum_j r e^{i phi_j} (z_j - A)^{-1}, phi_j = 2 pi j / N; doubling
  // only adds the midpoints.
  double term_scale = 0.0;
  auto term = [&](double phi) -> CMatrix {
    const cplx w = c.radius * std::polar(1.0, phi);
    const cplx z = c.center + w;
    CMatrix r;
    try {
      r = solve(z * id - a, id);
    } catch (const SingularMatrixError&) {
      throw ContourError(
          fmt::format("riesz_projection: contour touches the spectrum near z = {}{:+}i", z.real(), z.imag()));
    }
    if (!resolvent_ok(r, floor))
      throw ContourError(fmt::format("riesz_projection: contour within 1e-10 ||A|| of the spectrum at z = {}{:+}i",
                                     z.real(), z.imag()));
    const CMatrix out = w * r;
    term_scale = std::max(term_scale, out.norm());
    return out;
  };

  int nodes = std::max(8, c.nodes);
  CMatrix p = CMatrix::Zero(n, n);
  for (int j = 0; j < nodes; ++j) p += term(kTwoPi * j / nodes);
  p /= static_cast<double>(nodes);
  double change = std::numeric_limits<double>::infinity();
  while (nodes < kRieszMaxNodes) {
    CMatrix s = CMatrix::Zero(n, n);
    for (int j = 0; j < nodes; ++j) s += term(kTwoPi * (j + 0.5) / nodes);
    CMatrix q = 0.5 * (p + s / static_cast<double>(nodes));
    change = (q - p).norm() / std::max(1.0, q.norm());
    p = std::move(q);
    nodes *= 2;
    // the sum cannot resolve changes below the rounding level of its terms
    const double noise = 16.0 * std::numeric_limits<double>::epsilon() * term_scale / std::max(1.0, p.norm());
    if (change <= std::max(kRieszStable, noise)) return {p, nodes, change};
  }
  throw ConvergenceError(fmt::format("riesz_projection: no convergence with {} nodes (last change {:.3g})",
                                     kRieszMaxNodes, change));
}

Contour contour_around(const CMatrix& a, cplx lambda, int mult) {
  require_square(a, "contour_around");
  const std::vector<double> d = sorted_distances(eigenvalues_of(a), lambda);
  mult = std::clamp(mult, 1, static_cast<int>(d.size()));
  const double inner = d[static_cast<size_t>(mult - 1)];
  if (static_cast<size_t>(mult) == d.size()) return {lambda, std::max(1.0, 2.0 * inner + 1.0), 32};
  const double outer = d[static_cast<size_t>(mult)];
  if (outer - inner < 1e-6 * scale_of(a))
    throw ContourError(fmt::format("contour_around: gap {:.3g} too small for quadrature", outer - inner));
  return {lambda, 0.5 * (inner + outer), 32};
}

int nilpotent_order(const CMatrix& a, cplx lambda, double tol) {
  require_square(a, "nilpotent_order");
  const int n = static_cast<int>(a.rows());
  const CMatrix b = a - lambda * CMatrix::Identity(n, n);
  CMatrix pw = b;
  int prev = n;
  for (int k = 1; k <= n; ++k) {
    const int r = numerical_rank(pw, tol);
    if (r == prev) return k - 1;
    if (r == 0) return k;
    prev = r;
    pw = pw * b;
  }
  return n;
}

WeakProjection weakly_associated_projection(const CMatrix& a, cplx lambda, double tol, double cluster_radius) {
  require_square(a, "weakly_associated_projection");
  require_finite(a, "weakly_associated_projection");
  const int n = static_cast<int>(a.rows());
  const CMatrix b = a - lambda * CMatrix::Identity(n, n);

  int m = 0;
  int rank_m = n;
  {
    CMatrix pw = CMatrix::Identity(n, n);
    int prev = n;
    for (int k = 1; k <= n; ++k) {
      pw = pw * b;
      const int r = numerical_rank(pw, tol);
      if (r == prev) break;
      m = k;
      rank_m = r;
      prev = r;
      if (r == 0) break;
    }
  }
  const int mult = n - rank_m;
  if (mult == 0)
    throw ProjectionError(fmt::format("weakly_associated_projection: {}{:+}i is not an eigenvalue to tolerance",
                                      lambda.real(), lambda.imag()));

  const CVector ev = eigenvalues_of(a);
  std::vector<std::pair<double, cplx>> by_dist;
  for (Eigen::Index i = 0; i < ev.size(); ++i) by_dist.emplace_back(std::abs(ev(i) - lambda), ev(i));
  std::sort(by_dist.begin(), by_dist.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  const double base = 1e-8 * scale_of(a);
  double select_radius;
  if (cluster_radius > 0.0) {
    int inside = 0;
    for (const auto& e : by_dist) inside += e.first <= cluster_radius ? 1 : 0;
    if (inside != mult)
      throw RankAmbiguityError(fmt::format(
          "weakly_associated_projection: {} eigenvalues within radius {:.3g} but rank test gives multiplicity {}",
          inside, cluster_radius, mult));
    if (mult < n && by_dist[static_cast<size_t>(mult)].first <= 2.0 * cluster_radius)
      throw ClusterError("weakly_associated_projection: eigenvalue within twice the cluster radius",
                         by_dist[static_cast<size_t>(mult)].second);
    select_radius = cluster_radius;
  } else {
    // A size-m Jordan block splits under roundoff into a ring of radius
    // ~ (u ||A||)^{1/m}; the rank test already fixed how many belong to lambda.
    const double inner = std::max(base, by_dist[static_cast<size_t>(mult - 1)].first);
    if (mult < n) {
      const double outer = by_dist[static_cast<size_t>(mult)].first;
      if (outer <= 2.0 * inner) {
        const cplx nb = by_dist[static_cast<size_t>(mult)].second;
        throw ClusterError(fmt::format("weakly_associated_projection: eigenvalue {}{:+}i lies within twice the "
                                       "cluster radius {:.3g} of lambda",
                                       nb.real(), nb.imag(), inner),
                           nb);
      }
      select_radius = 0.5 * (inner + outer);
    } else {
      select_radius = 2.0 * inner + 1.0;
    }
  }

  WeakProjection out;
  out.m = m;
  out.alg_mult = mult;
  if (mult == n) {
    out.P = CMatrix::Identity(n, n);
    return out;
  }
  SchurForm sf = ordered_schur(a, [&](cplx z) { return std::abs(z - lambda) <= select_radius; });
  if (sf.selected != mult)
    throw RankAmbiguityError(fmt::format("weakly_associated_projection: Schur selected {} eigenvalues, rank test {}",
                                         sf.selected, mult));
  const int k = mult;
  const CMatrix t11 = sf.T.topLeftCorner(k, k);
  const CMatrix t22 = sf.T.bottomRightCorner(n - k, n - k);
  const CMatrix t12 = sf.T.topRightCorner(k, n - k);
  const CMatrix z = solve_triangular_sylvester(t11, t22, t12);
  CMatrix pt = CMatrix::Zero(n, n);
  pt.topLeftCorner(k, k).setIdentity();
  pt.topRightCorner(k, n - k) = z;
  out.P = sf.Q * pt * sf.Q.adjoint();
  return out;
}

StabilityReport check_stability(const OperatorFamily& a, StabilityKind kind, const std::vector<double>& grid) {
  StabilityReport rep{kind, 0.0, false};
  if (kind == StabilityKind::contraction) {
    double top = -std::numeric_limits<double>::infinity();
    for (double t : grid) {
      const CMatrix x = a(t);
      const CMatrix h = 0.5 * (x + x.adjoint());
      Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
      top = std::max(top, es.eigenvalues().maxCoeff());
    }
    rep.value = top;
    rep.pass = top <= 1e-10;
    return rep;
  }
  if (!a.jordan()) throw StructureError("check_stability: M0 test needs the lambda + alpha N structure");
  const auto& j = *a.jordan();
  double r0 = std::numeric_limits<double>::infinity();
  bool re_ok = true;
  for (double t : grid) {
    const double al = j.alpha(t);
    const double re = j.lambda(t).real();
    if (re > 1e-12) re_ok = false;
    if (al > 1e-14) r0 = std::min(r0, -re / al);
  }
  rep.value = r0;
  rep.pass = re_ok && r0 > 0.0;
  return rep;
}

cplx ray_point(const SpectralCurve& curve, double t, double delta) {
  return curve.lambda(t) + delta * std::polar(1.0, curve.theta(t));
}

CMatrix reduced_resolvent(const CMatrix& a, const CMatrix& p, cplx z, double t, double delta) {
  const int n = static_cast<int>(a.rows());
  const CMatrix id = CMatrix::Identity(n, n);
  try {
    return solve(z * id - a, id - p);
  } catch (const SingularMatrixError&) {
    throw ResolventError(fmt::format("ray leaves the resolvent set at t = {}, delta = {:.3g}", t, delta), t, delta);
  }
}

ResolventProbe probe_resolvent_estimate(const OperatorFamily& a, const SpectralCurve& curve,
                                        const ProjectionFamily& p, const std::vector<double>& deltas,
                                        const std::vector<double>& grid, double nominal_M0) {
  for (double d : deltas)
    if (!(d > 0.0 && d <= curve.delta0 * (1 + 1e-12)))
      throw ParameterError(fmt::format("probe_resolvent_estimate: delta {} outside (0, delta0 = {}]", d, curve.delta0));
  ResolventProbe out;
  const int n = a.dim();
  const CVector x = CVector::Ones(n) / std::sqrt(static_cast<double>(n));
  for (double t : grid) {
    const CMatrix at = a(t);
    const CMatrix pt = p(t);
    for (double d : deltas) {
      const CMatrix r = reduced_resolvent(at, pt, ray_point(curve, t, d), t, d);
      ResolventSample s{t, d, d * norm2(r), d * (r * x).norm()};
      out.M0 = std::max(out.M0, s.scaled_norm);
      if (nominal_M0 > 0.0 && s.scaled_norm > 1.05 * nominal_M0) out.violations.push_back(s);
      out.samples.push_back(s);
    }
  }
  return out;
}

EtaPair compute_eta(const OperatorFamily& a, const SpectralCurve& curve, const ProjectionFamily& p, double delta,
                    double rel_tol) {
  if (!(delta > 0.0 && delta <= curve.delta0 * (1 + 1e-12)))
    throw ParameterError(fmt::format("compute_eta: delta {} outside (0, delta0 = {}]", delta, curve.delta0));
  auto integrand = [&](double s) {
    const CMatrix at = a(s);
    const CMatrix ps = p(s);
    const CMatrix dp = p.derivative(s);
    if (dp.norm() == 0.0) return std::pair<double, double>{0.0, 0.0};
    const CMatrix r = reduced_resolvent(at, ps, ray_point(curve, s, delta), s, delta);
    return std::pair<double, double>{delta * norm2(r * dp * ps), delta * norm2(ps * dp * r)};
  };
  // composite Simpson on 2^k intervals, reusing samples
  int intervals = 16;
  std::vector<std::pair<double, double>> f(static_cast<size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) f[static_cast<size_t>(i)] = integrand(static_cast<double>(i) / intervals);
  auto simpson = [&](const std::vector<std::pair<double, double>>& v) {
    const int k = static_cast<int>(v.size()) - 1;
    double sp = 0.0, sm = 0.0;
    for (int i = 0; i <= k; ++i) {
      const double w = (i == 0 || i == k) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sp += w * v[static_cast<size_t>(i)].first;
      sm += w * v[static_cast<size_t>(i)].second;
    }
    const double h = 1.0 / k;
    return std::pair<double, double>{sp * h / 3.0, sm * h / 3.0};
  };
  auto prev = simpson(f);
  constexpr int kMaxIntervals = 2048;
  while (intervals < kMaxIntervals) {
    std::vector<std::pair<double, double>> g(static_cast<size_t>(2 * intervals) + 1);
    for (int i = 0; i <= intervals; ++i) g[static_cast<size_t>(2 * i)] = f[static_cast<size_t>(i)];
    for (int i = 0; i < intervals; ++i)
      g[static_cast<size_t>(2 * i + 1)] = integrand((i + 0.5) / intervals);
    f.swap(g);
    intervals *= 2;
    const auto cur = simpson(f);
    const double dp = std::abs(cur.first - prev.first);
    const double dm = std::abs(cur.second - prev.second);
    prev = cur;
    if (dp <= rel_tol * std::max(cur.first, 1e-14) && dm <= rel_tol * std::max(cur.second, 1e-14))
      return {cur.first, cur.second, intervals};
  }
  spdlog::warn("compute_eta: relative tolerance {:.1e} not reached with {} intervals (delta = {:.3g})", rel_tol,
               kMaxIntervals, delta);
  return {prev.first, prev.second, intervals};
}

std::string SpectralAnalysis::to_csv() const {
  std::ostringstream os;
  os << "t,re_lambda,im_lambda,gap,m,delta_min,M0_local\n";
  for (const auto& r : records)
    os << fmt::format("{:.12g},{:.12g},{:.12g},{:.12g},{},{:.12g},{:.12g}\n", r.t, r.lambda.real(), r.lambda.imag(),
                      r.gap, r.m, r.delta_min, r.M0_local);
  return os.str();
}

SpectralAnalysis gap_diagnostics(const OperatorFamily& a, const SpectralCurve& curve, const std::vector<double>& grid,
                                 const ProjectionFamily* p, double threshold, int mult) {
  if (grid.empty()) throw GridError("gap_diagnostics: empty grid");
  if (mult <= 0) mult = p ? std::max(1, p->rank()) : 1;
  auto gap_at = [&](double t, CVector* ev_out) {
    CVector ev = eigenvalues_of(a(t));
    const std::vector<double> d = sorted_distances(ev, curve.lambda(t));
    if (ev_out) *ev_out = ev;
    return static_cast<size_t>(mult) < d.size() ? d[static_cast<size_t>(mult)]
                                                : std::numeric_limits<double>::infinity();
  };
  SpectralAnalysis out;
  out.threshold = threshold;
  out.min_gap = std::numeric_limits<double>::infinity();
  for (double t : grid) {
    SpectralRecord r;
    r.t = t;
    r.lambda = curve.lambda(t);
    r.gap = gap_at(t, &r.eigenvalues);
    const CMatrix at = a(t);
    r.m = nilpotent_order(at, r.lambda);
    if (p) {
      const CMatrix pt = (*p)(t);
      r.delta_min = curve.delta0 * 1e-3;
      for (int j = 0; j <= 6; ++j) {
        const double d = curve.delta0 * std::pow(10.0, -0.5 * j);
        try {
          const CMatrix rr = reduced_resolvent(at, pt, ray_point(curve, t, d), t, d);
          r.M0_local = std::max(r.M0_local, d * norm2(rr));
        } catch (const ResolventError&) {
          r.M0_local = std::numeric_limits<double>::infinity();
        }
      }
    }
    out.min_gap = std::min(out.min_gap, r.gap);
    out.records.push_back(std::move(r));
  }
  out.uniform_gap = out.min_gap > threshold;

  const auto& rec = out.records;
  for (size_t k = 0; k < rec.size(); ++k) {
    if (rec[k].gap >= threshold) continue;
    const bool left = k == 0 || rec[k].gap <= rec[k - 1].gap;
    const bool right = k + 1 == rec.size() || rec[k].gap < rec[k + 1].gap;
    if (!(left && right)) continue;
    double lo = k == 0 ? rec[k].t : rec[k - 1].t;
    double hi = k + 1 == rec.size() ? rec[k].t : rec[k + 1].t;
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (gap_at(m1, nullptr) <= gap_at(m2, nullptr))
        hi = m2;
      else
        lo = m1;
    }
    out.crossings.push_back(0.5 * (lo + hi));
  }
  return out;
}

}  // namespace adiabatica
