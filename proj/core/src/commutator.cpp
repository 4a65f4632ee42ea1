#include "adiabatica/commutator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace adiabatica {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kBumpNodes = 20;

double bump(double u) {
  const double v = 1.0 - u * u;
  return v > 0.0 ? v * v * v : 0.0;
}

}  // namespace

const char* to_string(Construction c) {
  switch (c) {
    case Construction::contour: return "contour";
    case Construction::pole_form: return "pole_form";
    case Construction::approximate: return "approximate";
    case Construction::multi_gap: return "multi_gap";
    case Construction::multi_nogap: return "multi_nogap";
  }
  return "?";
}

const char* to_string(Schedule s) { return s == Schedule::quantitative ? "quantitative" : "qualitative"; }

Schedule parse_schedule(const std::string& s) {
  if (s == "quantitative") return Schedule::quantitative;
  if (s == "qualitative") return Schedule::qualitative;
  throw ParameterError("unknown schedule '" + s + "' (quantitative, qualitative)");
}

MollifiedDerivative::MollifiedDerivative(ProjectionFamily p, int n) : p_(std::move(p)), n_(n) {
  if (n < 1) throw ParameterError("MollifiedDerivative: n must be >= 1");
}

CMatrix MollifiedDerivative::operator()(double t) const {
  using Rule = boost::math::quadrature::gauss<double, kBumpNodes>;
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  const double w = 1.0 / n_;
  const double lo = std::max(0.0, t - w), hi = std::min(1.0, t + w);
  if (!(hi > lo)) return p_.derivative(std::clamp(t, 0.0, 1.0));
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  CMatrix acc;
  double mass = 0.0;
  auto add = [&](double x, double wt) {
    const double s = mid + half * x;
    const double k = wt * bump((t - s) / w);
    if (k == 0.0) return;
    const CMatrix d = p_.derivative(s);
    if (acc.size() == 0) acc = CMatrix::Zero(d.rows(), d.cols());
    acc += k * d;
    mass += k;
  };
  for (size_t i = 0; i < xs.size(); ++i) {
    add(xs[i], ws[i]);
    if (xs[i] != 0.0) add(-xs[i], ws[i]);
  }
  if (mass <= 0.0) return p_.derivative(t);
  return acc / mass;
}

std::vector<CommutatorSample> CommutatorSolution::probe(const std::vector<double>& grid) const {
  std::vector<CommutatorSample> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(eval_(t));
  return out;
}

double CommutatorSolution::max_residual(const std::vector<double>& grid) const {
  double worst = 0.0;
  for (double t : grid) worst = std::max(worst, eval_(t).residual_norm);
  return worst;
}

std::string CommutatorSolution::csv(const std::vector<CommutatorSample>& samples) {
  std::ostringstream os;
  os << "t,residual_norm,C_plus_norm,C_minus_norm\n";
  for (const auto& s : samples)
    os << fmt::format("{:.12g},{:.12g},{:.12g},{:.12g}\n", s.t, s.residual_norm,
                      s.c_plus.size() ? norm2(s.c_plus) : 0.0, s.c_minus.size() ? norm2(s.c_minus) : 0.0);
  return os.str();
}

CMatrix contour_sandwich(const CMatrix& a, const CMatrix& x, const Contour& c) {
  const int n = static_cast<int>(a.rows());
  const CMatrix id = CMatrix::Identity(n, n);
  // (1/2 pi i) oint f dz with z = c + r e^{i phi}: (1/N) sum r e^{i phi} f(z)
  auto term = [&](double phi) -> CMatrix {
    const cplx w = c.radius * std::polar(1.0, phi);
    CMatrix r;
    try {
      r = solve((c.center + w) * id - a, id);
    } catch (const SingularMatrixError&) {
      throw ContourError("contour_sandwich: contour touches the spectrum");
    }
    return w * (r * x * r);
  };
  int nodes = std::max(8, c.nodes);
  CMatrix b = CMatrix::Zero(n, n);
  for (int j = 0; j < nodes; ++j) b += term(kTwoPi * j / nodes);
  b /= static_cast<double>(nodes);
  while (nodes < kRieszMaxNodes) {
    CMatrix s = CMatrix::Zero(n, n);
    for (int j = 0; j < nodes; ++j) s += term(kTwoPi * (j + 0.5) / nodes);
    CMatrix q = 0.5 * (b + s / static_cast<double>(nodes));
    const double change = (q - b).norm() / std::max(1.0, q.norm());
    b = std::move(q);
    nodes *= 2;
    if (change <= kRieszStable) return b;
  }
  throw ConvergenceError("contour_sandwich: quadrature did not stabilise at the node cap");
}

CommutatorSolution solve_gap_contour(const OperatorFamily& a, const ProjectionFamily& p, ContourPicker contours) {
  auto eval = [a, p, contours](double t) {
    CommutatorSample s;
    s.t = t;
    const CMatrix at = a(t);
    const CMatrix pt = p(t);
    const CMatrix dp = p.derivative(t);
    s.target = comm(dp, pt);
    s.B = dp.norm() == 0.0 ? CMatrix(CMatrix::Zero(at.rows(), at.cols())) : contour_sandwich(at, dp, contours(t));
    s.residual = s.B * at - at * s.B - s.target;
    s.residual_norm = norm2(s.residual);
    return s;
  };
  return CommutatorSolution(Construction::contour, eval);
}

CommutatorSolution solve_gap_contour(const OperatorFamily& a, const ProjectionFamily& p, const SpectralCurve& curve) {
  const int mult = std::max(1, p.rank());
  ContourPicker pick = [a, curve, mult](double t) { return contour_around(a(t), curve.lambda(t), mult); };
  return solve_gap_contour(a, p, pick);
}

CMatrix reduced_resolvent_at(const CMatrix& a, const CMatrix& p, cplx lambda) {
  const int n = static_cast<int>(a.rows());
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix q = id - p;
  const CMatrix lam = lambda * id - a;
  return solve(lam * q + p, q);
}

CommutatorSolution solve_gap_pole(const OperatorFamily& a, const ProjectionFamily& p, ScalarCurve lambda, int m0) {
  if (m0 < 1) throw ParameterError("solve_gap_pole: m0 must be >= 1");
  auto eval = [a, p, lambda, m0](double t) {
    CommutatorSample s;
    s.t = t;
    const CMatrix at = a(t);
    const CMatrix pt = p(t);
    const CMatrix dp = p.derivative(t);
    const int n = static_cast<int>(at.rows());
    const cplx lam = lambda(t);
    CMatrix rbar;
    try {
      rbar = reduced_resolvent_at(at, pt, lam);
    } catch (const SingularMatrixError&) {
      throw ResolventError(fmt::format("solve_gap_pole: reduced resolvent singular at t = {}", t), t, 0.0);
    }
    const CMatrix big_l = lam * CMatrix::Identity(n, n) - at;
    s.B = CMatrix::Zero(n, n);
    CMatrix rk = rbar;                     // Rbar^{k+1}
    CMatrix lk = pt;                       // Lambda^k P
    for (int k = 0; k < m0; ++k) {
      s.B += rk * dp * lk + lk * dp * rk;
      rk = rk * rbar;
      lk = big_l * lk;
    }
    s.target = comm(dp, pt);
    s.residual = s.B * at - at * s.B - s.target;
    s.residual_norm = norm2(s.residual);
    return s;
  };
  return CommutatorSolution(Construction::pole_form, eval);
}

namespace {

std::vector<double> clamp_deltas(std::vector<double> deltas, double delta0, const char* who) {
  for (double& d : deltas) {
    if (!(d > 0.0) || d > delta0) {
      const double c = d > delta0 ? delta0 : std::max(1e-300, delta0 * 1e-12);
      spdlog::warn("{}: delta {:.3g} outside (0, {:.3g}], clamped to {:.3g}", who, d, delta0, c);
      d = c;
    }
  }
  return deltas;
}

// B, C+ and C- of the approximate construction for one curve with an
// arbitrary Q in place of the mollified derivative.
void approximate_terms(const CMatrix& at, const CMatrix& pt, const CMatrix& q, cplx lam, double theta,
                       const std::vector<double>& deltas, int m0, double t, CMatrix& b, CMatrix& cp, CMatrix& cm) {
  const int n = static_cast<int>(at.rows());
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix big_l = lam * id - at;
  b = CMatrix::Zero(n, n);
  cp = CMatrix::Zero(n, n);
  cm = CMatrix::Zero(n, n);
  CMatrix prod = id;
  CMatrix lk = pt;
  for (int k = 0; k < m0; ++k) {
    const double d = deltas[static_cast<size_t>(k)];
    const cplx w = d * std::polar(1.0, theta);
    prod = prod * reduced_resolvent(at, pt, lam + w, t, d);
    const CMatrix left = prod * q * lk;
    const CMatrix right = lk * q * prod;
    b += left + right;
    cp += w * left;
    cm += w * right;
    lk = big_l * lk;
  }
}

}  // namespace

CommutatorSolution solve_nogap(const OperatorFamily& a, const ProjectionFamily& p, const SpectralCurve& curve, int n,
                               std::vector<double> deltas) {
  if (deltas.empty()) throw ParameterError("solve_nogap: need at least one delta");
  deltas = clamp_deltas(std::move(deltas), curve.delta0, "solve_nogap");
  const int m0 = static_cast<int>(deltas.size());
  MollifiedDerivative qn(p, n);
  auto eval = [a, p, curve, qn, deltas, m0](double t) {
    CommutatorSample s;
    s.t = t;
    const CMatrix at = a(t);
    const CMatrix pt = p(t);
    const CMatrix q = qn(t);
    approximate_terms(at, pt, q, curve.lambda(t), curve.theta(t), deltas, m0, t, s.B, s.c_plus, s.c_minus);
    s.target = comm(q, pt);
    s.residual = s.B * at - at * s.B + (s.c_plus - s.c_minus) - s.target;
    s.residual_norm = norm2(s.residual);
    return s;
  };
  return CommutatorSolution(Construction::approximate, eval, deltas, n);
}

std::vector<double> delta_schedule(double eps, int m0, const std::function<double(double)>& eta, Schedule s,
                                   double delta0) {
  if (!(eps > 0.0)) throw ParameterError("delta_schedule: eps must be positive");
  if (m0 < 1) throw ParameterError("delta_schedule: m0 must be >= 1");
  bool warned = false;
  auto clamp_d = [&](double d) {
    if (d > delta0) {
      if (!warned) spdlog::warn("delta_schedule: delta {:.3g} above delta0 = {:.3g}, clamped", d, delta0);
      warned = true;
      return delta0;
    }
    return d;
  };
  auto eta_c = [&](double d) {
    const double v = eta(clamp_d(d));
    if (v < d) {
      spdlog::warn("delta_schedule: eta({:.3g}) = {:.3g} < delta, clamped to delta", d, v);
      return d;
    }
    return v;
  };
  std::vector<double> d(static_cast<size_t>(m0) + 1, 0.0);  // 1-based
  if (s == Schedule::quantitative) {
    d[static_cast<size_t>(m0)] = clamp_d(std::pow(eps, 1.0 / (m0 * (m0 + 1.0))));
    for (int k = m0; k >= 2; --k) d[static_cast<size_t>(k - 1)] = clamp_d(std::sqrt(eta_c(d[static_cast<size_t>(k)])));
  } else {
    const double fl = std::pow(eps, 1.0 / ((m0 + 1.0) * (m0 + 1.0)));
    d[static_cast<size_t>(m0)] = clamp_d(fl);
    for (int j = m0 - 1; j >= 1; --j) {
      double v = fl;
      for (int k = j + 1; k <= m0; ++k) {
        double prod = 1.0;
        for (int i = j + 1; i < k; ++i) prod *= d[static_cast<size_t>(i)];
        v = std::max(v, std::sqrt(eta_c(d[static_cast<size_t>(k)]) / prod));
      }
      d[static_cast<size_t>(j)] = clamp_d(v);
    }
  }
  return {d.begin() + 1, d.end()};
}

CommutatorSolution solve_multi(const OperatorFamily& a, const std::vector<MultiCurve>& curves, const MultiMode& mode,
                               const std::vector<double>& probe_grid) {
  if (curves.empty()) throw ParameterError("solve_multi: need at least one curve");
  const size_t r = curves.size();
  for (double t : probe_grid)
    for (size_t j = 0; j < r; ++j)
      for (size_t l = 0; l < r; ++l) {
        if (j == l) continue;
        const double ov = norm2(curves[j].P(t) * curves[l].P(t));
        if (ov > 1e-9)
          throw ProjectionError(fmt::format("solve_multi: P_{} P_{} = {:.3g} at t = {}, projections overlap", j + 1,
                                            l + 1, ov, t));
      }
  for (size_t j = 0; j < r; ++j)
    for (size_t l = j + 1; l < r; ++l) {
      size_t hits = 0;
      for (double t : probe_grid)
        hits += std::abs(curves[j].curve.lambda(t) - curves[l].curve.lambda(t)) < 1e-9 ? 1 : 0;
      if (probe_grid.size() && hits * 10 > probe_grid.size())
        throw ParameterError(fmt::format("solve_multi: curves {} and {} collide on {} of {} probe points", j + 1,
                                         l + 1, hits, probe_grid.size()));
    }

  if (mode.gap) {
    auto eval = [a, curves, r](double t) {
      CommutatorSample s;
      s.t = t;
      const CMatrix at = a(t);
      const int n = static_cast<int>(at.rows());
      std::vector<CMatrix> ps(r), dps(r);
      CMatrix psum = CMatrix::Zero(n, n), dsum = CMatrix::Zero(n, n);
      for (size_t j = 0; j < r; ++j) {
        ps[j] = curves[j].P(t);
        dps[j] = curves[j].P.derivative(t);
        psum += ps[j];
        dsum += dps[j];
      }
      const CMatrix prest = CMatrix::Identity(n, n) - psum;
      s.target = comm(-dsum, prest);
      for (size_t j = 0; j < r; ++j) s.target += comm(dps[j], ps[j]);
      s.target *= 0.5;
      // B_{jl} = oint_j R P_l' R; the complement block is the sum over all pairs.
      s.B = CMatrix::Zero(n, n);
      for (size_t j = 0; j < r; ++j) {
        const Contour c = contour_around(at, curves[j].curve.lambda(t), std::max(1, curves[j].P.rank()));
        s.B += contour_sandwich(at, dps[j], c);
        if (dsum.norm() > 0.0) s.B += contour_sandwich(at, dsum, c);
      }
      s.B *= 0.5;
      s.residual = s.B * at - at * s.B - s.target;
      s.residual_norm = norm2(s.residual);
      return s;
    };
    return CommutatorSolution(Construction::multi_gap, eval);
  }

  if (mode.n < 1 || mode.deltas.empty()) throw ParameterError("solve_multi: nogap mode needs n and deltas");
  std::vector<MollifiedDerivative> qs;
  for (const auto& c : curves) qs.emplace_back(c.P, mode.n);
  std::vector<std::vector<double>> dl;
  for (const auto& c : curves) {
    if (static_cast<int>(mode.deltas.size()) < c.curve.m0)
      throw ParameterError("solve_multi: fewer deltas than the curve's m0");
    dl.push_back(clamp_deltas(std::vector<double>(mode.deltas.begin(), mode.deltas.begin() + c.curve.m0),
                              c.curve.delta0, "solve_multi"));
  }
  auto eval = [a, curves, qs, dl, r](double t) {
    CommutatorSample s;
    s.t = t;
    const CMatrix at = a(t);
    const int n = static_cast<int>(at.rows());
    std::vector<CMatrix> ps(r), qv(r);
    CMatrix qsum = CMatrix::Zero(n, n), psum = CMatrix::Zero(n, n);
    for (size_t j = 0; j < r; ++j) {
      ps[j] = curves[j].P(t);
      qv[j] = qs[j](t);
      qsum += qv[j];
      psum += ps[j];
    }
    s.B = CMatrix::Zero(n, n);
    s.c_plus = CMatrix::Zero(n, n);
    s.c_minus = CMatrix::Zero(n, n);
    s.target = CMatrix::Zero(n, n);
    for (size_t j = 0; j < r; ++j) {
      const auto& cv = curves[j].curve;
      for (int pass = 0; pass < 2; ++pass) {
        const CMatrix& q = pass == 0 ? qv[j] : qsum;
        CMatrix b, cp, cm;
        approximate_terms(at, ps[j], q, cv.lambda(t), cv.theta(t), dl[j], cv.m0, t, b, cp, cm);
        s.B += b;
        s.c_plus += cp;
        s.c_minus += cm;
        s.target += comm(q, ps[j]);
      }
    }
    s.B *= 0.5;
    s.c_plus *= 0.5;
    s.c_minus *= 0.5;
    s.target *= 0.5;
    s.residual = s.B * at - at * s.B + (s.c_plus - s.c_minus) - s.target;
    s.residual_norm = norm2(s.residual);
    return s;
  };
  return CommutatorSolution(Construction::multi_nogap, eval, mode.deltas, mode.n);
}

}  // namespace adiabatica
