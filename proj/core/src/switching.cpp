#include "adiabatica/switching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <json.hpp>

namespace adiabatica {

namespace {

const cplx kI(0.0, 1.0);

void require_skew(const CMatrix& a, const char* what) {
  require_square(a, what);
  require_finite(a, what);
  if ((a + a.adjoint()).norm() > 1e-12 * std::max(1.0, a.norm()))
    throw ParameterError(std::string(what) + ": matrix is not skew-Hermitian");
}

struct Eig {
  RVector e;  // A = i * (V diag(e) V^*)
  CMatrix v;
};

Eig skew_eigen(const CMatrix& a) {
  const CMatrix h = -kI * a;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success) throw ConvergenceError("switching: eigen solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// Group consecutive (sorted) eigenvalues closer than tol.
std::vector<std::vector<int>> clusters(const RVector& e, double tol) {
  std::vector<std::vector<int>> out;
  for (int i = 0; i < e.size(); ++i) {
    if (out.empty() || e(i) - e(out.back().back()) > tol) out.emplace_back();
    out.back().push_back(i);
  }
  return out;
}

CMatrix projector(const CMatrix& v, const std::vector<int>& cols) {
  CMatrix x(v.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = v.col(cols[k]);
  return x * x.adjoint();
}

CMatrix matrix_from_json(const nlohmann::json& j, const char* what) {
  const auto& re = j.at("re");
  const size_t n = re.size();
  if (n == 0) throw ConfigError(std::string(what) + ": empty matrix");
  CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(re.at(0).size()));
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < re.at(i).size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          cplx(re.at(i).at(k).get<double>(), j.contains("im") ? j.at("im").at(i).at(k).get<double>() : 0.0);
  return m;
}

}  // namespace

const char* to_string(KappaKind k) { return k == KappaKind::exp ? "exp" : "smoothstep"; }
const char* to_string(ShiftFormula f) { return f == ShiftFormula::log_derivative ? "log_derivative" : "exp_switch"; }

double SwitchingSetup::kappa(double t) const {
  if (kind == KappaKind::exp) return std::exp(t);
  const double x = std::clamp(1.0 + t / width, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

double SwitchingSetup::dkappa(double t) const {
  if (kind == KappaKind::exp) return std::exp(t);
  const double x = 1.0 + t / width;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 6.0 * x * (1.0 - x) / width;
}

SwitchingSetup make_switching(const CMatrix& a0, const CMatrix& v, KappaKind kind, double tail_tol, double width) {
  require_skew(a0, "SwitchingSetup.A0");
  require_skew(v, "SwitchingSetup.V");
  if (a0.rows() != v.rows()) throw DimensionError("SwitchingSetup: A0 and V differ in size");
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw ParameterError("SwitchingSetup: tail_tol must lie in (0, 1)");
  if (!(width > 0.0)) throw ParameterError("SwitchingSetup: width must be positive");
  SwitchingSetup s;
  s.A0 = a0;
  s.V = v;
  s.kind = kind;
  s.width = width;
  s.tail_tol = tail_tol;
  // both int kappa and int kappa' over (-inf, -T] equal e^{-T} for the exponential
  s.T = kind == KappaKind::exp ? std::log(1.0 / tail_tol) : width;
  return s;
}

SwitchingSetup switching_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const std::string k = j.value("kappa", std::string("exp"));
    KappaKind kind;
    if (k == "exp")
      kind = KappaKind::exp;
    else if (k == "smoothstep")
      kind = KappaKind::smoothstep;
    else
      throw ConfigError("switching JSON: kappa must be exp or smoothstep");
    double tail = 1e-8, width = 10.0;
    if (j.contains("params")) {
      tail = j["params"].value("tail_tol", tail);
      width = j["params"].value("width", width);
    }
    return make_switching(matrix_from_json(j.at("A0"), "A0"), matrix_from_json(j.at("V"), "V"), kind, tail, width);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("switching JSON: ") + e.what());
  }
}

SwitchingSetup degenerate_example() {
  CMatrix a0 = CMatrix::Zero(4, 4);
  a0(2, 2) = kI;
  a0(3, 3) = 2.0 * kI;
  CMatrix h(4, 4);
  h << 0.30, cplx(0.10, 0.05), 0.10, 0.05,
       cplx(0.10, -0.05), -0.20, 0.08, cplx(0.0, 0.10),
       0.10, 0.08, 0.10, 0.05,
       0.05, cplx(0.0, -0.10), 0.05, 0.0;
  return make_switching(a0, kI * h, KappaKind::exp);
}

double interaction_horizon(const SwitchingSetup& s, double eps) {
  if (s.kind == KappaKind::smoothstep) return s.width;
  const double nv = std::max(norm2(s.V), 1e-300);
  return std::max(s.T, std::log(nv / (eps * s.tail_tol)));
}

InteractionResult interaction_propagator(const SwitchingSetup& s, double eps, double T, double tol,
                                         bool check_doubling, int points) {
  if (!(eps > 0.0)) throw ParameterError("interaction_propagator: eps must be positive");
  if (T <= 0.0) T = interaction_horizon(s, eps);
  const ExpFlow free(s.A0 / eps);
  const double inv = 1.0 / eps;
  const CMatrix a0 = s.A0, v = s.V;
  const SwitchingSetup copy = s;
  Sampler g = [a0, v, copy, inv](double t) { return CMatrix(inv * (a0 + copy.kappa(t) * v)); };
  PropagateOptions opt;
  opt.tol_step = tol;

  auto run = [&](double horizon, int pts) {
    PropagatorTable tab = propagate_generator(g, uniform_grid(-horizon, 0.0, pts), opt);
    const CMatrix right = free.at(-horizon);
    for (size_t k = 0; k < tab.size(); ++k) tab.U[k] = free.at(-tab.t[k]) * tab.U[k] * right;
    return tab;
  };

  InteractionResult out;
  out.T = T;
  out.table = run(T, points);
  out.UI = out.table.U.back();
  if (check_doubling) {
    const PropagatorTable twice = run(2.0 * T, 2 * points - 1);
    out.doubling_diff = norm2(out.UI - twice.U.back());
  }
  return out;
}

CurveFrame continue_eigencurves(const SwitchingSetup& s, int samples) {
  const int n = s.dim();
  const double scale = std::max(1.0, norm2(s.A0) + norm2(s.V));
  const double ctol = 1e-9 * scale;
  CurveFrame cf;

  // split the eigenspaces of A0 by the compression of V
  const Eig e0 = skew_eigen(s.A0);
  std::vector<CMatrix> bases;
  for (const auto& cl : clusters(e0.e, ctol)) {
    CMatrix x(n, static_cast<Eigen::Index>(cl.size()));
    for (size_t k = 0; k < cl.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = e0.v.col(cl[k]);
    const cplx mu = kI * e0.e(cl.front());
    if (cl.size() == 1) {
      cf.P_start.push_back(x * x.adjoint());
      cf.lambda_start.push_back(mu);
      bases.push_back(x);
      continue;
    }
    const Eig ec = skew_eigen(x.adjoint() * s.V * x);
    for (const auto& sub : clusters(ec.e, ctol)) {
      CMatrix y(static_cast<Eigen::Index>(cl.size()), static_cast<Eigen::Index>(sub.size()));
      for (size_t k = 0; k < sub.size(); ++k) y.col(static_cast<Eigen::Index>(k)) = ec.v.col(sub[k]);
      const CMatrix xb = x * y;
      cf.P_start.push_back(xb * xb.adjoint());
      cf.lambda_start.push_back(mu);
      bases.push_back(xb);
    }
  }

  // continuation in u = kappa by eigenvector overlap
  std::vector<CMatrix> cur = cf.P_start;
  std::vector<cplx> lam(cur.size());
  for (int k = 1; k <= samples; ++k) {
    const double u = static_cast<double>(k) / samples;
    const Eig ek = skew_eigen(s.A0 + u * s.V);
    std::vector<bool> used(static_cast<size_t>(n), false);
    std::vector<int> owner(static_cast<size_t>(n), -1);
    for (size_t j = 0; j < cur.size(); ++j) {
      const int r = static_cast<int>(std::lround(cur[j].trace().real()));
      std::vector<std::pair<double, int>> ov;
      for (int i = 0; i < n; ++i)
        if (!used[static_cast<size_t>(i)]) ov.emplace_back((cur[j] * ek.v.col(i)).norm(), i);
      std::sort(ov.begin(), ov.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      std::vector<int> pick;
      double acc = 0.0;
      for (int q = 0; q < r && q < static_cast<int>(ov.size()); ++q) {
        pick.push_back(ov[static_cast<size_t>(q)].second);
        used[static_cast<size_t>(ov[static_cast<size_t>(q)].second)] = true;
        owner[static_cast<size_t>(ov[static_cast<size_t>(q)].second)] = static_cast<int>(j);
        acc += ek.e(ov[static_cast<size_t>(q)].second);
      }
      cur[j] = projector(ek.v, pick);
      lam[j] = kI * (acc / std::max<size_t>(1, pick.size()));
    }
    for (int i = 0; i + 1 < n; ++i)
      if (ek.e(i + 1) - ek.e(i) <= ctol && owner[static_cast<size_t>(i)] != owner[static_cast<size_t>(i + 1)])
        ++cf.collisions;
  }
  cf.P_end = cur;
  cf.lambda_end = lam;
  return cf;
}

CMatrix kato_generator(const SwitchingSetup& s, double u) {
  const Eig ek = skew_eigen(s.A0 + u * s.V);
  const int n = s.dim();
  const double ctol = 1e-12 * std::max(1.0, norm2(s.A0) + norm2(s.V));
  // K = sum_{j != l} P_l V P_j / (lambda_j - lambda_l), in the eigenbasis
  const CMatrix vt = ek.v.adjoint() * s.V * ek.v;
  CMatrix k = CMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double d = ek.e(b) - ek.e(a);
      if (std::abs(d) <= ctol) continue;
      k(a, b) = vt(a, b) / (kI * d);
    }
  return ek.v * k * ek.v.adjoint();
}

CMatrix adiabatic_limit(const SwitchingSetup& s, double tol) {
  PropagateOptions opt;
  opt.tol_step = tol;
  const SwitchingSetup copy = s;
  const PropagatorTable tab =
      propagate_generator([copy](double u) { return kato_generator(copy, u); }, uniform_grid(0.0, 1.0, 41), opt);
  return tab.U.back();
}

double projective_distance(const CVector& a, const CVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  const double c = std::abs(a.dot(b)) / (na * nb);
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

namespace {

int curve_of(const CurveFrame& cf, const CVector& x) {
  for (size_t j = 0; j < cf.P_start.size(); ++j)
    if ((cf.P_start[j] * x - x).norm() <= 1e-8 * std::max(1.0, x.norm())) return static_cast<int>(j);
  throw ProjectionError("switching: x does not lie in the range of a limit eigenprojection P_j(-inf)");
}

void check_reswitching(const CurveFrame& cf, int j) {
  const double d = norm2(cf.P_end[static_cast<size_t>(j)] - cf.P_start[static_cast<size_t>(j)]);
  if (d >= 1.0)
    throw ParameterError(fmt::format(
        "switching: ||P_j(0) - P_j(-inf)|| = {:.3g} >= 1; switch the perturbation on in intermediate steps", d));
}

}  // namespace

GmlResult gml_ratio(const SwitchingSetup& s, double eps, const CVector& x, const CVector& xp, double tol) {
  const CurveFrame cf = continue_eigencurves(s);
  GmlResult r;
  r.curve = curve_of(cf, x);
  check_reswitching(cf, r.curve);
  const CMatrix w = adiabatic_limit(s, tol * 1e-1);
  const CVector wx = w * x;
  r.denominator_W = xp.dot(wx);
  if (std::abs(r.denominator_W) < 1e-8) throw DenominatorError("gml_ratio: <x', W(0,-inf) x> vanishes");
  r.target = wx / r.denominator_W;
  const CMatrix a_end = s.A0 + s.V;
  const cplx le = cf.lambda_end[static_cast<size_t>(r.curve)];
  r.target_residual = (a_end * r.target - le * r.target).norm() / r.target.norm();
  if (r.target_residual > 1e-7)
    throw ConvergenceError(fmt::format("gml_ratio: W x is not an eigenvector of A(0) (residual {:.3g})", r.target_residual));
  const InteractionResult ir = interaction_propagator(s, eps, 0.0, tol, false);
  const CVector ux = ir.UI * x;
  const cplx den = xp.dot(ux);
  if (std::abs(den) < 1e-12) throw DenominatorError("gml_ratio: <x', U^I(0,-inf) x> vanishes");
  r.ratio = ux / den;
  r.difference = (r.ratio - r.target).norm();
  r.projective = projective_distance(r.ratio, r.target);
  return r;
}

cplx energy_shift(const SwitchingSetup& s, double eps, const CVector& x, const CVector& xp, ShiftFormula f,
                  double tol) {
  const CurveFrame cf = continue_eigencurves(s);
  const int j = curve_of(cf, x);
  check_reswitching(cf, j);
  const CMatrix w = adiabatic_limit(s, tol * 1e-1);
  const cplx zw = xp.dot(w * x);
  if (std::abs(zw) < 1e-8 || (zw.real() < 0.0 && std::abs(zw.imag()) < 1e-8 * std::abs(zw)))
    throw DenominatorError("energy_shift: <x', W x> is zero or on the negative real axis");
  if (f == ShiftFormula::log_derivative) {
    const CVector ux = interaction_propagator(s, eps, 0.0, tol, false).UI * x;
    const cplx fz = xp.dot(ux);
    if (std::abs(fz) < 1e-12 || (fz.real() < 0.0 && std::abs(fz.imag()) < 1e-10 * std::abs(fz)))
      throw DenominatorError("energy_shift: f_eps(0) on the branch cut of the logarithm");
    // eps f'(0) / f(0) with f'(0) = -(1/eps) <V x', U^I x>
    return -(s.V * xp).dot(ux) / fz;
  }
  if (s.kind != KappaKind::exp) throw ParameterError("energy_shift: exp_switch needs kappa(t) = e^t");
  const double h = 1e-4;
  const double T = interaction_horizon(s, eps) + std::log(1.0 + h);
  SwitchingSetup sp = s, sm = s;
  sp.V = (1.0 + h) * s.V;
  sm.V = (1.0 - h) * s.V;
  const cplx gp = xp.dot(interaction_propagator(sp, eps, T, tol, false).UI * x);
  const cplx gm = xp.dot(interaction_propagator(sm, eps, T, tol, false).UI * x);
  if (std::abs(gp) < 1e-12 || std::abs(gm) < 1e-12) throw DenominatorError("energy_shift: vanishing amplitude");
  return eps * std::log(gp / gm) / (2.0 * h);
}

cplx exact_shift(const SwitchingSetup& s, const CVector& x) {
  const CurveFrame cf = continue_eigencurves(s);
  const int j = curve_of(cf, x);
  return cf.lambda_end[static_cast<size_t>(j)] - cf.lambda_start[static_cast<size_t>(j)];
}

CVector intertwined_interaction(const SwitchingSetup& s, double eps, const CVector& x, double tol) {
  const double T = interaction_horizon(s, eps);
  const double inv = 1.0 / eps;
  const SwitchingSetup copy = s;
  Sampler g = [copy, inv](double t) {
    const double k = copy.kappa(t);
    CMatrix out = inv * (copy.A0 + k * copy.V);
    const double dk = copy.dkappa(t);
    if (dk != 0.0) out += dk * kato_generator(copy, k);
    return out;
  };
  PropagateOptions opt;
  opt.tol_step = tol;
  const PropagatorTable tab = propagate_generator(g, uniform_grid(-T, 0.0, 201), opt);
  const ExpFlow free(s.A0 / eps);
  return tab.U.back() * (free.at(-T) * x);
}

}  // namespace adiabatica
