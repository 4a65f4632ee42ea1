#include "adiabatica/opfamily.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adiabatica {

const char* to_string(Smoothness s) {
  switch (s) {
    case Smoothness::W11: return "W11";
    case Smoothness::W1inf: return "W1inf";
    case Smoothness::C1: return "C1";
    case Smoothness::C2: return "C2";
  }
  return "?";
}

OperatorFamily::OperatorFamily(int dim, Sampler a, Sampler da, Smoothness s, std::string name,
                               std::string provenance)
    : dim_(dim), a_(std::move(a)), da_(std::move(da)), smooth_(s), name_(std::move(name)),
      provenance_(std::move(provenance)) {
  if (dim_ <= 0 || dim_ > kMaxDim * kMaxDim) throw DimensionError("OperatorFamily: bad dimension");
  if (!a_) throw ParameterError("OperatorFamily: empty sampler");
}

CMatrix OperatorFamily::operator()(double t) const {
  CMatrix a = a_(t);
  if (a.rows() != dim_ || a.cols() != dim_) throw DimensionError("OperatorFamily: sampler returned wrong shape");
  return a;
}

CMatrix OperatorFamily::fd_derivative(double t, double h) const {
  return ((*this)(t + h) - (*this)(t - h)) / (2.0 * h);
}

CMatrix OperatorFamily::derivative(double t) const {
  if (da_) return da_(t);
  return fd_derivative(t, kFdStep);
}

OperatorFamily OperatorFamily::with_frame(FrameForm f) const {
  OperatorFamily o = *this;
  o.frame_ = std::move(f);
  return o;
}

OperatorFamily OperatorFamily::with_jordan(JordanStructure j) const {
  OperatorFamily o = *this;
  o.jordan_ = std::move(j);
  return o;
}

OperatorFamily OperatorFamily::with_name(std::string name, std::string provenance) const {
  OperatorFamily o = *this;
  o.name_ = std::move(name);
  if (!provenance.empty()) o.provenance_ = std::move(provenance);
  return o;
}

OperatorFamily constant_family(const CMatrix& a, std::string name) {
  require_square(a, "constant_family");
  require_finite(a, "constant_family");
  const int n = static_cast<int>(a.rows());
  CMatrix zero = CMatrix::Zero(n, n);
  OperatorFamily f(n, [a](double) { return a; }, [zero](double) { return zero; }, Smoothness::C2,
                   std::move(name));
  FrameForm fr;
  fr.flow = std::make_shared<const ExpFlow>(CMatrix::Zero(n, n));
  fr.a0 = [a](double) { return a; };
  fr.da0 = [zero](double) { return zero; };
  fr.a0_constant = true;
  return f.with_frame(std::move(fr));
}

OperatorFamily similarity_family(const OperatorFamily& a0, const CMatrix& c) {
  require_square(c, "similarity_family");
  if (c.rows() != a0.dim()) throw DimensionError("similarity_family: dimension mismatch");
  auto flow = std::make_shared<const ExpFlow>(c);
  OperatorFamily base = a0;
  Sampler a = [flow, base](double t) {
    CMatrix r = flow->at(t);
    CMatrix ri = flow->at(-t);
    return CMatrix(ri * base(t) * r);
  };
  Sampler da = [flow, base, c](double t) {
    CMatrix r = flow->at(t);
    CMatrix ri = flow->at(-t);
    CMatrix x = base(t);
    return CMatrix(ri * (base.derivative(t) + x * c - c * x) * r);
  };
  OperatorFamily out(a0.dim(), a, da, a0.smoothness(), a0.name(), a0.provenance());
  if (a0.jordan()) out = out.with_jordan(*a0.jordan());
  // Nested rotations do not compose into a single exponential; the frame is
  // only kept when the inner family has none (or a trivial one).
  const bool inner_trivial = !a0.frame() || a0.frame()->flow->zero();
  if (inner_trivial) {
    FrameForm fr;
    fr.flow = flow;
    fr.a0 = [base](double t) { return base(t); };
    fr.da0 = [base](double t) { return base.derivative(t); };
    fr.a0_constant = a0.frame() && a0.frame()->a0_constant;
    out = out.with_frame(std::move(fr));
  }
  return out;
}

ProjectionFamily::ProjectionFamily(int rank, Sampler p, Sampler dp, Sampler ddp)
    : rank_(rank), p_(std::move(p)), dp_(std::move(dp)), ddp_(std::move(ddp)) {
  if (!p_ || !dp_) throw ParameterError("ProjectionFamily: sampler and derivative are required");
  if (rank_ < 0) throw ParameterError("ProjectionFamily: negative rank");
}

int ProjectionFamily::dim() const { return static_cast<int>(p_(0.0).rows()); }

CMatrix ProjectionFamily::second_derivative(double t) const {
  if (ddp_) return ddp_(t);
  return (dp_(t + kFdStep) - dp_(t - kFdStep)) / (2.0 * kFdStep);
}

CMatrix ProjectionFamily::commutator_target(double t) const {
  CMatrix p = p_(t);
  CMatrix dp = dp_(t);
  return dp * p - p * dp;
}

ProjectionFamily ProjectionFamily::with_frame(ProjectionFrame f) const {
  ProjectionFamily o = *this;
  o.frame_ = std::move(f);
  return o;
}

ProjectionFamily ProjectionFamily::with_association(bool weakly) const {
  ProjectionFamily o = *this;
  o.weakly_associated_ = weakly;
  return o;
}

ProjectionFamily constant_projection(const CMatrix& p0) {
  require_square(p0, "constant_projection");
  const int n = static_cast<int>(p0.rows());
  CMatrix zero = CMatrix::Zero(n, n);
  ProjectionFamily p(numerical_rank(p0), [p0](double) { return p0; }, [zero](double) { return zero; },
                     [zero](double) { return zero; });
  ProjectionFrame fr{std::make_shared<const ExpFlow>(CMatrix::Zero(n, n)), p0};
  return p.with_frame(std::move(fr));
}

ProjectionFamily similarity_projection(const CMatrix& p0, const CMatrix& c) {
  require_square(p0, "similarity_projection");
  if (c.rows() != p0.rows()) throw DimensionError("similarity_projection: dimension mismatch");
  auto flow = std::make_shared<const ExpFlow>(c);
  const int n = static_cast<int>(p0.rows());
  const int rank = numerical_rank(p0);
  if (4 * rank > n / 2) {
    const CMatrix d1 = p0 * c - c * p0;  // [P0, C]
    const CMatrix d2 = d1 * c - c * d1;  // [[P0, C], C]
    auto conj = [flow](const CMatrix& x, double t) { return CMatrix(flow->at(-t) * x * flow->at(t)); };
    ProjectionFamily p(rank, [conj, p0](double t) { return conj(p0, t); },
                       [conj, d1](double t) { return conj(d1, t); },
                       [conj, d2](double t) { return conj(d2, t); });
    return p.with_frame(ProjectionFrame{flow, p0});
  }
  // Low rank: carry P0 = L R and its commutators with C as thin factors.
  struct Thin {
    CMatrix L, R;
  };
  const ThinFactor f = thin_factor(p0);
  auto bracket = [&c](const Thin& x) {  // [L R, C] = [L, -C L] [R C; R]
    Thin o{CMatrix(x.L.rows(), 2 * x.L.cols()), CMatrix(2 * x.R.rows(), x.R.cols())};
    o.L << x.L, -(c * x.L);
    o.R << x.R * c, x.R;
    return o;
  };
  const Thin t0{f.X, f.Y};
  const Thin t1 = bracket(t0), t2 = bracket(t1);
  auto conj = [flow](const Thin& x, double t) { return CMatrix(flow->left(-t, x.L) * flow->right(x.R, t)); };
  ProjectionFamily p(rank, [conj, t0](double t) { return conj(t0, t); }, [conj, t1](double t) { return conj(t1, t); },
                     [conj, t2](double t) { return conj(t2, t); });
  return p.with_frame(ProjectionFrame{flow, p0});
}

bool all_pass(const InvariantReport& r) {
  return std::all_of(r.begin(), r.end(), [](const InvariantCheck& c) { return c.pass; });
}

std::string describe(const InvariantReport& r) {
  std::ostringstream os;
  for (const auto& c : r)
    os << (c.pass ? "ok   " : "FAIL ") << c.name << " value=" << c.value << " tol=" << c.tol << "\n";
  return os.str();
}

std::vector<double> uniform_grid(double a, double b, int points) {
  if (points < 2 || !(b > a)) throw GridError("uniform_grid: need b > a and at least two points");
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k) g[k] = a + (b - a) * k / (points - 1);
  g.back() = b;
  return g;
}

InvariantReport check_operator_family(const OperatorFamily& a, const std::vector<double>& grid,
                                      double c_fd) {
  InvariantReport rep;
  bool finite = true;
  double fd_err = 0.0;
  const double h = 1e-4;
  for (double t : grid) {
    CMatrix x = a(t);
    finite = finite && all_finite(x);
    if (a.analytic_derivative()) {
      double e = norm2(a.fd_derivative(t, h) - a.derivative(t));
      fd_err = std::max(fd_err, e);
    }
  }
  rep.push_back({"A(t) finite", finite ? 0.0 : 1.0, 0.0, finite});
  if (a.analytic_derivative())
    rep.push_back({"analytic vs central-difference derivative", fd_err, c_fd * h * h, fd_err <= c_fd * h * h});
  return rep;
}

InvariantReport check_projection_family(const ProjectionFamily& p, const std::vector<double>& grid) {
  InvariantReport rep;
  double idem = 0.0, ppp = 0.0;
  bool rank_ok = true;
  int r0 = -1;
  for (double t : grid) {
    CMatrix x = p(t);
    idem = std::max(idem, norm2(x * x - x));
    ppp = std::max(ppp, norm2(x * p.derivative(t) * x));
    int r = numerical_rank(x);
    if (r0 < 0) r0 = r;
    rank_ok = rank_ok && r == r0 && r == p.rank();
  }
  rep.push_back({"P^2 = P", idem, 1e-10, idem <= 1e-10});
  rep.push_back({"rank P(t) constant", rank_ok ? 0.0 : 1.0, 0.0, rank_ok});
  rep.push_back({"P P' P = 0", ppp, 1e-10, ppp <= 1e-10});
  return rep;
}

InvariantReport check_curve(const OperatorFamily& a, const SpectralCurve& curve,
                            const ProjectionFamily& p, const std::vector<double>& grid,
                            const std::vector<double>& deltas) {
  (void)p;
  InvariantReport rep;
  double eig_res = 0.0;
  double worst_ratio = 0.0;
  double ray_min = 1e300;
  for (double t : grid) {
    CMatrix x = a(t);
    const int n = static_cast<int>(x.rows());
    const double nx = std::max(norm2(x), 1e-300);
    const cplx lam = curve.lambda(t);
    const double smin = min_singular_value(x - lam * CMatrix::Identity(n, n));
    eig_res = std::max(eig_res, smin);
    worst_ratio = std::max(worst_ratio, smin / nx);
    const cplx dir = std::polar(1.0, curve.theta(t));
    for (double d : deltas) {
      if (d <= 0.0 || d > curve.delta0) continue;
      double s = min_singular_value((lam + d * dir) * CMatrix::Identity(n, n) - x);
      ray_min = std::min(ray_min, s / nx);
    }
  }
  rep.push_back({"lambda(t) eigenvalue (sigma_min / |A|)", worst_ratio, 1e-8, worst_ratio <= 1e-8});
  rep.push_back({"ray in resolvent set (min sigma_min / |A|)", ray_min, 1e-14, ray_min > 1e-14});
  return rep;
}

}  // namespace adiabatica
