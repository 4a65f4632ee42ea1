#include "adiabatica/matrixkit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <spdlog/spdlog.h>

namespace adiabatica {

void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << a.rows() << "x" << a.cols();
    throw DimensionError(os.str());
  }
}

bool all_finite(const CMatrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

void require_finite(const CMatrix& a, const char* what) {
  if (!all_finite(a)) throw NonFiniteError(std::string(what) + ": matrix has NaN/Inf entries");
}

CMatrix from_row_major(int rows, int cols, const std::vector<cplx>& entries) {
  if (rows <= 0 || cols <= 0 || entries.size() != static_cast<size_t>(rows) * cols)
    throw DimensionError("from_row_major: entry count does not match shape");
  CMatrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = entries[static_cast<size_t>(i) * cols + j];
  require_finite(a, "from_row_major");
  return a;
}

std::vector<cplx> to_row_major(const CMatrix& a) {
  std::vector<cplx> out;
  out.reserve(static_cast<size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.push_back(a(i, j));
  return out;
}

double norm2(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 || a.cols() == 1) return a.norm();
  // Gram matrix on the smaller side; eigenvalues are sigma^2.
  CMatrix g = a.rows() <= a.cols() ? CMatrix(a * a.adjoint()) : CMatrix(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().maxCoeff();
  return std::sqrt(std::max(top, 0.0));
}

double norm1(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

RVector singular_values(const CMatrix& a) {
  if (a.size() == 0) return RVector();
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues();
}

double min_singular_value(const CMatrix& a) {
  RVector s = singular_values(a);
  return s.size() ? s.minCoeff() : 0.0;
}

CMatrix identity(int n) { return CMatrix::Identity(n, n); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_skew_hermitian(const CMatrix& a, double tol) {
  return a.rows() == a.cols() && (a + a.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

bool is_hermitian(const CMatrix& a, double tol) {
  return a.rows() == a.cols() && (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

bool is_normal(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  CMatrix d = a * a.adjoint() - a.adjoint() * a;
  double s = a.cwiseAbs().maxCoeff();
  return d.cwiseAbs().maxCoeff() <= tol * std::max(1.0, s * s);
}

namespace {

// Higham's scaling-and-squaring with Pade degrees 3..13.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

void pade_low(const CMatrix& a, const double* b, int m, CMatrix& u, CMatrix& v) {
  const Eigen::Index n = a.rows();
  CMatrix id = CMatrix::Identity(n, n);
  CMatrix a2 = a * a;
  CMatrix pw = id;
  CMatrix uu = b[1] * id;
  CMatrix vv = b[0] * id;
  for (int k = 2; k <= m; k += 2) {
    pw = pw * a2;
    uu += b[k + 1] * pw;
    vv += b[k] * pw;
  }
  u = a * uu;
  v = vv;
}

void pade13(const CMatrix& a, CMatrix& u, CMatrix& v) {
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const Eigen::Index n = a.rows();
  CMatrix id = CMatrix::Identity(n, n);
  CMatrix a2 = a * a;
  CMatrix a4 = a2 * a2;
  CMatrix a6 = a4 * a2;
  CMatrix tmp = b[13] * a6 + b[11] * a4 + b[9] * a2;
  u = a * (a6 * tmp + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  tmp = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v = a6 * tmp + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace

CMatrix expm(const CMatrix& a) {
  require_square(a, "expm");
  require_finite(a, "expm");
  const double nrm = norm1(a);
  if (nrm > kExpmMaxNorm) {
    std::ostringstream os;
    os << "expm: 1-norm " << nrm << " exceeds supported range " << kExpmMaxNorm;
    throw OverflowError(os.str());
  }
  const Eigen::Index n = a.rows();
  if (nrm == 0.0) return CMatrix::Identity(n, n);

  CMatrix u, v;
  int squarings = 0;
  static const double b3[] = {120.0, 60.0, 12.0, 1.0};
  static const double b5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static const double b7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                              25200.0,    1512.0,    56.0,      1.0};
  static const double b9[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                              2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  if (nrm <= kTheta3) {
    pade_low(a, b3, 3, u, v);
  } else if (nrm <= kTheta5) {
    pade_low(a, b5, 5, u, v);
  } else if (nrm <= kTheta7) {
    pade_low(a, b7, 7, u, v);
  } else if (nrm <= kTheta9) {
    pade_low(a, b9, 9, u, v);
  } else {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta13))));
    CMatrix as = a / std::ldexp(1.0, squarings);
    pade13(as, u, v);
  }
  CMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  if (!all_finite(r)) throw OverflowError("expm: result overflowed");
  return r;
}

CMatrix solve(const CMatrix& a, const CMatrix& b) {
  require_square(a, "solve");
  if (b.rows() != a.rows()) throw DimensionError("solve: right-hand side has wrong row count");
  require_finite(a, "solve");
  require_finite(b, "solve");
  Eigen::PartialPivLU<CMatrix> lu(a);
  const double scale = a.cwiseAbs().maxCoeff();
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (scale == 0.0 || pivot < 1e-14 * scale) {
    std::ostringstream os;
    os << "solve: matrix singular to tolerance (pivot " << pivot << ", scale " << scale << ")";
    throw SingularMatrixError(os.str(), pivot);
  }
  const double rc = lu.rcond();
  if (rc > 0 && 1.0 / rc > kSolveCondWarn)
    spdlog::warn("solve: condition estimate {:.3g} above {:.0e}", 1.0 / rc, kSolveCondWarn);
  CMatrix x = lu.solve(b);
  // one refinement sweep if the residual misses the contract
  const double bn = b.norm();
  CMatrix r = b - a * x;
  if (r.norm() > kSolveTol * bn) {
    x += lu.solve(r);
  }
  return x;
}

int numerical_rank(const CMatrix& a, double tol) {
  if (tol < 0) throw ParameterError("numerical_rank: tol must be >= 0");
  require_finite(a, "numerical_rank");
  RVector s = singular_values(a);
  if (s.size() == 0) return 0;
  const double top = s.maxCoeff();
  if (top == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * top) ++r;
  return r;
}

namespace {

// Swap the adjacent diagonal entries k, k+1 of the triangular factor.
void swap_adjacent(CMatrix& t, CMatrix& q, Eigen::Index k) {
  const cplx a = t(k, k);
  const cplx b = t(k + 1, k + 1);
  const cplx f = t(k, k + 1);
  const cplx g = b - a;
  const double nrm = std::hypot(std::abs(f), std::abs(g));
  if (nrm == 0.0) {
    std::swap(t(k, k), t(k + 1, k + 1));
    return;
  }
  // first column: eigenvector of [[a, f], [0, b]] for b
  Eigen::Matrix2cd g2;
  g2(0, 0) = f / nrm;
  g2(1, 0) = g / nrm;
  g2(0, 1) = -std::conj(g2(1, 0));
  g2(1, 1) = std::conj(g2(0, 0));
  const Eigen::Index n = t.rows();
  t.block(k, 0, 2, n) = g2.adjoint() * t.block(k, 0, 2, n);
  t.block(0, k, n, 2) = t.block(0, k, n, 2) * g2;
  q.block(0, k, n, 2) = q.block(0, k, n, 2) * g2;
  t(k + 1, k) = 0.0;
  t(k, k) = b;
  t(k + 1, k + 1) = a;
}

}  // namespace

SchurForm ordered_schur(const CMatrix& a, const std::function<bool(cplx)>& select) {
  require_square(a, "ordered_schur");
  require_finite(a, "ordered_schur");
  Eigen::ComplexSchur<CMatrix> cs(a, true);
  if (cs.info() != Eigen::Success) throw ConvergenceError("ordered_schur: QR iteration failed");
  SchurForm out;
  out.Q = cs.matrixU();
  out.T = cs.matrixT();
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) out.T(i, j) = 0.0;
  std::vector<bool> flag(n);
  out.order.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    flag[i] = select(out.T(i, i));
    out.order[i] = static_cast<int>(i);
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  Eigen::Index head = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!flag[i]) continue;
    for (Eigen::Index k = i; k > head; --k) {
      // k-1 is unselected, k is selected
      if (std::abs(out.T(k, k) - out.T(k - 1, k - 1)) <= 1e-12 * scale) {
        std::ostringstream os;
        os << "ordered_schur: selected eigenvalue " << out.T(k, k)
           << " coincides with unselected " << out.T(k - 1, k - 1);
        throw ReorderError(os.str(), out.T(k, k), out.T(k - 1, k - 1));
      }
      swap_adjacent(out.T, out.Q, k - 1);
      std::swap(flag[k], flag[k - 1]);
      std::swap(out.order[k], out.order[k - 1]);
    }
    ++head;
  }
  out.selected = static_cast<int>(head);
  return out;
}

CMatrix solve_triangular_sylvester(const CMatrix& t11, const CMatrix& t22, const CMatrix& f) {
  const Eigen::Index k = t11.rows();
  const Eigen::Index m = t22.rows();
  if (f.rows() != k || f.cols() != m) throw DimensionError("sylvester: shape mismatch");
  CMatrix x(k, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    CVector rhs = f.col(j);
    for (Eigen::Index i = 0; i < j; ++i) rhs += t22(i, j) * x.col(i);
    CMatrix lhs = t11;
    lhs.diagonal().array() -= t22(j, j);
    const double piv = lhs.diagonal().cwiseAbs().minCoeff();
    if (piv < 1e-14 * std::max(1.0, t11.cwiseAbs().maxCoeff()))
      throw SingularMatrixError("sylvester: spectra of the two blocks intersect", piv);
    x.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
  }
  return x;
}

ExpFlow::ExpFlow(CMatrix c) : c_(std::move(c)) {
  require_square(c_, "ExpFlow");
  zero_ = c_.cwiseAbs().maxCoeff() == 0.0;
  if (zero_) return;
  if (is_skew_hermitian(c_)) {
    CMatrix h = cplx(0, 1) * c_;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    w_ = es.eigenvectors();
    mu_ = es.eigenvalues().cast<cplx>() * cplx(0, -1);
    normal_ = true;
  } else if (is_hermitian(c_)) {
    CMatrix h = 0.5 * (c_ + c_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    w_ = es.eigenvectors();
    mu_ = es.eigenvalues().cast<cplx>();
    normal_ = true;
  }
}

CMatrix ExpFlow::at(double t) const {
  const Eigen::Index n = c_.rows();
  if (zero_) return CMatrix::Identity(n, n);
  if (normal_) {
    CVector ph = (mu_ * t).array().exp();
    return w_ * ph.asDiagonal() * w_.adjoint();
  }
  return expm(c_ * t);
}

CMatrix ExpFlow::left(double t, const CMatrix& m) const {
  if (zero_) return m;
  if (normal_) {
    CVector ph = (mu_ * t).array().exp();
    return w_ * (ph.asDiagonal() * (w_.adjoint() * m));
  }
  return expm(c_ * t) * m;
}

CMatrix ExpFlow::right(const CMatrix& m, double t) const {
  if (zero_) return m;
  if (normal_) {
    CVector ph = (mu_ * t).array().exp();
    return ((m * w_) * ph.asDiagonal()) * w_.adjoint();
  }
  return m * expm(c_ * t);
}

ThinFactor thin_factor(const CMatrix& p, double tol) {
  Eigen::BDCSVD<CMatrix> svd(p, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const double top = s.size() ? s.maxCoeff() : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * top) ++r;
  ThinFactor out;
  out.X = svd.matrixU().leftCols(r);
  out.Y = out.X.adjoint() * p;
  return out;
}

}  // namespace adiabatica
