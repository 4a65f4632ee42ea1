#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "adiabatica/errors.hpp"

namespace adiabatica {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kRankTol = 1e-10;
inline constexpr int kMaxDim = 256;
// Largest 1-norm accepted by expm; beyond it the squaring phase overflows
// for anything but very special inputs.
inline constexpr double kExpmMaxNorm = 1e7;
inline constexpr double kSolveTol = 1e-10;
inline constexpr double kSolveCondWarn = 1e12;

void require_square(const CMatrix& a, const char* what);
void require_finite(const CMatrix& a, const char* what);
bool all_finite(const CMatrix& a);

// Builds a checked matrix from row-major entries.
CMatrix from_row_major(int rows, int cols, const std::vector<cplx>& entries);
std::vector<cplx> to_row_major(const CMatrix& a);

double norm2(const CMatrix& a);
double norm1(const CMatrix& a);
RVector singular_values(const CMatrix& a);
double min_singular_value(const CMatrix& a);

CMatrix expm(const CMatrix& a);
CMatrix solve(const CMatrix& a, const CMatrix& b);
int numerical_rank(const CMatrix& a, double tol = kRankTol);

inline CMatrix comm(const CMatrix& x, const CMatrix& y) { return x * y - y * x; }
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix identity(int n);
bool is_skew_hermitian(const CMatrix& a, double tol = 1e-12);
bool is_hermitian(const CMatrix& a, double tol = 1e-12);
bool is_normal(const CMatrix& a, double tol = 1e-12);

struct SchurForm {
  CMatrix Q;
  CMatrix T;
  int selected = 0;          // size of the leading block
  std::vector<int> order;    // original diagonal position now at slot k
  CMatrix reconstruct() const { return Q * T * Q.adjoint(); }
};

SchurForm ordered_schur(const CMatrix& a, const std::function<bool(cplx)>& select);

// Solves T11 X - X T22 = F for upper-triangular T11, T22.
CMatrix solve_triangular_sylvester(const CMatrix& t11, const CMatrix& t22, const CMatrix& f);

// t -> e^{Ct}, diagonalised once when C is normal.
class ExpFlow {
 public:
  ExpFlow() = default;
  explicit ExpFlow(CMatrix c);
  CMatrix at(double t) const;
  // e^{Ct} M and M e^{Ct}; O(n^2 k) for thin M when C is normal.
  CMatrix left(double t, const CMatrix& m) const;
  CMatrix right(const CMatrix& m, double t) const;
  const CMatrix& generator() const { return c_; }
  bool normal() const { return normal_; }
  bool zero() const { return zero_; }

 private:
  CMatrix c_;
  bool normal_ = false;
  bool zero_ = true;
  CMatrix w_;
  CVector mu_;
};

// Orthonormal basis X of ran P together with Y = X* P, so P = X Y.
struct ThinFactor {
  CMatrix X;
  CMatrix Y;
};
ThinFactor thin_factor(const CMatrix& p, double tol = kRankTol);

}  // namespace adiabatica
