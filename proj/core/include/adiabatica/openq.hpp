#pragma once

#include <functional>
#include <string>
#include <vector>

#include "adiabatica/opfamily.hpp"

namespace adiabatica {

// Column stacking throughout: vec(X rho Y) = (Y^T kron X) vec(rho).
CVector vectorize(const CMatrix& rho);
CMatrix unvectorize(const CVector& v, int d);

struct LindbladSpec {
  CMatrix H;
  std::vector<CMatrix> B;
  double p = 2.0;  // Schatten exponent; affects reported norms only
  int dim() const { return static_cast<int>(H.rows()); }
};

// H and B as {"re": [[...]], "im": [[...]]}, plus optional "p".
LindbladSpec lindblad_spec_from_json(const std::string& text);

// rho -> -i[H, rho] + sum_j B rho B^* - 1/2 {B^* B, rho}
CMatrix apply_lindblad(const LindbladSpec& s, const CMatrix& rho);

struct Superoperator {
  CMatrix matrix;
  LindbladSpec spec;
  int hilbert_dim() const { return spec.dim(); }
};

Superoperator build_lindblad(const LindbladSpec& s);
// -i (I kron H - H^T kron I)
CMatrix hamiltonian_part(const CMatrix& h);

// || vec(I)^* A ||: zero when the generated semigroup preserves the trace.
double trace_functional_norm(const Superoperator& s);
// Smallest eigenvalue of the Choi matrix of expm(A s).
double choi_min_eigenvalue(const Superoperator& s, double time);
double schatten_norm(const CMatrix& rho, double p);

struct KernelReport {
  int dim_ker_A = 0;
  int dim_ker_Z0 = 0;
  double inclusion_residual = 0.0;  // max over ker A basis of ||[H, rho]|| and ||[rho, B_j^*]||
  bool inclusion = false;           // ker A subset of ker Z0
  bool equal = false;               // ker A == ker Z0
  // Same questions restricted to operators living on a designated subspace
  // (the point-spectrum sector); only filled when one is given.
  bool has_sector = false;
  int sector_ker_A = 0;
  int sector_ker_Z0 = 0;
  bool sector_equal = false;
  bool dephasing = false;  // B_j commute with H (finite-dim double commutant test)
  double dephasing_residual = 0.0;
};

KernelReport kernel_diagnostics(const Superoperator& s, const CMatrix& sector = CMatrix(), double tol = kRankTol);

// Eigenprojections of a Hermitian matrix grouped by eigenvalue.
std::vector<CMatrix> eigenprojections(const CMatrix& h, double cluster_tol = 1e-9);
// rho -> sum_mu Q_mu rho Q_mu as a d^2 x d^2 matrix.
CMatrix rage_projection(const CMatrix& h);

using SpecSampler = std::function<LindbladSpec(double)>;
// Generic family; the derivative falls back to central differences.
OperatorFamily lindblad_family(SpecSampler specs, std::string name = "lindblad");
// H(t) = e^{-iCt} H e^{iCt}, B_j(t) alike; analytic derivative and co-moving frame.
OperatorFamily lindblad_rotated(const LindbladSpec& s, const CMatrix& c_hermitian, std::string name = "lindblad_rotated");
// The superoperator generator of rho -> e^{-iCt} rho e^{iCt} conjugation, so that
// A(t) = e^{-Gt} A e^{Gt}.
CMatrix conjugation_generator(const CMatrix& c_hermitian);

// Dephasing 2-level example and the non-dephasing construction with an
// emulated continuum block.
LindbladSpec dephasing_qubit();
struct NonDephasingExample {
  LindbladSpec spec;
  CMatrix sector;  // projector onto the designated eigenspaces M
  CVector phi, psi;
};
NonDephasingExample non_dephasing_example(int continuum = 6);

}  // namespace adiabatica
