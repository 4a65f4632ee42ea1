#include "adiabatica/openq.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/format.h>
#include <json.hpp>

namespace adiabatica {

CVector vectorize(const CMatrix& rho) { return Eigen::Map<const CVector>(rho.data(), rho.size()); }

CMatrix unvectorize(const CVector& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d) throw DimensionError("unvectorize: length is not d^2");
  return Eigen::Map<const CMatrix>(v.data(), d, d);
}

namespace {

CMatrix matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_object() || !j.contains("re")) throw ConfigError(std::string(what) + ": expected {\"re\": [[...]], \"im\": [[...]]}");
  const auto& re = j.at("re");
  const size_t rows = re.size();
  if (rows == 0) throw ConfigError(std::string(what) + ": empty matrix");
  const size_t cols = re.at(0).size();
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (re.at(i).size() != cols) throw ConfigError(std::string(what) + ": ragged rows");
    for (size_t k = 0; k < cols; ++k) {
      const double im = j.contains("im") ? j.at("im").at(i).at(k).get<double>() : 0.0;
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cplx(re.at(i).at(k).get<double>(), im);
    }
  }
  return m;
}

void validate(const LindbladSpec& s) {
  require_square(s.H, "LindbladSpec.H");
  require_finite(s.H, "LindbladSpec.H");
  if ((s.H - s.H.adjoint()).norm() > 1e-12 * std::max(1.0, s.H.norm()))
    throw ParameterError("LindbladSpec: H is not Hermitian");
  if (s.B.size() > 64) throw ParameterError("LindbladSpec: at most 64 jump operators");
  const int d = s.dim();
  CMatrix bb = CMatrix::Zero(d, d), b_b = CMatrix::Zero(d, d);
  for (const auto& b : s.B) {
    if (b.rows() != d || b.cols() != d) throw DimensionError("LindbladSpec: jump operator has the wrong shape");
    require_finite(b, "LindbladSpec.B");
    bb += b * b.adjoint();
    b_b += b.adjoint() * b;
  }
  const double r = norm2(bb - b_b);
  if (r > 1e-10)
    throw DephasingError(fmt::format("LindbladSpec: weak dephasingness violated, ||sum BB* - sum B*B|| = {:.3g}", r));
}

}  // namespace

LindbladSpec lindblad_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("LindbladSpec JSON: ") + e.what());
  }
  LindbladSpec s;
  try {
    s.H = matrix_from_json(j.at("H"), "H");
    if (j.contains("B"))
      for (const auto& b : j.at("B")) s.B.push_back(matrix_from_json(b, "B"));
    if (j.contains("p")) s.p = j.at("p").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("LindbladSpec JSON: ") + e.what());
  }
  if (!(s.p > 1.0)) throw ConfigError("LindbladSpec JSON: p must lie in (1, inf)");
  validate(s);
  return s;
}

CMatrix apply_lindblad(const LindbladSpec& s, const CMatrix& rho) {
  const cplx i(0.0, 1.0);
  CMatrix out = -i * (s.H * rho - rho * s.H);
  for (const auto& b : s.B) {
    const CMatrix bb = b.adjoint() * b;
    out += b * rho * b.adjoint() - 0.5 * (bb * rho + rho * bb);
  }
  return out;
}

CMatrix hamiltonian_part(const CMatrix& h) {
  const int d = static_cast<int>(h.rows());
  const CMatrix id = CMatrix::Identity(d, d);
  return cplx(0.0, -1.0) * (kron(id, h) - kron(h.transpose(), id));
}

Superoperator build_lindblad(const LindbladSpec& s) {
  validate(s);
  const int d = s.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix a = hamiltonian_part(s.H);
  for (const auto& b : s.B) {
    const CMatrix bb = b.adjoint() * b;
    a += kron(b.conjugate(), b) - 0.5 * kron(id, bb) - 0.5 * kron(bb.transpose(), id);
  }
  return {a, s};
}

double trace_functional_norm(const Superoperator& s) {
  const int d = s.hilbert_dim();
  const CVector tr = vectorize(CMatrix::Identity(d, d));
  return (tr.adjoint() * s.matrix).norm();
}

double choi_min_eigenvalue(const Superoperator& s, double time) {
  const int d = s.hilbert_dim();
  const CMatrix phi = expm(time * s.matrix);
  CMatrix choi = CMatrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      // vec(E_ij) = e_{i + j d}
      const CMatrix img = unvectorize(phi.col(i + j * d), d);
      choi.block(i * d, j * d, d, d) = img;
    }
  const CMatrix h = 0.5 * (choi + choi.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double schatten_norm(const CMatrix& rho, double p) {
  const RVector s = singular_values(rho);
  if (std::isinf(p)) return s.size() ? s.maxCoeff() : 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) acc += std::pow(s(i), p);
  return std::pow(acc, 1.0 / p);
}

std::vector<CMatrix> eigenprojections(const CMatrix& h, double cluster_tol) {
  require_square(h, "eigenprojections");
  if ((h - h.adjoint()).norm() > 1e-12 * std::max(1.0, h.norm()))
    throw ParameterError("eigenprojections: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const RVector& ev = es.eigenvalues();
  const CMatrix& v = es.eigenvectors();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double tol = cluster_tol * scale;
  std::vector<CMatrix> out;
  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= ev.size(); ++k) {
    if (k < ev.size()) {
      const double gap = ev(k) - ev(k - 1);
      if (gap > tol && gap <= 1e3 * tol)
        throw ClusterError(fmt::format("eigenprojections: eigenvalues {} and {} are neither equal nor separated",
                                       ev(k - 1), ev(k)),
                           cplx(ev(k), 0.0));
      if (gap <= tol) continue;
    }
    const CMatrix x = v.middleCols(start, k - start);
    out.push_back(x * x.adjoint());
    start = k;
  }
  return out;
}

CMatrix rage_projection(const CMatrix& h) {
  const int d = static_cast<int>(h.rows());
  CMatrix p = CMatrix::Zero(d * d, d * d);
  for (const auto& q : eigenprojections(h)) p += kron(q.conjugate(), q);
  return p;
}

namespace {

struct NullInfo {
  int rank = 0;
  CMatrix null_basis;
};

NullInfo null_space(const CMatrix& a, double tol, const char* what) {
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  const double thr = tol * std::max(top, 1e-300);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thr / 10.0 && s(i) <= thr * 10.0)
      throw RankAmbiguityError(fmt::format("{}: singular value {:.3g} within 10x of the rank threshold {:.3g}", what,
                                           s(i), thr));
    if (s(i) > thr) ++r;
  }
  NullInfo out;
  out.rank = r;
  out.null_basis = svd.matrixV().rightCols(a.cols() - r);
  return out;
}

int kernel_dim_on(const CMatrix& a, const CMatrix& range_basis, double tol, const char* what) {
  if (range_basis.cols() == 0) return 0;
  const NullInfo n = null_space(a * range_basis, tol, what);
  return static_cast<int>(range_basis.cols()) - n.rank;
}

}  // namespace

KernelReport kernel_diagnostics(const Superoperator& s, const CMatrix& sector, double tol) {
  const int d = s.hilbert_dim();
  KernelReport rep;
  const NullInfo ka = null_space(s.matrix, tol, "kernel_diagnostics(A)");
  const CMatrix z0 = hamiltonian_part(s.spec.H);
  const NullInfo kz = null_space(z0, tol, "kernel_diagnostics(Z0)");
  rep.dim_ker_A = d * d - ka.rank;
  rep.dim_ker_Z0 = d * d - kz.rank;
  for (Eigen::Index c = 0; c < ka.null_basis.cols(); ++c) {
    const CMatrix rho = unvectorize(ka.null_basis.col(c), d);
    rep.inclusion_residual = std::max(rep.inclusion_residual, norm2(comm(s.spec.H, rho)));
    for (const auto& b : s.spec.B) rep.inclusion_residual = std::max(rep.inclusion_residual, norm2(comm(rho, b.adjoint())));
  }
  rep.inclusion = rep.inclusion_residual <= 1e-8;
  rep.equal = rep.inclusion && rep.dim_ker_A == rep.dim_ker_Z0;

  const std::vector<CMatrix> qs = eigenprojections(s.spec.H);
  for (const auto& b : s.spec.B) {
    CMatrix fb = CMatrix::Zero(d, d);
    for (const auto& q : qs) fb += (q * b).trace() / q.trace() * q;
    rep.dephasing_residual = std::max(rep.dephasing_residual, norm2(b - fb));
  }
  rep.dephasing = rep.dephasing_residual <= 1e-10;

  if (sector.size()) {
    if (sector.rows() != d || sector.cols() != d) throw DimensionError("kernel_diagnostics: sector has the wrong shape");
    rep.has_sector = true;
    const ThinFactor tf = thin_factor(sector);
    // operators X rho X^* with rho arbitrary on the sector: basis kron(conj X, X)
    const CMatrix basis = kron(tf.X.conjugate(), tf.X);
    rep.sector_ker_A = kernel_dim_on(s.matrix, basis, tol, "kernel_diagnostics(sector A)");
    rep.sector_ker_Z0 = kernel_dim_on(z0, basis, tol, "kernel_diagnostics(sector Z0)");
    rep.sector_equal = rep.sector_ker_A == rep.sector_ker_Z0;
  }
  return rep;
}

OperatorFamily lindblad_family(SpecSampler specs, std::string name) {
  const LindbladSpec s0 = specs(0.0);
  const int d = s0.dim();
  Sampler a = [specs](double t) { return build_lindblad(specs(t)).matrix; };
  return OperatorFamily(d * d, a, nullptr, Smoothness::C1, std::move(name));
}

CMatrix conjugation_generator(const CMatrix& c) {
  const int d = static_cast<int>(c.rows());
  const CMatrix id = CMatrix::Identity(d, d);
  const cplx i(0.0, 1.0);
  return kron(id, i * c) - kron(i * c.transpose(), id);
}

OperatorFamily lindblad_rotated(const LindbladSpec& s, const CMatrix& c, std::string name) {
  if (!is_hermitian(c, 1e-12 * std::max(1.0, c.norm()))) throw ParameterError("lindblad_rotated: C must be Hermitian");
  const Superoperator a0 = build_lindblad(s);
  return similarity_family(constant_family(a0.matrix, name), conjugation_generator(c)).with_name(name);
}

LindbladSpec dephasing_qubit() {
  LindbladSpec s;
  s.H = CMatrix::Zero(2, 2);
  s.H(1, 1) = 1.0;
  CMatrix b = CMatrix::Zero(2, 2);
  b(0, 0) = 1.0;
  b(1, 1) = -1.0;
  s.B.push_back(b);
  return s;
}

NonDephasingExample non_dephasing_example(int continuum) {
  if (continuum < 2) throw ParameterError("non_dephasing_example: need at least two continuum levels");
  // designated eigenspaces: 0 (twice) and 3; the rest is an emulated band in [1, 2]
  const int m = 3;
  const int d = m + continuum;
  NonDephasingExample ex;
  ex.spec.H = CMatrix::Zero(d, d);
  ex.spec.H(2, 2) = 3.0;
  for (int k = 0; k < continuum; ++k) ex.spec.H(m + k, m + k) = 1.0 + static_cast<double>(k) / (continuum - 1);
  ex.phi = CVector::Zero(d);
  for (int k = 0; k < continuum; ++k) ex.phi(m + k) = 1.0 / std::sqrt(static_cast<double>(continuum));
  CVector hp = ex.spec.H * ex.phi;
  ex.psi = hp / hp.norm();
  CMatrix b = CMatrix::Zero(d, d);
  b(0, 0) = b(1, 1) = cplx(0.3, 0.1);
  b(2, 2) = cplx(0.7, 0.0);
  b += 1.0 * ex.psi * ex.psi.adjoint();
  ex.spec.B.push_back(b);
  ex.sector = CMatrix::Zero(d, d);
  for (int k = 0; k < m; ++k) ex.sector(k, k) = 1.0;
  return ex;
}

}  // namespace adiabatica
