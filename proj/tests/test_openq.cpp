#include <doctest.h>

#include <limits>
#include <random>

#include "adiabatica/openq.hpp"
#include "adiabatica/spectral.hpp"
#include "helpers.hpp"

using namespace adiabatica;

namespace {

LindbladSpec random_spec(int d, int jumps, std::mt19937_64& rng) {
  LindbladSpec s;
  s.H = test::random_hermitian(d, rng, 1.0);
  // normal jump operators keep sum B B* = sum B* B
  for (int j = 0; j < jumps; ++j) {
    const CMatrix u = test::random_unitary(d, rng);
    const CMatrix g = test::random_matrix(d, rng, 1.0);
    s.B.push_back(u * CMatrix(g.diagonal().asDiagonal()) * u.adjoint());
  }
  return s;
}

}  // namespace

TEST_SUITE("openq") {

TEST_CASE("column stacking: vec(X rho Y) = (Y^T kron X) vec(rho)") {
  std::mt19937_64 rng(71);
  const CMatrix x = test::random_matrix(3, rng, 1.0);
  const CMatrix y = test::random_matrix(3, rng, 1.0);
  const CMatrix rho = test::random_matrix(3, rng, 1.0);
  CHECK((vectorize(x * rho * y) - kron(y.transpose(), x) * vectorize(rho)).norm() < 1e-13);
  CHECK((unvectorize(vectorize(rho), 3) - rho).norm() == 0.0);
  CHECK(vectorize(rho)(1) == rho(1, 0));
}

TEST_CASE("superoperator matrix reproduces the action on operators") {
  std::mt19937_64 rng(72);
  for (int k = 0; k < 5; ++k) {
    const LindbladSpec s = random_spec(3, 2, rng);
    const Superoperator sup = build_lindblad(s);
    const CMatrix rho = test::random_matrix(3, rng, 1.0);
    CHECK((unvectorize(sup.matrix * vectorize(rho), 3) - apply_lindblad(s, rho)).norm() < 1e-12);
    CHECK((hamiltonian_part(s.H) * vectorize(rho) - vectorize(CMatrix(cplx(0, -1) * comm(s.H, rho)))).norm() <
          1e-12);
  }
}

TEST_CASE("trace preservation and complete positivity") {
  std::mt19937_64 rng(73);
  for (int k = 0; k < 10; ++k) {
    const Superoperator sup = build_lindblad(random_spec(3, 1 + k % 3, rng));
    CHECK(trace_functional_norm(sup) <= 1e-9);
    for (double t : {0.1, 1.0, 5.0}) CHECK(choi_min_eigenvalue(sup, t) >= -1e-9);
  }
  // reversed dephasing grows coherences: Choi eigenvalues 1 -+ e^{2t}
  Superoperator neg = build_lindblad(dephasing_qubit());
  neg.matrix = -neg.matrix;
  CHECK(choi_min_eigenvalue(neg, 0.1) == doctest::Approx(1.0 - std::exp(0.2)).epsilon(1e-9));
}

TEST_CASE("Schatten norms of diag(3, 4)") {
  CMatrix r = CMatrix::Zero(2, 2);
  r(0, 0) = 3.0;
  r(1, 1) = 4.0;
  CHECK(schatten_norm(r, 1.0) == doctest::Approx(7.0));
  CHECK(schatten_norm(r, 2.0) == doctest::Approx(5.0));
  CHECK(schatten_norm(r, std::numeric_limits<double>::infinity()) == doctest::Approx(4.0));
}

TEST_CASE("dephasing qubit: ker A = ker Z0") {
  const KernelReport k = kernel_diagnostics(build_lindblad(dephasing_qubit()));
  CHECK(k.dim_ker_A == 2);
  CHECK(k.dim_ker_Z0 == 2);
  CHECK(k.inclusion);
  CHECK(k.equal);
  CHECK(k.dephasing);
}

TEST_CASE("non-dephasing example: kernels agree on the point-spectrum sector") {
  const NonDephasingExample ex = non_dephasing_example(6);
  const KernelReport k = kernel_diagnostics(build_lindblad(ex.spec), ex.sector);
  CHECK_FALSE(k.dephasing);
  CHECK(k.dephasing_residual > 1e-3);
  CHECK(k.inclusion);
  CHECK(k.inclusion_residual < 1e-9);
  REQUIRE(k.has_sector);
  CHECK(k.sector_equal);
  CHECK(k.sector_ker_A == 5);  // 2x2 block on the double eigenvalue plus the level at 3
  CHECK(k.sector_ker_Z0 == 5);
  // B is normal and psi lies in the emulated band
  const CMatrix& b = ex.spec.B[0];
  CHECK((b * b.adjoint() - b.adjoint() * b).norm() < 1e-12);
  CHECK((ex.sector * ex.psi).norm() < 1e-14);
  CHECK_THROWS_AS(non_dephasing_example(1), ParameterError);
}

TEST_CASE("RAGE projection equals the weakly associated projection of Z0 at 0") {
  std::mt19937_64 rng(74);
  CMatrix h = CMatrix::Zero(4, 4);
  h(0, 0) = h(1, 1) = 1.0;
  h(2, 2) = -0.5;
  h(3, 3) = 2.0;
  const CMatrix u = test::random_unitary(4, rng);
  h = u * h * u.adjoint();
  const CMatrix r = rage_projection(h);
  const WeakProjection w = weakly_associated_projection(hamiltonian_part(h), 0.0);
  CHECK(w.m == 1);
  CHECK(w.alg_mult == 6);
  CHECK((r - w.P).norm() < 1e-8);
  CHECK((r * r - r).norm() < 1e-12);
  CHECK(eigenprojections(h).size() == 3);
}

TEST_CASE("rotated Lindblad family matches a direct rebuild") {
  std::mt19937_64 rng(75);
  const LindbladSpec s = random_spec(2, 1, rng);
  const CMatrix c = test::random_hermitian(2, rng, 1.0);
  const OperatorFamily a = lindblad_rotated(s, c);
  const cplx i(0.0, 1.0);
  for (double t : {0.0, 0.3, 1.0}) {
    const CMatrix e = expm(-i * t * c);
    LindbladSpec r = s;
    r.H = e * s.H * e.adjoint();
    for (auto& b : r.B) b = e * b * e.adjoint();
    CHECK((a(t) - build_lindblad(r).matrix).norm() < 1e-10);
  }
  const OperatorFamily g = lindblad_family([&](double t) {
    LindbladSpec r = s;
    r.H = (1.0 + t) * s.H;
    return r;
  });
  CHECK((g.derivative(0.5) - hamiltonian_part(s.H)).norm() < 1e-6);
}

TEST_CASE("JSON spec parsing") {
  const LindbladSpec s = lindblad_spec_from_json(
      R"({"H": {"re": [[1, 0], [0, -1]]}, "B": [{"re": [[0, 1], [1, 0]], "im": [[0, 0], [0, 0]]}], "p": 1.5})");
  CHECK(s.dim() == 2);
  CHECK(s.B.size() == 1);
  CHECK(s.p == 1.5);
  CHECK_THROWS_AS(lindblad_spec_from_json("{"), ConfigError);
  CHECK_THROWS_AS(lindblad_spec_from_json(R"({"H": {"re": [[0, 0], [0, 0]]}, "B": [{"re": [[0, 1], [0, 0]]}]})"), DephasingError);
  CHECK_THROWS_AS(lindblad_spec_from_json(R"({"H": {"re": [[1, 0], [0]]}})"), ConfigError);
  CHECK_THROWS_AS(lindblad_spec_from_json(R"({"H": {"re": [[1]]}, "p": 1.0})"), ConfigError);
}

TEST_CASE("semigroup invariants on random generators") {
  std::mt19937_64 rng(76);
  for (int k = 0; k < 5; ++k) {
    const Superoperator sup = build_lindblad(random_spec(3, 2, rng));
    Eigen::ComplexEigenSolver<CMatrix> es(sup.matrix, false);
    CHECK(es.eigenvalues().real().maxCoeff() <= 1e-9);
    const CMatrix rho = test::random_hermitian(3, rng, 1.0);
    for (double s : {0.5, 5.0}) {
      const CMatrix out = unvectorize(expm(s * sup.matrix) * vectorize(rho), 3);
      CHECK(std::abs(out.trace() - rho.trace()) <= 1e-9);
      CHECK((out - out.adjoint()).norm() <= 1e-9);
    }
  }
}

TEST_CASE("p = 2: ker A is orthogonal to ran A for weakly dephasing generators") {
  std::mt19937_64 rng(77);
  for (const Superoperator& sup : {build_lindblad(dephasing_qubit()), build_lindblad(random_spec(3, 1, rng)),
                                    build_lindblad(non_dephasing_example(4).spec)}) {
    const Eigen::Index n = sup.matrix.rows();
    Eigen::JacobiSVD<CMatrix> svd(sup.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const int r = numerical_rank(sup.matrix);
    const CMatrix ker = svd.matrixV().rightCols(n - r);
    const CMatrix ran = svd.matrixU().leftCols(r);
    CHECK(n - r >= 1);
    CHECK((ker.adjoint() * ran).norm() < 1e-8);
  }
}

TEST_CASE("RAGE projection: trivial cases") {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = 2.0;
  std::mt19937_64 rng(78);
  const CMatrix rho = test::random_matrix(2, rng, 1.0);
  const CMatrix diag = rho.diagonal().asDiagonal();
  CHECK((unvectorize(rage_projection(h) * vectorize(rho), 2) - diag).norm() < 1e-14);
  CHECK((rage_projection(CMatrix::Identity(3, 3)) - CMatrix::Identity(9, 9)).norm() < 1e-14);
  // simple spectrum with dephasing noise: ker Z0 = diagonal matrices
  const KernelReport k = kernel_diagnostics(build_lindblad(dephasing_qubit()));
  CHECK(k.dim_ker_Z0 == 2);
}

}  // TEST_SUITE
