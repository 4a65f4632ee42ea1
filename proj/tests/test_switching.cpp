#include <doctest.h>

#include <algorithm>

#include "adiabatica/switching.hpp"

using namespace adiabatica;

namespace {

const cplx kI(0.0, 1.0);

// eigenvalues of diag(0, 0, 1, 2) + h for the coupling in degenerate_example(),
// from numpy.linalg.eigvalsh
constexpr double kPerturbed[] = {-0.23139837, 0.30712149, 1.11527259, 2.00900429};

CVector unit(int n, int k) {
  CVector v = CVector::Zero(n);
  v(k) = 1.0;
  return v;
}

}  // namespace

TEST_SUITE("switching") {

TEST_CASE("switching functions") {
  const SwitchingSetup s = degenerate_example();
  CHECK(s.kappa(0.0) == doctest::Approx(1.0));
  CHECK(s.kappa(-1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(s.dkappa(-2.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(s.kappa(-s.T) <= 1.01 * s.tail_tol);

  const SwitchingSetup q = make_switching(s.A0, s.V, KappaKind::smoothstep, 1e-8, 4.0);
  CHECK(q.kappa(-4.0) == 0.0);
  CHECK(q.kappa(-5.0) == 0.0);
  CHECK(q.kappa(-2.0) == doctest::Approx(0.5));
  CHECK(q.kappa(0.0) == doctest::Approx(1.0));
  CHECK(q.dkappa(0.0) == doctest::Approx(0.0));
  CHECK(interaction_horizon(q, 1e-3) == 4.0);
  // the exp horizon grows like log(1/eps)
  CHECK(interaction_horizon(s, 1e-3) - interaction_horizon(s, 1e-2) == doctest::Approx(std::log(10.0)));
}

TEST_CASE("setup validation and JSON") {
  const SwitchingSetup s = degenerate_example();
  CHECK_THROWS_AS(make_switching(s.A0, CMatrix::Identity(4, 4), KappaKind::exp), ParameterError);
  CHECK_THROWS_AS(make_switching(s.A0, CMatrix::Zero(3, 3), KappaKind::exp), DimensionError);
  const SwitchingSetup j = switching_from_json(
      R"({"A0": {"re": [[0, 0], [0, 0]], "im": [[0, 0], [0, 1]]},
          "V": {"re": [[0, 0.1], [-0.1, 0]]}, "kappa": "smoothstep", "params": {"width": 3}})");
  CHECK(j.dim() == 2);
  CHECK(j.kind == KappaKind::smoothstep);
  CHECK(j.width == 3.0);
  CHECK_THROWS_AS(switching_from_json(R"({"A0": {"re": [[0]]}})"), ConfigError);
}

TEST_CASE("eigencurve continuation splits the degenerate level by the compressed coupling") {
  const SwitchingSetup s = degenerate_example();
  const CurveFrame f = continue_eigencurves(s);
  REQUIRE(f.P_start.size() == 4);
  CHECK(f.collisions == 0);
  std::vector<double> ends;
  for (const cplx& l : f.lambda_end) {
    CHECK(std::abs(l.real()) < 1e-12);
    ends.push_back(l.imag());
  }
  std::sort(ends.begin(), ends.end());
  for (int k = 0; k < 4; ++k) CHECK(ends[k] == doctest::Approx(kPerturbed[k]).epsilon(1e-7));
  for (size_t j = 0; j < 4; ++j) {
    CHECK((f.P_start[j] * f.P_start[j] - f.P_start[j]).norm() < 1e-10);
    CHECK((f.P_end[j] - f.P_end[j].adjoint()).norm() < 1e-10);
  }
}

TEST_CASE("Kato generator and the adiabatic limit") {
  const SwitchingSetup s = degenerate_example();
  const CMatrix k = kato_generator(s, 0.5);
  CHECK(is_skew_hermitian(k, 1e-10));
  const CMatrix w = adiabatic_limit(s);
  CHECK((w.adjoint() * w - CMatrix::Identity(4, 4)).norm() < 1e-9);
  // W carries each P_j(-inf) onto P_j(0)
  const CurveFrame f = continue_eigencurves(s);
  for (size_t j = 0; j < 4; ++j) CHECK((w * f.P_start[j] - f.P_end[j] * w).norm() < 1e-6);
}

TEST_CASE("exact shifts match the dense eigensolver") {
  const SwitchingSetup s = degenerate_example();
  CHECK(std::abs(exact_shift(s, unit(4, 2)) - kI * (kPerturbed[2] - 1.0)) < 1e-7);
  CHECK(std::abs(exact_shift(s, unit(4, 3)) - kI * (kPerturbed[3] - 2.0)) < 1e-7);
  // e_0 straddles the two split curves
  CHECK_THROWS_AS(exact_shift(s, unit(4, 0)), ProjectionError);
}

TEST_CASE("projective distance") {
  const CVector a = unit(3, 0);
  CHECK(projective_distance(a, kI * a) == doctest::Approx(0.0));
  CHECK(projective_distance(a, unit(3, 1)) == doctest::Approx(1.0));
  CVector b = a + unit(3, 1);
  CHECK(projective_distance(a, b) == doctest::Approx(std::sqrt(0.5)));
  CHECK(projective_distance(a, CVector::Zero(3)) == 1.0);
}

TEST_CASE("interaction propagator: unitary and horizon-stable") {
  const SwitchingSetup s = degenerate_example();
  const InteractionResult r = interaction_propagator(s, 0.05);
  CHECK((r.UI.adjoint() * r.UI - CMatrix::Identity(4, 4)).norm() < 1e-8);
  CHECK(r.doubling_diff >= 0.0);
  CHECK(r.doubling_diff < 1e-6);
  CHECK(r.T == doctest::Approx(interaction_horizon(s, 0.05)));
  CHECK_THROWS_AS(interaction_propagator(s, 0.0), ParameterError);
}

TEST_CASE("Gell-Mann-Low ratio on the nondegenerate level") {
  const SwitchingSetup s = degenerate_example();
  const CVector x = unit(4, 3);
  const GmlResult g = gml_ratio(s, 1e-2, x, x);
  CHECK(g.curve >= 0);
  CHECK(g.target_residual < 1e-7);
  CHECK(g.projective < 0.05);
  const cplx lg = energy_shift(s, 1e-2, x, x, ShiftFormula::log_derivative);
  const cplx ex = energy_shift(s, 1e-2, x, x, ShiftFormula::exp_switch);
  const cplx exact = exact_shift(s, x);
  CHECK(std::abs(lg - exact) < 0.05 * std::abs(exact));
  CHECK(std::abs(lg - ex) < 1e-3);
  CHECK_THROWS_AS(gml_ratio(s, 1e-2, unit(4, 0), unit(4, 0)), ProjectionError);
}

}  // TEST_SUITE
