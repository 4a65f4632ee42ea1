#pragma once

#include <string>
#include <vector>

#include "adiabatica/evolve.hpp"

namespace adiabatica {

enum class KappaKind { exp, smoothstep };
const char* to_string(KappaKind k);

// A(t) = A0 + kappa(t) V on (-inf, 0], both skew-Hermitian.
struct SwitchingSetup {
  CMatrix A0;
  CMatrix V;
  KappaKind kind = KappaKind::exp;
  double width = 10.0;     // smoothstep ramps up on [-width, 0]
  double tail_tol = 1e-8;
  double T = 0.0;          // horizon with both kappa tails below tail_tol

  int dim() const { return static_cast<int>(A0.rows()); }
  double kappa(double t) const;
  double dkappa(double t) const;
  CMatrix at(double t) const { return A0 + kappa(t) * V; }
};

SwitchingSetup make_switching(const CMatrix& a0, const CMatrix& v, KappaKind kind = KappaKind::exp,
                              double tail_tol = 1e-8, double width = 10.0);
// {"A0": {"re","im"}, "V": {...}, "kappa": "exp"|"smoothstep", "params": {"tail_tol", "width"}}
SwitchingSetup switching_from_json(const std::string& text);

// A0 = i diag(0, 0, 1, 2) with a small coupling whose compression to the
// degenerate eigenspace has distinct eigenvalues.
SwitchingSetup degenerate_example();

// Horizon for the interaction-picture integral at this eps: the generator is
// (1/eps) A^I, so the neglected tail is ||V|| int kappa / eps.
double interaction_horizon(const SwitchingSetup& s, double eps);

struct InteractionResult {
  PropagatorTable table;  // U^I(t, -T) on the output grid
  CMatrix UI;             // U^I(0, -T)
  double T = 0.0;
  double doubling_diff = -1.0;  // ||U^I(0,-T) - U^I(0,-2T)||, -1 when not checked
};

InteractionResult interaction_propagator(const SwitchingSetup& s, double eps, double T = 0.0, double tol = 1e-10,
                                         bool check_doubling = true, int points = 201);

// Eigenprojections of A0 + u V (u > 0 small limit) grouped per curve; the
// degenerate eigenspaces of A0 are split by the compression of V.
struct CurveFrame {
  std::vector<CMatrix> P_start;  // P_j(-inf)
  std::vector<CMatrix> P_end;    // P_j(0), matched by continuation
  std::vector<cplx> lambda_start;
  std::vector<cplx> lambda_end;
  int collisions = 0;  // samples where two tracked curves met
};
CurveFrame continue_eigencurves(const SwitchingSetup& s, int samples = 400);

// 1/2 sum_j [P_j'(u), P_j(u)] along A0 + u V, u in (0, 1].
CMatrix kato_generator(const SwitchingSetup& s, double u);
// W(0, -inf) via the kappa substitution: evolution of kato_generator on [0, 1].
CMatrix adiabatic_limit(const SwitchingSetup& s, double tol = 1e-11);

double projective_distance(const CVector& a, const CVector& b);

struct GmlResult {
  CVector ratio;    // U^I x / <x', U^I x>
  CVector target;   // W x / <x', W x>
  double difference = 0.0;
  double projective = 0.0;
  double target_residual = 0.0;  // ||(A(0) - lambda_j(0)) target|| / ||target||
  cplx denominator_W;
  int curve = -1;
};

GmlResult gml_ratio(const SwitchingSetup& s, double eps, const CVector& x, const CVector& xp, double tol = 1e-10);

enum class ShiftFormula { log_derivative, exp_switch };
const char* to_string(ShiftFormula f);

cplx energy_shift(const SwitchingSetup& s, double eps, const CVector& x, const CVector& xp, ShiftFormula f,
                  double tol = 1e-10);
// lambda_j(0) - lambda_j(-inf) for the curve through x
cplx exact_shift(const SwitchingSetup& s, const CVector& x);

// V^I(0, -T) x for the intertwined system (1/eps) A + K, used to check the
// scalar-phase factorisation against W.
CVector intertwined_interaction(const SwitchingSetup& s, double eps, const CVector& x, double tol = 1e-10);

}  // namespace adiabatica
