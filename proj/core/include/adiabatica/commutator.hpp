#pragma once

#include <functional>
#include <string>
#include <vector>

#include "adiabatica/opfamily.hpp"
#include "adiabatica/spectral.hpp"

namespace adiabatica {

// Q_n = P' convolved with a (1 - u^2)^3 bump of half-width 1/n; the window
// is clipped to [0, 1] and renormalised near the ends.
class MollifiedDerivative {
 public:
  MollifiedDerivative(ProjectionFamily p, int n);
  int n() const { return n_; }
  CMatrix operator()(double t) const;

 private:
  ProjectionFamily p_;
  int n_;
};

enum class Construction { contour, pole_form, approximate, multi_gap, multi_nogap };
const char* to_string(Construction c);

struct CommutatorSample {
  double t = 0.0;
  CMatrix B;
  CMatrix target;    // [P', P], [Q_n, P], K or K_n
  CMatrix residual;  // B A - A B + C - target
  CMatrix c_plus, c_minus;
  double residual_norm = 0.0;
};

class CommutatorSolution {
 public:
  using Eval = std::function<CommutatorSample(double)>;
  CommutatorSolution(Construction c, Eval eval, std::vector<double> deltas = {}, int n = 0)
      : construction_(c), eval_(std::move(eval)), deltas_(std::move(deltas)), n_(n) {}

  Construction construction() const { return construction_; }
  const std::vector<double>& deltas() const { return deltas_; }
  int mollifier_index() const { return n_; }
  CommutatorSample at(double t) const { return eval_(t); }
  std::vector<CommutatorSample> probe(const std::vector<double>& grid) const;
  double max_residual(const std::vector<double>& grid) const;
  // t,residual_norm,C_plus_norm,C_minus_norm
  static std::string csv(const std::vector<CommutatorSample>& samples);

 private:
  Construction construction_;
  Eval eval_;
  std::vector<double> deltas_;
  int n_;
};

// (1/2 pi i) oint (z - A)^{-1} X (z - A)^{-1} dz on a circle; doubles the
// nodes until the result is stable to 1e-12.
CMatrix contour_sandwich(const CMatrix& a, const CMatrix& x, const Contour& c);

using ContourPicker = std::function<Contour(double)>;

CommutatorSolution solve_gap_contour(const OperatorFamily& a, const ProjectionFamily& p, ContourPicker contours);
// Circle around lambda(t) with half the distance to the rest of the spectrum.
CommutatorSolution solve_gap_contour(const OperatorFamily& a, const ProjectionFamily& p, const SpectralCurve& curve);

// ((lambda - A)(1 - P) + P)^{-1} (1 - P)
CMatrix reduced_resolvent_at(const CMatrix& a, const CMatrix& p, cplx lambda);

CommutatorSolution solve_gap_pole(const OperatorFamily& a, const ProjectionFamily& p, ScalarCurve lambda, int m0);

// deltas = (delta_1, ..., delta_m0); entries outside (0, delta0] are clamped.
CommutatorSolution solve_nogap(const OperatorFamily& a, const ProjectionFamily& p, const SpectralCurve& curve, int n,
                               std::vector<double> deltas);

enum class Schedule { quantitative, qualitative };
const char* to_string(Schedule s);
Schedule parse_schedule(const std::string& s);

// Returns (delta_1, ..., delta_m0). eta is clamped to eta(delta) >= delta.
std::vector<double> delta_schedule(double eps, int m0, const std::function<double(double)>& eta,
                                   Schedule s = Schedule::quantitative, double delta0 = 1.0);

struct MultiCurve {
  SpectralCurve curve;
  ProjectionFamily P;
};

struct MultiMode {
  bool gap = true;
  int n = 0;                   // nogap only
  std::vector<double> deltas;  // nogap only, shared by all curves
};

// Target K = 1/2 sum_{j <= r+1} [P_j', P_j] with P_{r+1} = 1 - sum P_j.
CommutatorSolution solve_multi(const OperatorFamily& a, const std::vector<MultiCurve>& curves, const MultiMode& mode,
                               const std::vector<double>& probe_grid);

}  // namespace adiabatica
