#pragma once

#include <string>
#include <vector>

#include "adiabatica/opfamily.hpp"

namespace adiabatica {

enum class Integrator { cf4, rk4 };
const char* to_string(Integrator i);

inline constexpr double kDefaultTolStep = 1e-9;
inline constexpr long kMaxSteps = 2'000'000;
inline constexpr double kMinStep = 1e-12;

struct PropagateOptions {
  double tol_step = kDefaultTolStep;
  Integrator integrator = Integrator::cf4;
  double rk4_step = 1e-4;    // fixed step for the RK4 oracle
  bool keep_steps = false;   // store U(t_{k+1}, t_k)
  bool use_frame = true;     // integrate in the co-moving frame when available
  CMatrix basis;             // optional n x r right factor; empty means identity
};

// U(t_k, t_0) (times the basis when one was given) on the output grid.
struct PropagatorTable {
  std::vector<double> t;
  std::vector<CMatrix> U;
  std::vector<CMatrix> steps;
  std::vector<double> step_error;  // accepted local error estimate per interval
  Integrator integrator = Integrator::cf4;
  double eps = 1.0;
  long substeps = 0;
  bool framed = false;
  bool exact = false;  // constant co-moving generator, no time stepping
  CMatrix basis;       // right factor the table was applied to (empty: identity)

  size_t size() const { return t.size(); }
  int dim() const { return U.empty() ? 0 : static_cast<int>(U.front().rows()); }
  // U(t_k, t_j) from stored steps; needs keep_steps.
  CMatrix between(size_t k, size_t j) const;
  std::string csv_summary() const;
  void write_binary(const std::string& path) const;
  static PropagatorTable read_binary(const std::string& path);
};

// x' = (1/eps) A(t) x
PropagatorTable propagate(const OperatorFamily& a, double eps, const std::vector<double>& grid,
                          const PropagateOptions& opt = {});
// x' = ((1/eps) A(t) + [P'(t), P(t)]) x
PropagatorTable propagate_intertwined(const OperatorFamily& a, const ProjectionFamily& p, double eps,
                                      const std::vector<double>& grid, const PropagateOptions& opt = {});
// x' = ((1/eps) A(t) P(t) + [P'(t), P(t)]) x
PropagatorTable propagate_projected(const OperatorFamily& a, const ProjectionFamily& p, double eps,
                                    const std::vector<double>& grid, const PropagateOptions& opt = {});
// eps-free x' = K(t) x for an arbitrary generator sampler.
PropagatorTable propagate_generator(const Sampler& g, const std::vector<double>& grid,
                                    const PropagateOptions& opt = {});

struct DeviationProfile {
  std::vector<double> t;
  std::vector<double> value;
  double sup = 0.0;
};

// ||(U_A(t) - U_B(t)) R|| per grid point; R empty means no right factor.
DeviationProfile deviation(const PropagatorTable& a, const PropagatorTable& b, const CMatrix& right = CMatrix());

// sup_t ||P(t) V(t, t0) - V(t, t0) P(t0)|| / max(1, ||V(t, t0)||), so growing
// evolutions are judged relative to their size.
double adiabaticity_residual(const PropagatorTable& v, const ProjectionFamily& p, int max_points = 0);

}  // namespace adiabatica
