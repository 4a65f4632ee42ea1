#pragma once

#include <string>
#include <utility>
#include <vector>

#include "adiabatica/opfamily.hpp"

namespace adiabatica {

struct Contour {
  cplx center;
  double radius = 1.0;
  int nodes = 32;  // starting count, doubled until stable
};

struct RieszResult {
  CMatrix P;
  int nodes = 0;
  double change = 0.0;  // last doubling difference
};

inline constexpr int kRieszMaxNodes = 4096;
inline constexpr double kRieszStable = 1e-12;

RieszResult riesz_projection_ex(const CMatrix& a, const Contour& c);
inline CMatrix riesz_projection(const CMatrix& a, const Contour& c) { return riesz_projection_ex(a, c).P; }

// Circle around lambda with radius half the distance to the rest of the
// spectrum; mult eigenvalues nearest lambda count as lambda itself.
Contour contour_around(const CMatrix& a, cplx lambda, int mult);

struct WeakProjection {
  CMatrix P;
  int m = 0;         // nilpotent order
  int alg_mult = 0;  // rank of P
};

// cluster_radius < 0 picks 1e-8 ||A||, widened to the Jordan splitting the
// rank test implies (see notes in the source).
WeakProjection weakly_associated_projection(const CMatrix& a, cplx lambda, double tol = kRankTol,
                                            double cluster_radius = -1.0);

// Smallest k with rank (A - lambda)^k == rank (A - lambda)^{k+1}.
int nilpotent_order(const CMatrix& a, cplx lambda, double tol = kRankTol);

enum class StabilityKind { contraction, M0 };

struct StabilityReport {
  StabilityKind kind;
  double value = 0.0;  // spectral abscissa of the Hermitian part, or r0
  bool pass = false;
};

StabilityReport check_stability(const OperatorFamily& a, StabilityKind kind, const std::vector<double>& grid);

// (z - A)^{-1}(1 - P); ResolventError when z hits the spectrum.
CMatrix reduced_resolvent(const CMatrix& a, const CMatrix& p, cplx z, double t = 0.0, double delta = 0.0);
cplx ray_point(const SpectralCurve& curve, double t, double delta);

struct ResolventSample {
  double t = 0.0;
  double delta = 0.0;
  double scaled_norm = 0.0;  // delta ||Rbar_delta(t)||
  double decay = 0.0;        // delta ||Rbar_delta(t) x|| for a fixed probe vector x
};

struct ResolventProbe {
  double M0 = 0.0;
  std::vector<ResolventSample> samples;
  std::vector<ResolventSample> violations;  // exceed nominal M0 by more than 5%
};

ResolventProbe probe_resolvent_estimate(const OperatorFamily& a, const SpectralCurve& curve,
                                        const ProjectionFamily& p, const std::vector<double>& deltas,
                                        const std::vector<double>& grid, double nominal_M0 = 0.0);

struct EtaPair {
  double plus = 0.0;
  double minus = 0.0;
  int panels = 0;
};

EtaPair compute_eta(const OperatorFamily& a, const SpectralCurve& curve, const ProjectionFamily& p, double delta,
                    double rel_tol = 1e-6);

struct SpectralRecord {
  double t = 0.0;
  cplx lambda;
  double gap = 0.0;
  int m = 0;
  double delta_min = 0.0;
  double M0_local = 0.0;
  CVector eigenvalues;
};

struct SpectralAnalysis {
  std::vector<SpectralRecord> records;
  double threshold = 0.0;
  double min_gap = 0.0;
  bool uniform_gap = false;
  std::vector<double> crossings;
  std::string to_csv() const;
};

// mult: how many eigenvalues near lambda(t) belong to lambda (defaults to
// rank P when P is given, else 1).
SpectralAnalysis gap_diagnostics(const OperatorFamily& a, const SpectralCurve& curve, const std::vector<double>& grid,
                                 const ProjectionFamily* p = nullptr, double threshold = 1e-2, int mult = 0);

}  // namespace adiabatica
