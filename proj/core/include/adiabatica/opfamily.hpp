#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adiabatica/matrixkit.hpp"

namespace adiabatica {

using Sampler = std::function<CMatrix(double)>;
using ScalarCurve = std::function<cplx(double)>;
using RealCurve = std::function<double(double)>;

enum class Smoothness { W11, W1inf, C1, C2 };
const char* to_string(Smoothness s);

inline constexpr double kFdStep = 1e-5;

// A(t) = e^{-Ct} A0(t) e^{Ct}; lets evolve integrate in the co-moving frame.
struct FrameForm {
  std::shared_ptr<const ExpFlow> flow;
  Sampler a0;
  Sampler da0;
  bool a0_constant = false;
  const CMatrix& C() const { return flow->generator(); }
};

// lambda(t) + alpha(t) N acting on the leading block of A0.
struct JordanStructure {
  ScalarCurve lambda;
  RealCurve alpha;
  CMatrix N;
};

class OperatorFamily {
 public:
  OperatorFamily() = default;
  OperatorFamily(int dim, Sampler a, Sampler da = nullptr, Smoothness s = Smoothness::C1,
                 std::string name = {}, std::string provenance = {});

  int dim() const { return dim_; }
  CMatrix operator()(double t) const;
  CMatrix derivative(double t) const;
  CMatrix fd_derivative(double t, double h = kFdStep) const;
  bool analytic_derivative() const { return static_cast<bool>(da_); }
  Smoothness smoothness() const { return smooth_; }
  const std::string& name() const { return name_; }
  const std::string& provenance() const { return provenance_; }
  const std::optional<FrameForm>& frame() const { return frame_; }
  const std::optional<JordanStructure>& jordan() const { return jordan_; }

  OperatorFamily with_frame(FrameForm f) const;
  OperatorFamily with_jordan(JordanStructure j) const;
  OperatorFamily with_name(std::string name, std::string provenance = {}) const;

 private:
  int dim_ = 0;
  Sampler a_, da_;
  Smoothness smooth_ = Smoothness::C1;
  std::string name_, provenance_;
  std::optional<FrameForm> frame_;
  std::optional<JordanStructure> jordan_;
};

OperatorFamily constant_family(const CMatrix& a, std::string name = "constant");
// t -> e^{-Ct} A0(t) e^{Ct} with its analytic derivative.
OperatorFamily similarity_family(const OperatorFamily& a0, const CMatrix& c);

struct ProjectionFrame {
  std::shared_ptr<const ExpFlow> flow;
  CMatrix P0;
};

class ProjectionFamily {
 public:
  ProjectionFamily() = default;
  ProjectionFamily(int rank, Sampler p, Sampler dp, Sampler ddp = nullptr);

  CMatrix operator()(double t) const { return p_(t); }
  CMatrix derivative(double t) const { return dp_(t); }
  bool has_second_derivative() const { return static_cast<bool>(ddp_); }
  CMatrix second_derivative(double t) const;
  int rank() const { return rank_; }
  int dim() const;
  bool weakly_associated() const { return weakly_associated_; }
  const std::optional<ProjectionFrame>& frame() const { return frame_; }
  // [P'(t), P(t)]
  CMatrix commutator_target(double t) const;

  ProjectionFamily with_frame(ProjectionFrame f) const;
  ProjectionFamily with_association(bool weakly) const;

 private:
  int rank_ = 0;
  Sampler p_, dp_, ddp_;
  bool weakly_associated_ = true;
  std::optional<ProjectionFrame> frame_;
};

ProjectionFamily constant_projection(const CMatrix& p0);
ProjectionFamily similarity_projection(const CMatrix& p0, const CMatrix& c);

struct SpectralCurve {
  ScalarCurve lambda;
  RealCurve theta;
  double delta0 = 1.0;
  int m0 = 1;
};

struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = true;
};
using InvariantReport = std::vector<InvariantCheck>;

bool all_pass(const InvariantReport& r);
std::string describe(const InvariantReport& r);

std::vector<double> uniform_grid(double a, double b, int points);

// c_fd bounds |fd - analytic| <= c_fd h^2 at h = 1e-4.
InvariantReport check_operator_family(const OperatorFamily& a, const std::vector<double>& grid,
                                      double c_fd = 1e3);
InvariantReport check_projection_family(const ProjectionFamily& p, const std::vector<double>& grid);
InvariantReport check_curve(const OperatorFamily& a, const SpectralCurve& curve,
                            const ProjectionFamily& p, const std::vector<double>& grid,
                            const std::vector<double>& deltas);

}  // namespace adiabatica
