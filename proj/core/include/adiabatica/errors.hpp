#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace adiabatica {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

// Pivot below the singularity threshold; carries the offending magnitude.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double pivot)
      : Error(what), pivot_(pivot) {}
  double pivot() const noexcept { return pivot_; }

 private:
  double pivot_;
};

class ReorderError : public Error {
 public:
  ReorderError(const std::string& what, std::complex<double> selected,
               std::complex<double> other)
      : Error(what), selected_(selected), other_(other) {}
  std::complex<double> selected() const noexcept { return selected_; }
  std::complex<double> other() const noexcept { return other_; }

 private:
  std::complex<double> selected_, other_;
};

class ContourError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ClusterError : public Error {
 public:
  ClusterError(const std::string& what, std::complex<double> neighbour)
      : Error(what), neighbour_(neighbour) {}
  std::complex<double> neighbour() const noexcept { return neighbour_; }

 private:
  std::complex<double> neighbour_;
};

class RankAmbiguityError : public Error {
 public:
  using Error::Error;
};

// The ray lambda + delta e^{i theta} met the spectrum.
class ResolventError : public Error {
 public:
  ResolventError(const std::string& what, double t, double delta)
      : Error(what), t_(t), delta_(delta) {}
  double t() const noexcept { return t_; }
  double delta() const noexcept { return delta_; }

 private:
  double t_, delta_;
};

class StiffnessError : public Error {
 public:
  using Error::Error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

class RegistryError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class StructureError : public Error {
 public:
  using Error::Error;
};

class ProjectionError : public Error {
 public:
  using Error::Error;
};

class DephasingError : public Error {
 public:
  using Error::Error;
};

class DenominatorError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace adiabatica
