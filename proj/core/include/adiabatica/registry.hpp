#pragma once

#include <map>
#include <string>
#include <vector>

#include "adiabatica/opfamily.hpp"

namespace adiabatica {

using ParamMap = std::map<std::string, double>;

struct ParamSpec {
  std::string name;
  double def = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool integer = false;
  std::string doc;
};

enum class RateKind { order_eps, little_o, power, non_adiabatic, trivial };

struct ExpectedRate {
  RateKind kind = RateKind::order_eps;
  double exponent = 1.0;  // used by power (and 1 for order_eps)
  std::string label() const;
};
ExpectedRate parse_expected_rate(const std::string& s);

enum class Metric { sup_norm, projected, leak };
const char* to_string(Metric m);
Metric parse_metric(const std::string& s);

struct ExampleInfo {
  std::string name;
  std::string description;
  std::string truncation_note;
  double floor_epsilon = 1e-5;  // below this the truncation stops emulating the limit object
  bool gapped = true;
  ExpectedRate expected;
  Metric metric = Metric::sup_norm;
  double eps_max = 1e-1;        // default sweep window
  double eps_min = 1e-3;
  int grid_points = 201;
  double c_fd = 1e3;            // finite-difference consistency constant
  double nominal_M0 = 0.0;      // 0 when the example promises no bound
  ParamMap params;
};

struct Example {
  OperatorFamily A;
  SpectralCurve curve;
  ProjectionFamily P;
  ExampleInfo info;
};

struct RegistryEntry {
  std::string name;
  std::vector<std::string> aliases;
  std::string description;
  std::vector<ParamSpec> params;
  ExpectedRate expected;
  Metric metric;
};

const std::vector<RegistryEntry>& registry();
const RegistryEntry& registry_entry(const std::string& name);
// Throws RegistryError on unknown names and ParameterError on bad params.
Example example(const std::string& name, const ParamMap& params = {});
std::string registry_manifest_json();

// Stern-Brocot breadth-first order of the rationals in [0,1], 0 and 1 first.
std::vector<double> stern_brocot_rationals(int count);

}  // namespace adiabatica
