#include "adiabatica/registry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace adiabatica {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

}  // namespace

std::string ExpectedRate::label() const {
  std::ostringstream os;
  switch (kind) {
    case RateKind::order_eps: return "O(eps)";
    case RateKind::little_o: return "o(1)";
    case RateKind::non_adiabatic: return "non-adiabatic";
    case RateKind::trivial: return "trivially adiabatic";
    case RateKind::power:
      os.precision(6);
      os << "rate-" << exponent;
      return os.str();
  }
  return "?";
}

ExpectedRate parse_expected_rate(const std::string& s) {
  if (s == "O(eps)") return {RateKind::order_eps, 1.0};
  if (s == "o(1)") return {RateKind::little_o, 0.0};
  if (s == "non-adiabatic") return {RateKind::non_adiabatic, 0.0};
  if (s == "trivially adiabatic" || s == "trivial") return {RateKind::trivial, 0.0};
  if (s.rfind("rate-", 0) == 0) {
    try {
      size_t used = 0;
      double e = std::stod(s.substr(5), &used);
      if (used == s.size() - 5 && e > 0) return {RateKind::power, e};
    } catch (const std::exception&) {
    }
  }
  throw ParameterError("unknown expected rate '" + s + "' (O(eps), o(1), rate-<alpha>, non-adiabatic, trivial)");
}

const char* to_string(Metric m) {
  switch (m) {
    case Metric::sup_norm: return "sup_norm";
    case Metric::projected: return "projected";
    case Metric::leak: return "leak";
  }
  return "?";
}

Metric parse_metric(const std::string& s) {
  if (s == "sup_norm") return Metric::sup_norm;
  if (s == "projected") return Metric::projected;
  if (s == "leak") return Metric::leak;
  throw ParameterError("unknown metric '" + s + "' (sup_norm, projected, leak)");
}

std::vector<double> stern_brocot_rationals(int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  std::vector<std::pair<long, long>> row = {{0, 1}, {1, 1}};
  out.push_back(0.0);
  if (count >= 2) out.push_back(1.0);
  while (static_cast<int>(out.size()) < count) {
    std::vector<std::pair<long, long>> next;
    next.reserve(row.size() * 2);
    for (size_t i = 0; i + 1 < row.size(); ++i) {
      next.push_back(row[i]);
      std::pair<long, long> m{row[i].first + row[i + 1].first, row[i].second + row[i + 1].second};
      next.push_back(m);
      if (static_cast<int>(out.size()) < count) out.push_back(static_cast<double>(m.first) / m.second);
    }
    next.push_back(row.back());
    row.swap(next);
  }
  return out;
}

namespace {

using Builder = Example (*)(const ParamMap&);

struct Resolved {
  const ParamMap& p;
  double operator()(const std::string& k) const { return p.at(k); }
  int i(const std::string& k) const { return static_cast<int>(std::lround(p.at(k))); }
};

CMatrix upper_shift(int d) {
  CMatrix n = CMatrix::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) n(i, i + 1) = 1.0;
  return n;
}

CMatrix lower_shift(int d) {
  CMatrix n = CMatrix::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) n(i + 1, i) = 1.0;
  return n;
}

CMatrix leading_indicator(int n, int r) {
  CMatrix p = CMatrix::Zero(n, n);
  for (int i = 0; i < r; ++i) p(i, i) = 1.0;
  return p;
}

void add_rotation(CMatrix& c, int i, int j, double w) {
  c(i, j) += w;
  c(j, i) -= w;
}

// A0 given by samplers, rotated by e^{Ct}; projection P0 transported alike.
Example rotated(int n, Sampler a0, Sampler da0, bool a0_constant, const CMatrix& c, const CMatrix& p0,
                Smoothness s, const std::string& name) {
  OperatorFamily base(n, std::move(a0), std::move(da0), s, name);
  if (a0_constant) {
    FrameForm fr;
    fr.flow = std::make_shared<const ExpFlow>(CMatrix::Zero(n, n));
    fr.a0 = [base](double t) { return base(t); };
    fr.da0 = [base](double t) { return base.derivative(t); };
    fr.a0_constant = true;
    base = base.with_frame(std::move(fr));
  }
  Example ex;
  ex.A = similarity_family(base, c);
  ex.P = similarity_projection(p0, c);
  return ex;
}

Example build_gap_uniform(const ParamMap& pm) {
  Resolved p{pm};
  const int d = p.i("d");
  const double gap = p("gap");
  const double omega = p("omega");
  const bool frozen = p.i("static_projection") != 0;
  const double a = 0.25;
  auto lam = [a](double t) { return cplx(-a * t * t, 0.5 + 0.5 * t); };
  auto alpha = [a](double t) { return a * t * t; };
  Sampler a0 = [=](double t) {
    CMatrix m = CMatrix::Zero(d, d);
    m(0, 0) = m(1, 1) = lam(t);
    m(0, 1) = alpha(t);
    for (int k = 0; k + 2 < d; ++k) m(k + 2, k + 2) = kI * (0.5 + 0.5 * t + gap + k);
    return m;
  };
  Sampler da0 = [=](double t) {
    CMatrix m = CMatrix::Zero(d, d);
    m(0, 0) = m(1, 1) = cplx(-2 * a * t, 0.5);
    m(0, 1) = 2 * a * t;
    for (int k = 0; k + 2 < d; ++k) m(k + 2, k + 2) = kI * 0.5;
    return m;
  };
  CMatrix c = CMatrix::Zero(d, d);
  if (!frozen) {
    add_rotation(c, 1, 2, omega);
    if (d >= 5) add_rotation(c, 0, 4, 0.5 * omega);
  }
  Example ex = rotated(d, a0, da0, false, c, leading_indicator(d, 2), Smoothness::C2, "gap_uniform");
  ex.A = ex.A.with_jordan({lam, alpha, upper_shift(2)});
  ex.curve = {lam, [](double) { return 0.0; }, 0.5 * gap, 2};
  ex.info.description = "Jordan block lambda+alpha N uniformly separated from imaginary levels, rotated frame";
  ex.info.gapped = true;
  ex.info.expected = frozen ? ExpectedRate{RateKind::trivial, 0.0} : ExpectedRate{RateKind::order_eps, 1.0};
  ex.info.metric = Metric::sup_norm;
  return ex;
}

Example build_gap_crossing(const ParamMap& pm) {
  Resolved p{pm};
  const int d = p.i("d");
  const double s = p("speed");
  const double omega = p("omega");
  auto lam = [s](double t) { return kI * (s * (2 * t - 1)); };
  Sampler a0 = [=](double t) {
    CMatrix m = CMatrix::Zero(d, d);
    m(0, 0) = lam(t);
    for (int k = 2; k < d; ++k) m(k, k) = kI * (s + 1.0 + (k - 2));
    return m;
  };
  Sampler da0 = [=](double) {
    CMatrix m = CMatrix::Zero(d, d);
    m(0, 0) = kI * (2 * s);
    return m;
  };
  CMatrix c = CMatrix::Zero(d, d);
  add_rotation(c, 0, 1, omega);
  add_rotation(c, 0, 2, 0.5 * omega);
  Example ex = rotated(d, a0, da0, false, c, leading_indicator(d, 1), Smoothness::C2, "gap_crossing");
  ex.curve = {lam, [](double) { return 0.0; }, 0.5, 1};
  ex.info.description = "simple imaginary eigenvalue crossing the level 0 once at t = 1/2";
  ex.info.gapped = false;
  ex.info.expected = {RateKind::little_o, 0.0};
  ex.info.metric = Metric::sup_norm;
  return ex;
}

Example build_nogap_dense_rationals(const ParamMap& pm) {
  Resolved p{pm};
  const int d = p.i("d");
  const int nd = p.i("D");
  const int n = d + nd;
  std::vector<double> q = stern_brocot_rationals(nd);
  for (double& v : q) v = -v;
  auto lam = [](double t) { return cplx(-t, 0.0); };
  auto alpha = [](double t) { return 0.5 * t * t; };
  const CMatrix nil = upper_shift(d);
  Sampler a0 = [=](double t) {
    CMatrix m = CMatrix::Zero(n, n);
    m.topLeftCorner(d, d) = lam(t) * CMatrix::Identity(d, d) + alpha(t) * nil;
    for (int k = 0; k < nd; ++k) m(d + k, d + k) = q[k];
    return m;
  };
  Sampler da0 = [=](double t) {
    CMatrix m = CMatrix::Zero(n, n);
    m.topLeftCorner(d, d) = -CMatrix::Identity(d, d) + t * nil;
    return m;
  };
  Example ex = rotated(n, a0, da0, false, lower_shift(n), leading_indicator(n, d), Smoothness::C2,
                       "nogap_dense_rationals");
  ex.A = ex.A.with_jordan({lam, alpha, nil});
  ex.curve = {lam, [](double) { return kPi / 2; }, 1.0, d};
  std::vector<double> sorted = q;
  std::sort(sorted.begin(), sorted.end());
  double spacing = 1.0;
  for (size_t i = 0; i + 1 < sorted.size(); ++i) spacing = std::min(spacing, sorted[i + 1] - sorted[i]);
  ex.info.description = "Jordan block at -t against the first D rationals of [-1,0], right-shift frame";
  ex.info.truncation_note =
      "dense point spectrum cut to D Stern-Brocot rationals; lambda(t) crosses each of them once, "
      "minimal level spacing sets floor_epsilon";
  ex.info.floor_epsilon = spacing;
  ex.info.gapped = false;
  ex.info.expected = {RateKind::little_o, 0.0};
  ex.info.metric = Metric::projected;
  ex.info.eps_min = std::max(spacing, 1e-3);
  ex.info.c_fd = 1e4;
  return ex;
}

Example build_nogap_shift(const ParamMap& pm) {
  Resolved p{pm};
  const int d = p.i("d");
  const int nd = p.i("D");
  const int n = d + nd;
  auto vt = [](double t) { return 0.5 * kPi * (1.0 + t); };
  auto lam = [vt](double t) { return cplx(-1.0, 0.0) + std::polar(1.0, vt(t)); };
  auto alpha = [vt](double t) { return 0.5 * (1.0 - std::cos(vt(t))); };
  const CMatrix nil = upper_shift(d);
  const CMatrix sh = lower_shift(nd) - CMatrix::Identity(nd, nd);
  Sampler a0 = [=](double t) {
    CMatrix m = CMatrix::Zero(n, n);
    m.topLeftCorner(d, d) = lam(t) * CMatrix::Identity(d, d) + alpha(t) * nil;
    m.bottomRightCorner(nd, nd) = sh;
    return m;
  };
  Sampler da0 = [=](double t) {
    CMatrix m = CMatrix::Zero(n, n);
    const double w = 0.5 * kPi;
    m.topLeftCorner(d, d) = (kI * w * std::polar(1.0, vt(t))) * CMatrix::Identity(d, d) +
                            (0.5 * w * std::sin(vt(t))) * nil;
    return m;
  };
  CMatrix c = CMatrix::Zero(n, n);
  add_rotation(c, d - 1, d, 1.0);
  Example ex = rotated(n, a0, da0, false, c, leading_indicator(n, d), Smoothness::C2, "nogap_shift");
  ex.A = ex.A.with_jordan({lam, alpha, nil});
  ex.curve = {lam, vt, 1.0, d};
  ex.info.description = "Jordan block on the circle |z+1| = 1 against a truncated shift S+ - 1";
  ex.info.truncation_note =
      "continuous spectrum of S+ - 1 becomes a nilpotent block with spectrum {-1}; only the resolvent "
      "estimate and commutator machinery are exercised, the 1/delta bound holds down to delta ~ 1/D";
  ex.info.floor_epsilon = 1.0 / nd;
  ex.info.gapped = false;
  ex.info.expected = {RateKind::little_o, 0.0};
  ex.info.metric = Metric::projected;
  ex.info.nominal_M0 = 1.0;
  ex.info.eps_min = std::max(1.0 / nd, 1e-3);
  return ex;
}

Example build_rotation(const ParamMap& pm) {
  Resolved p{pm};
  const double rate = p("rate");
  auto lam = [rate](double t) { return cplx(rate * t, 0.0); };
  Sampler a0 = [=](double t) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = lam(t);
    return m;
  };
  Sampler da0 = [=](double) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = rate;
    return m;
  };
  CMatrix c = CMatrix::Zero(2, 2);
  add_rotation(c, 0, 1, 2 * kPi);
  Example ex = rotated(2, a0, da0, false, c, leading_indicator(2, 1), Smoothness::C2, "rotation_counterexample");
  ex.curve = {lam, [](double) { return kPi / 2; }, 1.0, 1};
  ex.info.description = "diag(lambda(t), 0) rotated by e^{Ct}, C = 2 pi [[0,1],[-1,0]]; not (M,0)-stable";
  ex.info.gapped = false;
  ex.info.expected = {RateKind::non_adiabatic, 0.0};
  ex.info.metric = Metric::sup_norm;
  ex.info.eps_min = 1e-2;
  ex.info.c_fd = 1e4;
  return ex;
}

Example build_multiplication(const ParamMap& pm) {
  Resolved p{pm};
  const int nd = p.i("D");
  if (nd % 2) throw ParameterError("multiplication_diag: D must be even");
  const int half = nd / 2;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  std::vector<double> x(nd);
  for (int k = 0; k < nd; ++k) x[k] = -2.0 + (k + phi) * (2.0 / half);
  auto f0 = [](double u) { return std::abs(u) < 1.0 ? (1 - u * u) * (1 - u * u) : 0.0; };
  auto df0 = [](double u) { return std::abs(u) < 1.0 ? -4.0 * u * (1 - u * u) : 0.0; };
  Sampler a = [=](double t) {
    CMatrix m = CMatrix::Zero(nd, nd);
    for (int k = 0; k < nd; ++k) m(k, k) = kI * f0(x[k] + t);
    return m;
  };
  Sampler da = [=](double t) {
    CMatrix m = CMatrix::Zero(nd, nd);
    for (int k = 0; k < nd; ++k) m(k, k) = kI * df0(x[k] + t);
    return m;
  };
  Sampler pp = [=](double t) {
    CMatrix m = CMatrix::Zero(nd, nd);
    for (int k = 0; k < nd; ++k) m(k, k) = std::abs(x[k] + t) >= 1.0 ? 1.0 : 0.0;
    return m;
  };
  Sampler zero = [nd](double) { return CMatrix(CMatrix::Zero(nd, nd)); };
  Example ex;
  ex.A = OperatorFamily(nd, a, da, Smoothness::C1, "multiplication_diag");
  FrameForm fr;
  fr.flow = std::make_shared<const ExpFlow>(CMatrix::Zero(nd, nd));
  fr.a0 = a;
  fr.da0 = da;
  ex.A = ex.A.with_frame(std::move(fr));
  ex.P = ProjectionFamily(numerical_rank(pp(0.0)), pp, zero, zero);
  ex.curve = {[](double) { return cplx(0.0); }, [](double) { return 0.0; }, 1.0, 1};
  ex.info.description = "diagonal multiplication by i f0(x_k + t) with the indicator of {f_t = 0}";
  ex.info.truncation_note =
      "grid offset by the golden ratio so points never sit on the support boundary at rational t; P is "
      "piecewise constant with P' = 0 a.e. and not differentiable, which is the point of the example";
  ex.info.gapped = false;
  ex.info.expected = {RateKind::non_adiabatic, 0.0};
  ex.info.metric = Metric::leak;
  ex.info.c_fd = 1e4;
  return ex;
}

Example build_holder(const ParamMap& pm) {
  Resolved p{pm};
  const int nd = p.i("D");
  const double al = p("alpha");
  const double omega = p("omega");
  const int n = 2 * nd + 1;
  CMatrix a0m = CMatrix::Zero(n, n);
  for (int k = -nd; k <= nd; ++k) {
    if (k == 0) continue;
    const double w = (k > 0 ? 1.0 : -1.0) * std::pow(std::abs(k) / static_cast<double>(nd), 1.0 / al);
    a0m(k + nd, k + nd) = kI * w;
  }
  CMatrix c = CMatrix::Zero(n, n);
  const double bk = omega / std::sqrt(2.0 * nd);
  for (int k = 0; k < n; ++k) {
    if (k == nd) continue;
    c(k, nd) += bk;
    c(nd, k) -= bk;
  }
  CMatrix p0 = CMatrix::Zero(n, n);
  p0(nd, nd) = 1.0;
  const CMatrix zero = CMatrix::Zero(n, n);
  Example ex = rotated(n, [a0m](double) { return a0m; }, [zero](double) { return zero; }, true, c, p0,
                       Smoothness::C2, "hölder_density");
  ex.curve = {[](double) { return cplx(0.0); }, [](double) { return 0.0; }, 1.0, 1};
  const double spacing = std::pow(1.0 / nd, 1.0 / al);
  ex.info.description = "levels i sign(k)(|k|/D)^{1/alpha} accumulating at 0, eigenvalue 0 rotated into them";
  ex.info.truncation_note =
      "spectral measure of the coupling vector has Hoelder exponent alpha down to the smallest level "
      "(1/D)^{1/alpha}; floor_epsilon is twice that level";
  ex.info.floor_epsilon = 2.0 * spacing;
  ex.info.gapped = false;
  ex.info.expected = {RateKind::power, al / (2.0 * (1.0 + al))};
  ex.info.metric = Metric::sup_norm;
  ex.info.eps_min = std::max(2.0 * spacing, 1e-3);
  ex.info.grid_points = 51;
  return ex;
}

Example build_damped(const ParamMap& pm) {
  Resolved p{pm};
  const int d = p.i("d");
  const double g = p("gamma");
  const double omega = p("omega");
  CMatrix a0m = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) a0m(k, k) = cplx(-g, static_cast<double>(k));
  CMatrix c = CMatrix::Zero(d, d);
  add_rotation(c, 0, 1, omega);
  if (d >= 3) add_rotation(c, 0, 2, 0.5 * omega);
  const CMatrix zero = CMatrix::Zero(d, d);
  Example ex = rotated(d, [a0m](double) { return a0m; }, [zero](double) { return zero; }, true, c,
                       leading_indicator(d, 1), Smoothness::C2, "damped_gap");
  ex.curve = {[g](double) { return cplx(-g, 0.0); }, [](double) { return 0.0; }, 0.5, 1};
  ex.info.description = "-gamma + skew-Hermitian rotated levels; uniformly exponentially stable";
  ex.info.gapped = true;
  // one-sided: damping makes the deviation decay at least linearly
  ex.info.expected = {RateKind::power, 1.0};
  ex.info.metric = Metric::sup_norm;
  return ex;
}

struct Entry {
  RegistryEntry meta;
  Builder build;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> v;
    v.push_back({{"gap_uniform", {}, "uniform gap, Jordan block lambda+alpha N vs imaginary levels",
                  {{"d", 6, 3, 64, true, "dimension"},
                   {"gap", 1.0, 0.1, 10.0, false, "separation of the imaginary levels"},
                   {"omega", 1.0, 0.0, 10.0, false, "frame rotation speed"},
                   {"static_projection", 0, 0, 1, true, "1 drops the rotation so that P' = 0"}},
                  {RateKind::order_eps, 1.0}, Metric::sup_norm},
                 build_gap_uniform});
    v.push_back({{"gap_crossing", {}, "one eigenvalue crossing at t = 1/2",
                  {{"d", 3, 3, 64, true, "dimension"},
                   {"speed", 1.5, 0.1, 10.0, false, "lambda(t) = i speed (2t - 1)"},
                   {"omega", 1.0, 0.0, 10.0, false, "frame rotation speed"}},
                  {RateKind::little_o, 0.0}, Metric::sup_norm},
                 build_gap_crossing});
    v.push_back({{"nogap_dense_rationals", {}, "Jordan block at -t inside truncated dense rationals",
                  {{"d", 2, 1, 8, true, "Jordan block size (m0)"},
                   {"D", 64, 4, 240, true, "number of rationals kept"}},
                  {RateKind::little_o, 0.0}, Metric::projected},
                 build_nogap_dense_rationals});
    v.push_back({{"nogap_shift", {}, "Jordan block on a circle touching the truncated shift spectrum",
                  {{"d", 2, 1, 8, true, "Jordan block size (m0)"},
                   {"D", 32, 4, 240, true, "shift truncation size"}},
                  {RateKind::little_o, 0.0}, Metric::projected},
                 build_nogap_shift});
    v.push_back({{"rotation_counterexample", {}, "rotating positive rank-one generator, fails (M,0)-stability",
                  {{"rate", 1.0, 0.1, 10.0, false, "lambda(t) = rate t"}},
                  {RateKind::non_adiabatic, 0.0}, Metric::sup_norm},
                 build_rotation});
    v.push_back({{"multiplication_diag", {}, "diagonal multiplication operator with non-differentiable P",
                  {{"D", 64, 8, 256, true, "grid size (even)"}},
                  {RateKind::non_adiabatic, 0.0}, Metric::leak},
                 build_multiplication});
    v.push_back({{"hölder_density", {"holder_density"}, "eigenvalue 0 embedded in levels of Hoelder density",
                  {{"D", 48, 4, 127, true, "levels per side (dimension 2D+1)"},
                   {"alpha", 1.0, 0.05, 1.0, false, "Hoelder exponent"},
                   {"omega", 1.0, 0.0, 10.0, false, "frame rotation speed"}},
                  {RateKind::power, 0.25}, Metric::sup_norm},
                 build_holder});
    v.push_back({{"damped_gap", {}, "uniformly damped rotated levels",
                  {{"d", 4, 2, 64, true, "dimension"},
                   {"gamma", 1.0, 0.01, 10.0, false, "damping rate"},
                   {"omega", 1.0, 0.0, 10.0, false, "frame rotation speed"}},
                  {RateKind::power, 1.0}, Metric::sup_norm},
                 build_damped});
    return v;
  }();
  return table;
}

const Entry& find_entry(const std::string& name) {
  for (const auto& e : entries()) {
    if (e.meta.name == name) return e;
    for (const auto& a : e.meta.aliases)
      if (a == name) return e;
  }
  throw RegistryError("unknown example '" + name + "'");
}

}  // namespace

const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> metas = [] {
    std::vector<RegistryEntry> v;
    for (const auto& e : entries()) v.push_back(e.meta);
    return v;
  }();
  return metas;
}

const RegistryEntry& registry_entry(const std::string& name) { return find_entry(name).meta; }

Example example(const std::string& name, const ParamMap& params) {
  const Entry& e = find_entry(name);
  ParamMap full;
  for (const auto& s : e.meta.params) full[s.name] = s.def;
  for (const auto& [k, v] : params) {
    auto it = std::find_if(e.meta.params.begin(), e.meta.params.end(),
                           [&](const ParamSpec& s) { return s.name == k; });
    if (it == e.meta.params.end()) throw ParameterError(e.meta.name + ": unknown parameter '" + k + "'");
    if (!(v >= it->lo && v <= it->hi)) {
      std::ostringstream os;
      os << e.meta.name << ": parameter " << k << " = " << v << " outside [" << it->lo << ", " << it->hi << "]";
      throw ParameterError(os.str());
    }
    if (it->integer && v != std::round(v))
      throw ParameterError(e.meta.name + ": parameter " + k + " must be an integer");
    full[k] = v;
  }
  Example ex = e.build(full);
  ex.info.name = e.meta.name;
  ex.info.params = full;
  if (ex.A.dim() > kMaxDim) throw ParameterError(e.meta.name + ": dimension above cap 256");
  return ex;
}

std::string registry_manifest_json() {
  nlohmann::ordered_json root;
  root["format"] = "adiabatica-registry";
  root["version"] = 1;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& e : registry()) {
    nlohmann::ordered_json j;
    j["name"] = e.name;
    j["aliases"] = e.aliases;
    j["description"] = e.description;
    j["expected_rate"] = e.expected.label();
    j["metric"] = to_string(e.metric);
    nlohmann::ordered_json ps = nlohmann::ordered_json::array();
    for (const auto& s : e.params) {
      nlohmann::ordered_json q;
      q["name"] = s.name;
      q["default"] = s.def;
      q["min"] = s.lo;
      q["max"] = s.hi;
      q["integer"] = s.integer;
      q["doc"] = s.doc;
      ps.push_back(q);
    }
    j["params"] = ps;
    list.push_back(j);
  }
  root["examples"] = list;
  return root.dump(2) + "\n";
}

}  // namespace adiabatica
