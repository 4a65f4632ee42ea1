#include "adiabatica/evolve.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace adiabatica {

const char* to_string(Integrator i) { return i == Integrator::cf4 ? "cf4" : "rk4"; }

namespace {

// Generator of the system to integrate. In framed form it is the
// co-moving generator of y = e^{Ct} x and the physical propagator is
// e^{-Ct} Y(t, s) e^{Cs}.
struct Generator {
  Sampler g;
  bool constant = false;
  std::shared_ptr<const ExpFlow> flow;  // non-null in framed form
  int n = 0;
};

bool same_matrix(const CMatrix& x, const CMatrix& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() && (x - y).norm() <= 1e-14 * std::max(1.0, x.norm());
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw GridError("propagate: grid needs at least two points");
  for (size_t k = 0; k + 1 < grid.size(); ++k)
    if (!(grid[k + 1] > grid[k])) throw GridError("propagate: grid must be strictly increasing");
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError(fmt::format("propagate: eps = {} must be positive", eps));
}

enum class System { plain, intertwined, projected };

Generator make_generator(const OperatorFamily& a, const ProjectionFamily* p, System sys, double eps,
                         bool use_frame) {
  Generator gen;
  gen.n = a.dim();
  const double inv = 1.0 / eps;
  const auto& fa = a.frame();
  bool framed = use_frame && fa.has_value();
  if (framed && sys != System::plain) {
    // the projection must rotate with the same C, or be constant under C = 0
    const auto& fp = p->frame();
    framed = fp.has_value() && same_matrix(fp->flow->generator(), fa->C());
  }
  if (framed) {
    const CMatrix c = fa->C();
    gen.flow = fa->flow;
    CMatrix k0 = CMatrix::Zero(gen.n, gen.n);
    CMatrix p0;
    if (sys != System::plain) {
      p0 = p->frame()->P0;
      k0 = comm(comm(p0, c), p0);
    }
    const Sampler a0 = fa->a0;
    if (sys == System::projected)
      gen.g = [=](double t) { return CMatrix(c + inv * (a0(t) * p0) + k0); };
    else
      gen.g = [=](double t) { return CMatrix(c + inv * a0(t) + k0); };
    gen.constant = fa->a0_constant;
    return gen;
  }
  if (sys == System::plain) {
    gen.g = [a, inv](double t) { return CMatrix(inv * a(t)); };
  } else if (sys == System::intertwined) {
    const ProjectionFamily pf = *p;
    gen.g = [a, pf, inv](double t) { return CMatrix(inv * a(t) + pf.commutator_target(t)); };
  } else {
    const ProjectionFamily pf = *p;
    gen.g = [a, pf, inv](double t) { return CMatrix(inv * (a(t) * pf(t)) + pf.commutator_target(t)); };
  }
  return gen;
}

// Fourth-order commutator-free step with two exponentials at the Gauss nodes.
CMatrix cf4_step(const Sampler& g, double t, double h) {
  static const double s3 = std::sqrt(3.0);
  const double a1 = 0.25 + s3 / 6.0, a2 = 0.25 - s3 / 6.0;
  const CMatrix g1 = g(t + (0.5 - s3 / 6.0) * h);
  const CMatrix g2 = g(t + (0.5 + s3 / 6.0) * h);
  return expm(h * (a2 * g1 + a1 * g2)) * expm(h * (a1 * g1 + a2 * g2));
}

CMatrix cf4_interval(const Sampler& g, double t0, double t1, int n) {
  const double h = (t1 - t0) / n;
  CMatrix phi = cf4_step(g, t0, h);
  for (int i = 1; i < n; ++i) phi = cf4_step(g, t0 + i * h, h) * phi;
  return phi;
}

CMatrix rk4_interval(const Sampler& g, double t0, double t1, double hmax, const CMatrix& x0, long& count) {
  const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / hmax - 1e-9)));
  const double h = (t1 - t0) / n;
  CMatrix x = x0;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * h;
    const CMatrix gm = g(t + 0.5 * h);
    const CMatrix k1 = g(t) * x;
    const CMatrix k2 = gm * (x + 0.5 * h * k1);
    const CMatrix k3 = gm * (x + 0.5 * h * k2);
    const CMatrix k4 = g(t + h) * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  count += n;
  return x;
}

PropagatorTable drive(const Generator& gen, double eps, const std::vector<double>& grid, const PropagateOptions& opt) {
  check_grid(grid);
  const int n = gen.n;
  const CMatrix id = CMatrix::Identity(n, n);
  const bool has_basis = opt.basis.size() > 0;
  if (has_basis && opt.basis.rows() != n) throw DimensionError("propagate: basis has wrong row count");
  const CMatrix x0 = has_basis ? opt.basis : id;

  PropagatorTable tab;
  tab.integrator = opt.integrator;
  tab.eps = eps;
  tab.basis = opt.basis;
  tab.t = grid;
  tab.framed = gen.flow != nullptr;

  auto to_frame = [&](double t, const CMatrix& x) -> CMatrix { return gen.flow ? gen.flow->left(t, x) : x; };
  auto from_frame = [&](double t, const CMatrix& y) -> CMatrix {
    return gen.flow ? gen.flow->left(-t, y) : y;
  };

  CMatrix y = to_frame(grid.front(), x0);
  tab.U.push_back(x0);
  tab.step_error.reserve(grid.size());

  if (opt.integrator == Integrator::rk4) {
    for (size_t k = 0; k + 1 < grid.size(); ++k) {
      if (opt.keep_steps) {
        CMatrix s = rk4_interval(gen.g, grid[k], grid[k + 1], opt.rk4_step, id, tab.substeps);
        if (gen.flow) s = gen.flow->at(-grid[k + 1]) * s * gen.flow->at(grid[k]);
        tab.steps.push_back(s);
        y = rk4_interval(gen.g, grid[k], grid[k + 1], opt.rk4_step, y, tab.substeps);
      } else {
        y = rk4_interval(gen.g, grid[k], grid[k + 1], opt.rk4_step, y, tab.substeps);
      }
      if (!all_finite(y)) throw StiffnessError("propagate(rk4): solution overflowed; decrease rk4_step");
      tab.U.push_back(from_frame(grid[k + 1], y));
      tab.step_error.push_back(0.0);
    }
    return tab;
  }

  if (gen.constant) {
    tab.exact = true;
    const CMatrix g = gen.g(grid.front());
    std::unique_ptr<ExpFlow> flow;
    if (is_normal(g, 1e-12 * std::max(1.0, g.norm()))) flow = std::make_unique<ExpFlow>(g);
    std::map<double, CMatrix> cache;
    for (size_t k = 0; k + 1 < grid.size(); ++k) {
      const double h = grid[k + 1] - grid[k];
      CMatrix s;
      if (flow && !opt.keep_steps) {
        y = flow->left(h, y);
        if (!all_finite(y)) throw OverflowError("propagate: propagator overflowed");
        tab.U.push_back(from_frame(grid[k + 1], y));
        tab.step_error.push_back(0.0);
        continue;
      }
      if (flow) {
        s = flow->at(h);
      } else {
        auto it = cache.lower_bound(h * (1 - 1e-13));
        if (it != cache.end() && std::abs(it->first - h) <= 1e-13 * h) {
          s = it->second;
        } else {
          s = expm(h * g);
          cache.emplace(h, s);
        }
      }
      y = s * y;
      if (!all_finite(y)) throw OverflowError("propagate: propagator overflowed");
      if (opt.keep_steps) tab.steps.push_back(gen.flow ? CMatrix(gen.flow->at(-grid[k + 1]) * s * gen.flow->at(grid[k])) : s);
      tab.U.push_back(from_frame(grid[k + 1], y));
      tab.step_error.push_back(0.0);
    }
    return tab;
  }

  int hint = 1;
  for (size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t0 = grid[k], t1 = grid[k + 1];
    int coarse = std::max(1, hint / 2);
    CMatrix phi_c = cf4_interval(gen.g, t0, t1, coarse);
    tab.substeps += coarse;
    for (;;) {
      const int fine = 2 * coarse;
      if ((t1 - t0) / fine < kMinStep)
        throw StiffnessError(fmt::format(
            "propagate: required step below 1e-12 on [{}, {}] at eps = {}; use a larger eps or a smaller ||A||", t0,
            t1, eps));
      CMatrix phi_f = cf4_interval(gen.g, t0, t1, fine);
      tab.substeps += fine;
      if (tab.substeps > kMaxSteps)
        throw StiffnessError(fmt::format("propagate: step cap {} exceeded at eps = {}; use a larger eps", kMaxSteps,
                                         eps));
      if (!all_finite(phi_f)) throw OverflowError("propagate: step propagator overflowed");
      const double err = (phi_f - phi_c).norm() / std::max(1.0, phi_f.norm());
      if (err <= opt.tol_step) {
        y = phi_f * y;
        tab.step_error.push_back(err);
        if (opt.keep_steps) tab.steps.push_back(gen.flow ? CMatrix(gen.flow->at(-t1) * phi_f * gen.flow->at(t0)) : phi_f);
        hint = fine;
        break;
      }
      coarse = fine;
      phi_c = std::move(phi_f);
    }
    if (!all_finite(y)) throw OverflowError("propagate: propagator overflowed");
    tab.U.push_back(from_frame(t1, y));
  }
  return tab;
}

}  // namespace

CMatrix PropagatorTable::between(size_t k, size_t j) const {
  if (steps.size() + 1 != t.size()) throw ParameterError("PropagatorTable::between: steps were not stored");
  if (j > k || k >= t.size()) throw GridError("PropagatorTable::between: need j <= k < size");
  const int n = static_cast<int>(steps.front().rows());
  CMatrix u = CMatrix::Identity(n, n);
  for (size_t i = j; i < k; ++i) u = steps[i] * u;
  return u;
}

std::string PropagatorTable::csv_summary() const {
  std::ostringstream os;
  os << "t,norm,step_error\n";
  for (size_t k = 0; k < t.size(); ++k)
    os << fmt::format("{:.12g},{:.12g},{:.12g}\n", t[k], norm2(U[k]), k == 0 ? 0.0 : step_error[k - 1]);
  return os.str();
}

// Layout: 8-byte magic "ADBTBL1\0", int32 rows, int32 cols, int64 K, double eps,
// K doubles (times), then K row-major blocks of (re, im) doubles.
void PropagatorTable::write_binary(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  const char magic[8] = {'A', 'D', 'B', 'T', 'B', 'L', '1', '\0'};
  f.write(magic, 8);
  const std::int32_t rows = U.empty() ? 0 : static_cast<std::int32_t>(U.front().rows());
  const std::int32_t cols = U.empty() ? 0 : static_cast<std::int32_t>(U.front().cols());
  const std::int64_t count = static_cast<std::int64_t>(t.size());
  f.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  f.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  f.write(reinterpret_cast<const char*>(&count), sizeof count);
  f.write(reinterpret_cast<const char*>(&eps), sizeof eps);
  f.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  for (const auto& u : U)
    for (const cplx& z : to_row_major(u)) {
      const double re = z.real(), im = z.imag();
      f.write(reinterpret_cast<const char*>(&re), sizeof re);
      f.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  if (!f) throw IoError("write failed for " + path);
}

PropagatorTable PropagatorTable::read_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, "ADBTBL1", 8) != 0) throw IoError(path + ": not a propagator table");
  std::int32_t rows = 0, cols = 0;
  std::int64_t count = 0;
  PropagatorTable tab;
  f.read(reinterpret_cast<char*>(&rows), sizeof rows);
  f.read(reinterpret_cast<char*>(&cols), sizeof cols);
  f.read(reinterpret_cast<char*>(&count), sizeof count);
  f.read(reinterpret_cast<char*>(&tab.eps), sizeof tab.eps);
  if (!f || rows <= 0 || cols <= 0 || count < 0 || count > 100'000'000) throw IoError(path + ": bad header");
  tab.t.resize(static_cast<size_t>(count));
  f.read(reinterpret_cast<char*>(tab.t.data()), static_cast<std::streamsize>(count * sizeof(double)));
  std::vector<cplx> buf(static_cast<size_t>(rows) * cols);
  for (std::int64_t k = 0; k < count; ++k) {
    for (auto& z : buf) {
      double re = 0, im = 0;
      f.read(reinterpret_cast<char*>(&re), sizeof re);
      f.read(reinterpret_cast<char*>(&im), sizeof im);
      z = cplx(re, im);
    }
    if (!f) throw IoError(path + ": truncated");
    tab.U.push_back(from_row_major(rows, cols, buf));
  }
  return tab;
}

PropagatorTable propagate(const OperatorFamily& a, double eps, const std::vector<double>& grid,
                          const PropagateOptions& opt) {
  check_eps(eps);
  return drive(make_generator(a, nullptr, System::plain, eps, opt.use_frame && opt.integrator == Integrator::cf4),
               eps, grid, opt);
}

PropagatorTable propagate_intertwined(const OperatorFamily& a, const ProjectionFamily& p, double eps,
                                      const std::vector<double>& grid, const PropagateOptions& opt) {
  check_eps(eps);
  if (p.dim() != a.dim()) throw DimensionError("propagate_intertwined: dimension mismatch");
  return drive(make_generator(a, &p, System::intertwined, eps, opt.use_frame && opt.integrator == Integrator::cf4),
               eps, grid, opt);
}

PropagatorTable propagate_projected(const OperatorFamily& a, const ProjectionFamily& p, double eps,
                                    const std::vector<double>& grid, const PropagateOptions& opt) {
  check_eps(eps);
  if (p.dim() != a.dim()) throw DimensionError("propagate_projected: dimension mismatch");
  return drive(make_generator(a, &p, System::projected, eps, opt.use_frame && opt.integrator == Integrator::cf4),
               eps, grid, opt);
}

PropagatorTable propagate_generator(const Sampler& g, const std::vector<double>& grid, const PropagateOptions& opt) {
  check_grid(grid);
  Generator gen;
  gen.g = g;
  gen.n = static_cast<int>(g(grid.front()).rows());
  return drive(gen, 1.0, grid, opt);
}

DeviationProfile deviation(const PropagatorTable& a, const PropagatorTable& b, const CMatrix& right) {
  if (a.t.size() != b.t.size()) throw GridError("deviation: grids differ in length");
  for (size_t k = 0; k < a.t.size(); ++k)
    if (std::abs(a.t[k] - b.t[k]) > 1e-14 * std::max(1.0, std::abs(a.t[k])))
      throw GridError("deviation: grids differ");
  if (a.dim() != b.dim() || (a.size() && a.U.front().cols() != b.U.front().cols()))
    throw DimensionError("deviation: table shapes differ");
  DeviationProfile out;
  out.t = a.t;
  for (size_t k = 0; k < a.t.size(); ++k) {
    const CMatrix d = a.U[k] - b.U[k];
    const double v = right.size() ? norm2(d * right) : norm2(d);
    out.value.push_back(v);
    out.sup = std::max(out.sup, v);
  }
  return out;
}

double adiabaticity_residual(const PropagatorTable& v, const ProjectionFamily& p, int max_points) {
  if (v.size() == 0) return 0.0;
  const CMatrix p0 = p(v.t.front());
  bool on_range = false;
  if (v.basis.size()) {
    if ((p0 * v.basis - v.basis).norm() > 1e-10 * std::max(1.0, v.basis.norm()))
      throw ParameterError("adiabaticity_residual: table basis is not inside ran P(t0)");
    on_range = true;
  }
  size_t stride = 1;
  if (max_points > 0 && v.size() > static_cast<size_t>(max_points))
    stride = (v.size() + static_cast<size_t>(max_points) - 1) / static_cast<size_t>(max_points);
  double worst = 0.0;
  auto at = [&](size_t k) {
    const CMatrix pt = p(v.t[k]);
    const CMatrix r = on_range ? CMatrix(pt * v.U[k] - v.U[k]) : CMatrix(pt * v.U[k] - v.U[k] * p0);
    worst = std::max(worst, norm2(r) / std::max(1.0, norm2(v.U[k])));
  };
  for (size_t k = 0; k < v.size(); k += stride) at(k);
  if ((v.size() - 1) % stride != 0) at(v.size() - 1);
  return worst;
}

}  // namespace adiabatica
