#include "adiabatica/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace adiabatica {

namespace {

constexpr double kW = 640, kH = 440;
constexpr double kL = 80, kR = 20, kT = 40, kB = 60;

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

struct Axis {
  double lo, hi;  // log10 range
  double px0, px1;
  double map(double v) const { return px0 + (std::log10(v) - lo) / (hi - lo) * (px1 - px0); }
};

Axis axis(double vmin, double vmax, double px0, double px1) {
  double lo = std::floor(std::log10(vmin)), hi = std::ceil(std::log10(vmax));
  if (hi <= lo) hi = lo + 1;
  return {lo, hi, px0, px1};
}

}  // namespace

std::string render_svg(const ExperimentReport& r) {
  if (r.records.empty()) throw ParameterError("render_svg: empty report");
  std::vector<std::pair<double, double>> pts;
  double emin = 1e300, emax = 0, vmin = 1e300, vmax = 0;
  for (const auto& rec : r.records) {
    emin = std::min(emin, rec.eps);
    emax = std::max(emax, rec.eps);
    if (rec.sup_dev > 0.0) {
      pts.emplace_back(rec.eps, rec.sup_dev);
      vmin = std::min(vmin, rec.sup_dev);
      vmax = std::max(vmax, rec.sup_dev);
    }
  }
  if (pts.empty()) vmin = 1e-16, vmax = 1.0;

  // guide lines through the geometric centre of the data
  double cx = 0, cy = 0;
  for (auto [e, v] : pts) {
    cx += std::log(e);
    cy += std::log(v);
  }
  if (!pts.empty()) {
    cx /= pts.size();
    cy /= pts.size();
  }
  auto line_at = [&](double slope, double intercept, double e) { return std::exp(intercept + slope * std::log(e)); };
  std::optional<double> expected_slope;
  if (r.expected.kind == RateKind::order_eps || r.expected.kind == RateKind::power) expected_slope = r.expected.exponent;
  else if (r.expected.kind == RateKind::non_adiabatic) expected_slope = 0.0;
  const double exp_icpt = expected_slope ? cy - *expected_slope * cx : 0.0;
  if (r.fit)
    for (double e : {emin, emax}) {
      const double v = line_at(r.fit->slope, r.fit->intercept, e);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  if (expected_slope && !pts.empty())
    for (double e : {emin, emax}) {
      const double v = line_at(*expected_slope, exp_icpt, e);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }

  const Axis ax = axis(emin, emax, kL, kW - kR);
  const Axis ay = axis(vmin, vmax, kH - kB, kT);
  std::string s;
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kW, kH, kW, kH);
  s += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kW, kH);
  s += fmt::format("<text x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{} ({})</text>\n", kW / 2,
                   esc(r.example), esc(to_string(r.metric)));

  for (double d = ax.lo; d <= ax.hi + 1e-9; d += 1) {
    const double x = ax.px0 + (d - ax.lo) / (ax.hi - ax.lo) * (ax.px1 - ax.px0);
    s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", x, kT, x,
                     kH - kB);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">1e{:.0f}</text>\n", x, kH - kB + 18, d);
  }
  for (double d = ay.lo; d <= ay.hi + 1e-9; d += 1) {
    const double y = ay.px0 + (d - ay.lo) / (ay.hi - ay.lo) * (ay.px1 - ay.px0);
    s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", kL, y,
                     kW - kR, y);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">1e{:.0f}</text>\n", kL - 6, y + 4, d);
  }
  s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
                   kL, kT, kW - kR - kL, kH - kB - kT);
  s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">epsilon</text>\n", (kL + kW - kR) / 2,
                   kH - 16);
  s += fmt::format(
      "<text x=\"18\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2f})\">sup deviation</text>\n",
      (kT + kH - kB) / 2, (kT + kH - kB) / 2);

  if (r.fit)
    s += fmt::format(
        "<path id=\"fit\" d=\"M {:.2f} {:.2f} L {:.2f} {:.2f}\" stroke=\"#1f77b4\" stroke-width=\"2\" fill=\"none\"/>\n",
        ax.map(emax), ay.map(line_at(r.fit->slope, r.fit->intercept, emax)), ax.map(emin),
        ay.map(line_at(r.fit->slope, r.fit->intercept, emin)));
  if (expected_slope && !pts.empty())
    s += fmt::format(
        "<path id=\"expected\" d=\"M {:.2f} {:.2f} L {:.2f} {:.2f}\" stroke=\"#d62728\" stroke-width=\"2\" "
        "stroke-dasharray=\"6 4\" fill=\"none\"/>\n",
        ax.map(emax), ay.map(line_at(*expected_slope, exp_icpt, emax)), ax.map(emin),
        ay.map(line_at(*expected_slope, exp_icpt, emin)));
  for (auto [e, v] : pts)
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"black\"/>\n", ax.map(e), ay.map(v));

  double ly = kT + 18;
  if (r.fit) {
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"#1f77b4\">fit slope {:.3f} &#177; {:.3f}</text>\n",
                     kL + 10, ly, r.fit->slope, r.fit->half_width);
    ly += 16;
  }
  if (expected_slope && !pts.empty()) {
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"#d62728\">expected {}</text>\n", kL + 10, ly,
                     esc(r.expected.label()));
    ly += 16;
  }
  s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">verdict: {}</text>\n", kL + 10, ly, esc(r.verdict));
  s += "</svg>\n";
  return s;
}

}  // namespace adiabatica
