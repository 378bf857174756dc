#include "deom/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace deom::quad {

namespace {

// QUADPACK qk15 nodes and weights.
constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
  double kronrod;
  double err;
};

PanelResult gk15_panel(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double res_g = wg[3] * fc;
  double res_k = wgk[7] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = h * xgk[j];
    const double fsum = f(c - x) + f(c + x);
    res_k += wgk[j] * fsum;
    if (j % 2 == 1) res_g += wg[j / 2] * fsum;
  }
  res_k *= h;
  res_g *= h;
  return {res_k, std::abs(res_k - res_g)};
}

struct Interval {
  double a, b, value, err;
  bool operator<(const Interval& o) const { return err < o.err; }
};

}  // namespace

double gk15_adaptive(const std::function<double(double)>& f, double a, double b,
                     const Options& opt) {
  if (!(b > a)) return 0.0;
  std::priority_queue<Interval> heap;
  double total = 0.0, total_err = 0.0;
  const int n0 = std::max(1, opt.seed_panels);
  for (int i = 0; i < n0; ++i) {
    const double x0 = a + (b - a) * i / n0;
    const double x1 = a + (b - a) * (i + 1) / n0;
    auto r = gk15_panel(f, x0, x1);
    heap.push({x0, x1, r.kronrod, r.err});
    total += r.kronrod;
    total_err += r.err;
  }
  int panels = n0;
  while (total_err > opt.abs_tol && total_err > opt.rel_tol * std::abs(total)) {
    if (panels >= opt.max_panels)
      throw QuadratureError("gk15_adaptive: panel budget exhausted, residual error " +
                            std::to_string(total_err));
    Interval worst = heap.top();
    heap.pop();
    total -= worst.value;
    total_err -= worst.err;
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b)
      throw QuadratureError("gk15_adaptive: interval underflow without convergence");
    for (auto [x0, x1] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
      auto r = gk15_panel(f, x0, x1);
      heap.push({x0, x1, r.kronrod, r.err});
      total += r.kronrod;
      total_err += r.err;
    }
    ++panels;
  }
  return total;
}

namespace {

// Asymptotic auxiliary functions: Si(x) = pi/2 - f(x)cos x - g(x)sin x,
// Ci(x) = f(x)sin x - g(x)cos x.
void si_ci_aux(double x, double& fx, double& gx) {
  const double x2 = 1.0 / (x * x);
  // f ~ (1/x)(1 - 2!/x^2 + 4!/x^4 - ...), g ~ (1/x^2)(1 - 3!/x^2 + 5!/x^4 - ...)
  double f = 1.0, g = 1.0, tf = 1.0, tg = 1.0;
  for (int k = 1; k <= 8; ++k) {
    tf *= -(2.0 * k) * (2.0 * k - 1.0) * x2;
    tg *= -(2.0 * k + 1.0) * (2.0 * k) * x2;
    f += tf;
    g += tg;
  }
  fx = f / x;
  gx = g / (x * x);
}

constexpr double kAsymptoticSwitch = 60.0;

}  // namespace

double sine_integral(double x) {
  if (x <= 0.0) return 0.0;
  if (x < kAsymptoticSwitch) {
    Options opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-13;
    opt.seed_panels = std::max(4, static_cast<int>(x / 1.5));
    return gk15_adaptive([](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; },
                         0.0, x, opt);
  }
  double f, g;
  si_ci_aux(x, f, g);
  return M_PI / 2 - f * std::cos(x) - g * std::sin(x);
}

double cosine_integral(double x) {
  if (x <= 0.0) throw QuadratureError("cosine_integral: requires x > 0");
  if (x < kAsymptoticSwitch) {
    Options opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-13;
    opt.seed_panels = std::max(4, static_cast<int>(x / 1.5));
    const double euler = 0.57721566490153286060651209008240243;
    const double rest = gk15_adaptive(
        [](double t) { return t == 0.0 ? 0.0 : (std::cos(t) - 1.0) / t; }, 0.0, x, opt);
    return euler + std::log(x) + rest;
  }
  double f, g;
  si_ci_aux(x, f, g);
  return f * std::sin(x) - g * std::cos(x);
}

}  // namespace deom::quad
