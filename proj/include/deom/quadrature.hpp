#pragma once

#include <functional>

#include "deom/types.hpp"

namespace deom::quad {

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_panels = 200000;
  int seed_panels = 1;  // initial uniform subdivision
};

// Adaptive Gauss-Kronrod 7/15 on [a, b].
double gk15_adaptive(const std::function<double(double)>& f, double a, double b,
                     const Options& opt = {});

// Sine and cosine integrals Si(x), Ci(x) for x > 0.  Quadrature below the
// asymptotic switch point, asymptotic series beyond it.
double sine_integral(double x);
double cosine_integral(double x);

}  // namespace deom::quad
