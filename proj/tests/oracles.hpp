// Independent oracles shared by the test suites: central finite
// differences, quadrature, and simple statistics. These stay clear of the
// autodiff backward path they are used to check.
#ifndef OPTDISC_TESTS_ORACLES_HPP
#define OPTDISC_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "optdisc/tensor.hpp"

namespace oracles {

// d f / d x_i by central differences at step h.
inline std::vector<double> finite_diff(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double keep = x[i];
    x[i] = keep + h;
    double up = f(x);
    x[i] = keep - h;
    double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// max_i |a_i - b_i| / max(1, |b_i|)
inline double max_rel_err(const std::vector<double>& a,
                          const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double denom = std::max(1.0, std::fabs(b[i]));
    worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
  }
  return worst;
}

// trapezoidal integral of f over [lo, hi]
inline double trapezoid(const std::function<double(double)>& f, double lo,
                        double hi, int n) {
  double acc = 0.5 * (f(lo) + f(hi));
  double step = (hi - lo) / n;
  for (int i = 1; i < n; ++i) acc += f(lo + i * step);
  return acc * step;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double std_error(const std::vector<double>& v) {
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(v.size()) - 1.0) /
                   static_cast<double>(v.size()));
}

}  // namespace oracles

#endif
