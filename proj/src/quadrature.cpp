#include "rdabc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "rdabc/errors.hpp"

namespace rdabc {

namespace {

// 15-point Kronrod nodes on [-1,1] and weights; embedded 7-point Gauss weights.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double result_gauss = kWg[3] * fc;
  double result_kronrod = kWgk[7] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    result_kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) result_gauss += kWg[j / 2] * (f1 + f2);
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = result_kronrod * half;
  p.error = std::abs((result_kronrod - result_gauss) * half);
  return p;
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, double abs_tol, int max_intervals) {
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<Panel> panels;
  panels.push(evaluate_panel(f, a, b));
  out.evaluations = 15;
  double total = panels.top().value;
  double total_error = panels.top().error;
  int count = 1;
  while (count < max_intervals) {
    const double tol = std::max(abs_tol, rel_tol * std::abs(total));
    if (total_error <= tol) break;
    Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = evaluate_panel(f, worst.a, mid);
    Panel right = evaluate_panel(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }
  out.value = total;
  out.abs_error = total_error;
  out.converged = total_error <= std::max(abs_tol, rel_tol * std::abs(total));
  return out;
}

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol, int max_intervals) {
  const QuadratureResult r = integrate(f, a, b, rel_tol, abs_tol, max_intervals);
  if (!r.converged) {
    throw ConvergenceError("quadrature failed to converge: error " + std::to_string(r.abs_error) +
                           " after " + std::to_string(r.evaluations) + " evaluations");
  }
  return r.value;
}

}  // namespace rdabc
