#include "simpa/beta_dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace simpa {
namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 3.0e-16;
  constexpr double kFpMin = 1.0e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace

double inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("inc_beta: concentrations must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lbt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  const double bt = std::exp(lbt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double beta_pdf(double a, double b, double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

double inc_beta_inv(double a, double b, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;

  double lo = 0.0, hi = 1.0;
  // Rough mean-based start; the safeguarded Newton below does the real work.
  double x = a / (a + b);
  x = std::min(std::max(x, 1e-12), 1.0 - 1e-12);

  for (int iter = 0; iter < 200; ++iter) {
    const double f = inc_beta(a, b, x) - p;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double dens = beta_pdf(a, b, x);
    double next;
    if (dens > 1e-300) {
      next = x - f / dens;
    } else {
      next = 0.5 * (lo + hi);
    }
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-16 + 1e-14 * x) {
      x = next;
      break;
    }
    x = next;
  }
  return std::min(std::max(x, 1e-12), 1.0 - 1e-12);
}

void inc_beta_param_grad(double a, double b, double x, double* d_da, double* d_db) {
  const double ha = 1e-5 * std::max(1.0, a);
  const double hb = 1e-5 * std::max(1.0, b);
  const double a_lo = std::max(a - ha, 1e-8);
  const double b_lo = std::max(b - hb, 1e-8);
  *d_da = (inc_beta(a + ha, b, x) - inc_beta(a_lo, b, x)) / (a + ha - a_lo);
  *d_db = (inc_beta(a, b + hb, x) - inc_beta(a, b_lo, x)) / (b + hb - b_lo);
}

}  // namespace simpa
