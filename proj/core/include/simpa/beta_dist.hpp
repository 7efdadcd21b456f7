#pragma once

namespace simpa {

// Regularized incomplete beta function I_x(a, b).
double inc_beta(double a, double b, double x);

// Inverse of I_x(a, b) in x for p in [0, 1].
double inc_beta_inv(double a, double b, double p);

// Beta(a, b) density at x.
double beta_pdf(double a, double b, double x);

// Partial derivatives of I_x(a, b) w.r.t. the concentrations, by
// high-accuracy central differences (no closed form exists). Used by the
// implicit reparameterisation identity dz/da = -(dI/da) / pdf(z).
void inc_beta_param_grad(double a, double b, double x, double* d_da, double* d_db);

}  // namespace simpa
