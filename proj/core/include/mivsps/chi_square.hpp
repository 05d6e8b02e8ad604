#pragma once

namespace mivsps::stats {

// Regularized lower incomplete gamma P(a, x), series for x < a + 1 and
// Lentz continued fraction for Q otherwise.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

double chi_square_cdf(double x, double dof);

// Inverse of chi_square_cdf by bracketed bisection to absolute tolerance tol on x.
double chi_square_quantile(double p, double dof, double tol = 1e-10);

}  // namespace mivsps::stats
