#pragma once

#include <cstddef>
#include <vector>

namespace mosum {

// Smallest sample value r such that the fraction of samples strictly greater
// than r is <= alpha. Input need not be sorted.
double upper_threshold(std::vector<double> samples, double alpha);

// Equivalent order-statistic form: upper_threshold(samples, 1 - q).
double empirical_quantile(std::vector<double> samples, double q);

// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);  // unbiased, 0 when size < 2

// Nodes and weights of 16-point Gauss-Legendre quadrature on [a, b].
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_legendre_16(double a, double b);

}  // namespace mosum
