#pragma once

#include <span>
#include <vector>

#include "schurode/matrix.hpp"
#include "schurode/poly_system.hpp"

namespace schurode {

/// Sampled evolution of a system: abscissae, solver states, and optionally
/// reference states with componentwise absolute errors.
struct Trajectory {
    std::vector<double> x;
    std::vector<std::vector<double>> y;
    std::vector<std::vector<double>> ref;
    std::vector<std::vector<double>> err;

    void attach_reference(std::vector<std::vector<double>> reference);
};

/// e^{Ax} via scaling and squaring of the Taylor series, terms summed until
/// they fall below 1e-16 of the partial sum.
Matrix matrix_exponential(const Matrix& a, double x);
CVector matrix_exponential_apply(const Matrix& a, double x, const CVector& y0);
std::vector<double> matrix_exponential_apply(const Matrix& a, double x,
                                             std::span<const double> y0);

/// Classical fixed-step RK4; the final partial step lands exactly on x1.
/// States are recorded at every step boundary. Throws DivergenceError with
/// the abscissa reached when the state leaves the finite range.
Trajectory rk_integrate(const PolynomialODE& sys, std::span<const double> y0,
                        double x0, double x1, double step);

/// RK4 states at the requested sample points (non-decreasing, >= x0),
/// integrating through each sample so it is a step boundary.
std::vector<std::vector<double>> rk_reference(const PolynomialODE& sys,
                                              std::span<const double> y0, double x0,
                                              std::span<const double> xs, double step);

/// Gauss-Legendre nodes and weights on [-1,1], nodes found by Newton
/// iteration on the Legendre recurrence to 1e-15.
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
    int order = 0;
};

QuadratureRule gauss_legendre(int order);

/// A monomial list for quadrature integrands.
struct WeightedMonomial {
    double coeff = 0.0;
    std::vector<int> exponents;
};

/// Tensor-product Gauss-Legendre value of the inner product of two monomial
/// lists over [-1,1]^n. Throws UnderResolutionError when the rule cannot
/// integrate the product exactly.
double quadrature_inner_product(std::span<const WeightedMonomial> f,
                                std::span<const WeightedMonomial> g, int n, int order);

}  // namespace schurode
