#pragma once

#include <span>
#include <vector>

#include "schurode/matrix.hpp"
#include "schurode/poly_system.hpp"

namespace schurode {

/// Graded enumeration of multidimensional basis exponents: all tuples of
/// total order 0, then 1, ... up to sigma, ties broken by the digital-counter
/// sequence. Row 0 is the all-zero tuple; m = binomial(n + sigma, n).
struct BasisIndex {
    int n = 0;
    int sigma = 0;
    int m = 0;
    std::vector<std::vector<int>> exponents;  // m rows of length n
};

inline constexpr long long kDefaultBasisCap = 20000;
inline constexpr long long kDefaultMonomialCap = 4000000;

/// m = binomial(n + sigma, n) via the incremental product. Throws
/// CapacityError when the count exceeds `cap`.
long long basis_number(int n, int sigma, long long cap = kDefaultBasisCap);

BasisIndex ordering(int n, int sigma, long long cap = kDefaultBasisCap);

/// One-dimensional Legendre coefficient tables, row d = degree-d polynomial
/// in increasing monomial powers. L is the classical family, N the
/// orthonormalized one (all rows scaled, including degrees 0 and 1), D the
/// formal derivative of N.
struct Legendre1D {
    int sigma = 0;
    std::vector<std::vector<double>> L;
    std::vector<std::vector<double>> N;
    std::vector<std::vector<double>> D;
};

Legendre1D legendre_tables(int sigma);

/// Coefficient table of the multidimensional basis polynomials:
/// table[i][j] = coefficient of the monomial with exponents I[j] inside basis
/// polynomial i (a product of one-dimensional N rows).
std::vector<std::vector<double>> multidim_legendre(const BasisIndex& basis,
                                                   const Legendre1D& oned);

/// Exact integral of prod y_k^gamma_k over [-1,1]^n: zero when any exponent
/// is odd, else 2^n / prod (gamma_k + 1).
double monomial_integral(std::span<const int> gamma);

/// Galerkin operator matrix M[i][j] = <grad(h_i) . f, h_j> assembled in
/// closed form from the parity integrals.
Matrix operator_matrix(const PolynomialODE& sys, const BasisIndex& basis,
                       const Legendre1D& oned,
                       const std::vector<std::vector<double>>& lmulti,
                       long long monomial_cap = kDefaultMonomialCap);

/// Projection of the original variables: H[i][i+1] = sqrt(2^n / 3).
Matrix projection_matrix(int n, int m);

/// Basis polynomials evaluated at the initial state.
std::vector<double> boundary_conditions(const std::vector<std::vector<double>>& lmulti,
                                        const BasisIndex& basis,
                                        std::span<const double> y0);

/// All tables and matrices of one Galerkin linearization.
struct GalerkinSystem {
    BasisIndex basis;
    Legendre1D oned;
    std::vector<std::vector<double>> lmulti;
    Matrix M;
    Matrix H;
    std::vector<double> h0;
};

GalerkinSystem build_galerkin(const PolynomialODE& sys, int sigma,
                              std::span<const double> y0,
                              long long basis_cap = kDefaultBasisCap,
                              long long monomial_cap = kDefaultMonomialCap);

}  // namespace schurode
