#pragma once

#include "schurode/matrix.hpp"
#include "schurode/schur.hpp"

namespace schurode {

/// Conditioning data gathered while building the coupling polynomials.
struct CouplingDiagnostics {
    double min_separation = 0.0;  // smallest |T_jj - T_ii| treated as distinct
    int equal_pairs = 0;          // pairs handled by the equal-eigenvalue branch
};

/// The polynomials r_ij(x) coupling component i to component j (j > i) in the
/// sequential solution of an upper-triangular linear system. Coefficients are
/// stored in increasing powers of x, trimmed of trailing exact zeros; the
/// formal degree bound is n-1.
class CouplingPolynomials {
public:
    CouplingPolynomials() = default;

    int size() const { return n_; }
    double eps_eig() const { return eps_eig_; }

    /// Coefficient of x^k in r_ij; zero for j <= i or k past the stored degree.
    Complex coeff(int i, int j, int k) const;
    const std::vector<Complex>& poly(int i, int j) const;
    Complex eval(int i, int j, double x) const;

    const CouplingDiagnostics& diagnostics() const { return diag_; }

private:
    friend CouplingPolynomials coupling_polynomials(const Matrix&, double);

    size_t pair_index(int i, int j) const {
        return static_cast<size_t>(i) * n_ - static_cast<size_t>(i) * (i + 1) / 2 +
               (j - i - 1);
    }

    int n_ = 0;
    double eps_eig_ = 0.0;
    std::vector<std::vector<Complex>> polys_;
    CouplingDiagnostics diag_;
};

/// Default eigenvalue-equality threshold: 1e-8 * max(1, ||T||_F). Accuracy
/// degrades when true eigenvalue separations approach this value.
double default_eps_eig(const Matrix& t);

/// Identification of polynomial coefficients for the couplings r_ij from an
/// upper-triangular matrix. Pairs with |T_jj - T_ii| <= eps_eig take the
/// equal-eigenvalue branch (constant term forced to zero); all others divide
/// by the eigenvalue gap.
CouplingPolynomials coupling_polynomials(const Matrix& t, double eps_eig);

/// Closed-form solution of dPhi/dx = T Phi for upper-triangular T:
/// phi_i(x) = C_i exp(T_ii x) + sum_{j>i} r_ij(x) phi_j(x), evaluated from the
/// last component upward. Immutable and reentrant.
class TriangularSolution {
public:
    TriangularSolution(const Matrix& t, CouplingPolynomials couplings,
                       CVector constants, double x0);

    int size() const { return static_cast<int>(diag_.size()); }
    double x0() const { return x0_; }
    const CVector& constants() const { return constants_; }
    const CVector& diagonal() const { return diag_; }
    const CouplingPolynomials& couplings() const { return couplings_; }

    CVector at(double x) const;

private:
    CVector diag_;
    CouplingPolynomials couplings_;
    CVector constants_;
    double x0_ = 0.0;
};

/// Integration constants C_i = exp(-T_ii x0) (phi0_i - sum_{j>i} r_ij(x0) phi0_j),
/// computed from the last component upward.
CVector triangular_constants(const Matrix& t, const CouplingPolynomials& couplings,
                             const CVector& phi0, double x0);

/// Convenience: couplings + constants for an already-triangular system.
/// eps_eig <= 0 selects the default threshold.
TriangularSolution solve_triangular_ivp(const Matrix& t, const CVector& phi0,
                                        double x0, double eps_eig = 0.0);

/// Closed-form solution of dy/dx = A y through the Schur form A = V T V*.
class ExpPolySolution {
public:
    ExpPolySolution(SchurForm schur, TriangularSolution triangular)
        : schur_(std::move(schur)), triangular_(std::move(triangular)) {}

    const SchurForm& schur() const { return schur_; }
    const TriangularSolution& triangular() const { return triangular_; }

    CVector phi(double x) const { return triangular_.at(x); }
    CVector y(double x) const { return schur_.V.apply(triangular_.at(x)); }
    std::vector<double> y_real(double x) const { return real_part(y(x)); }

private:
    SchurForm schur_;
    TriangularSolution triangular_;
};

ExpPolySolution solve_linear_ivp(const Matrix& a, const CVector& y0, double x0,
                                 double eps_eig = 0.0, int max_iter = 30);
ExpPolySolution solve_linear_ivp(const Matrix& a, std::span<const double> y0,
                                 double x0, double eps_eig = 0.0, int max_iter = 30);

}  // namespace schurode
