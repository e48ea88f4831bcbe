#pragma once

#include <span>
#include <vector>

#include "schurode/matrix.hpp"
#include "schurode/triangular.hpp"

namespace schurode {

inline constexpr long long kDefaultSolverCap = 20000;

/// Operator split M = B + epsilon P of a lifted system dh/dx = M h.
struct SplitOperator {
    Matrix B;
    Matrix P;
    double epsilon = 0.0;
};

/// Multiple perturbation sources: dh/dx = B h + sum_{s,k} eps_s^k P[s][k] h.
/// P[s][k] is the operator of source s at order k+1; delta is the reference
/// expansion parameter (defaulted to max_s eps_s when nonpositive).
struct MultiSourceOperator {
    Matrix B;
    std::vector<std::vector<Matrix>> P;
    std::vector<double> eps;
    double delta = 0.0;
};

/// A stack of m-sized blocks forming one upper block-triangular system.
/// Blocks below the diagonal are implicitly zero; empty entries above it too.
struct BlockTriangularSystem {
    int block_size = 0;
    std::vector<std::vector<Matrix>> blocks;
    CVector ic;
    std::vector<Complex> weights;

    Matrix flatten() const;
};

/// Closed-form solution of a lifted system. Evaluates the original variables
/// y(x) = Re(H sum_b w_b V_b Psi_b(x)) where Psi is the stacked triangular
/// solution; also exposes the reconstructed basis vector and the separated
/// unperturbed / perturbation contributions. Immutable and reentrant.
class LiftedSolution {
public:
    LiftedSolution(TriangularSolution triangular, Matrix hproj,
                   std::vector<Matrix> backtransforms, std::vector<Complex> weights,
                   int unperturbed_block);

    int dimension() const { return hproj_.rows(); }
    int basis_size() const { return hproj_.cols(); }
    int block_count() const { return static_cast<int>(weights_.size()); }
    double x0() const { return triangular_.x0(); }

    std::vector<double> y(double x) const;
    /// Reconstructed basis vector h(x) = sum_b w_b V_b Psi_b(x).
    CVector h(double x) const;
    std::vector<double> y_unperturbed(double x) const;
    std::vector<double> y_perturbation(double x) const;

    const TriangularSolution& triangular() const { return triangular_; }

private:
    CVector combine(double x, int only_block, bool exclude) const;

    TriangularSolution triangular_;
    Matrix hproj_;
    std::vector<Matrix> backtransforms_;
    std::vector<Complex> weights_;
    std::vector<Matrix> projected_;  // hproj * w_b * V_b per block
    int unperturbed_block_ = 0;
};

/// Schur-decompose M and solve dh/dx = M h directly.
LiftedSolution solve_direct(const Matrix& m, const Matrix& hproj,
                            std::span<const double> h0, double x0,
                            double eps_eig = 0.0, int max_iter = 30);

/// Exact split h = h_m + eps h_p: diagonal blocks are the Schur factors of
/// both M and B, coupled by W^-1 P V. Exact up to round-off for any epsilon.
LiftedSolution solve_exact_decomposition(const SplitOperator& split, const Matrix& hproj,
                                         std::span<const double> h0, double x0,
                                         double eps_eig = 0.0, int max_iter = 30);

/// First-order expansion: only B is decomposed; both diagonal blocks carry T
/// with coupling V^-1 P V; h = V (Phi_m + eps Phi_p).
LiftedSolution solve_approx_first_order(const SplitOperator& split, const Matrix& hproj,
                                        std::span<const double> h0, double x0,
                                        double eps_eig = 0.0, int max_iter = 30);

/// Expansion h = sum_i eps^i h^(i) up to order tau: a (tau+1)-block bidiagonal
/// system with T on the diagonal and V^-1 P V above it.
LiftedSolution solve_higher_order(const SplitOperator& split, const Matrix& hproj,
                                  std::span<const double> h0, double x0, int tau_order,
                                  double eps_eig = 0.0, int max_iter = 30,
                                  long long solver_cap = kDefaultSolverCap);

/// Multi-source expansion in the reference parameter delta with aggregated
/// couplings Q^(j) = sum_s (eps_s/delta)^j P[s][j].
LiftedSolution solve_multi_source(const MultiSourceOperator& sources, const Matrix& hproj,
                                  std::span<const double> h0, double x0, int tau_order,
                                  double eps_eig = 0.0, int max_iter = 30,
                                  long long solver_cap = kDefaultSolverCap);

}  // namespace schurode
