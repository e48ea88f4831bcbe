#pragma once

#include "schurode/matrix.hpp"

namespace schurode {

/// Complex Schur form A = V T V*, with T upper triangular (exact zeros stored
/// below the diagonal) and V unitary. The diagonal of T carries the
/// eigenvalues of A in deflation order.
struct SchurForm {
    Matrix T;
    Matrix V;
    double source_norm = 0.0;  // Frobenius norm of the decomposed matrix
};

/// Decompose a square matrix by Hessenberg reduction followed by shifted QR
/// iteration (Wilkinson shifts, deflation of negligible subdiagonals).
/// `max_iter` is the iteration budget per eigenvalue; exhausting it raises
/// ConvergenceError carrying the number of eigenvalues already deflated.
SchurForm schur_decompose(const Matrix& a, int max_iter = 30);

}  // namespace schurode
