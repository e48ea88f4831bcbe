#pragma once

#include <complex>
#include <span>
#include <vector>

#include "schurode/errors.hpp"

namespace schurode {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// Dense complex matrix, row-major. Entries are validated to be finite
/// whenever a matrix is built from data or produced by arithmetic.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);
    Matrix(int rows, int cols, std::vector<Complex> entries);

    static Matrix identity(int n);
    static Matrix from_real(int rows, int cols, std::span<const double> entries);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }
    bool is_square() const { return rows_ == cols_; }

    Complex& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    const Complex& operator()(int i, int j) const {
        return data_[static_cast<size_t>(i) * cols_ + j];
    }

    Matrix operator+(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator*(Complex scalar) const;
    Matrix operator*(double scalar) const { return *this * Complex(scalar); }

    CVector apply(std::span<const Complex> x) const;
    CVector apply(std::span<const double> x) const;

    Matrix conjugate_transpose() const;

    double frobenius_norm() const;
    double max_abs() const;
    /// Strict lower triangle exactly zero.
    bool is_upper_triangular() const;

    void ensure_finite(const char* context) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Complex> data_;
};

/// Conjugate transpose of a square unitary matrix (its inverse).
Matrix unitary_inverse(const Matrix& v);

Matrix matmul(const Matrix& a, const Matrix& b);
CVector matvec(const Matrix& a, std::span<const Complex> x);

// Small vector helpers shared across the solvers.
CVector to_complex(std::span<const double> x);
std::vector<double> real_part(const CVector& x);
double max_abs(std::span<const Complex> x);
double max_abs(std::span<const double> x);
double max_imag_abs(const CVector& x);

}  // namespace schurode
