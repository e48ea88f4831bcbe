#include "schurode/matrix.hpp"

#include <cmath>
#include <utility>

namespace schurode {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void check_positive(int rows, int cols) {
    if (rows <= 0 || cols <= 0) {
        throw DimensionError("matrix dimensions must be positive");
    }
}

}  // namespace

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    check_positive(rows, cols);
    data_.assign(static_cast<size_t>(rows) * cols, Complex(0.0));
}

Matrix::Matrix(int rows, int cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    check_positive(rows, cols);
    if (data_.size() != static_cast<size_t>(rows) * cols) {
        throw DimensionError("entry count does not match matrix dimensions");
    }
    ensure_finite("matrix construction");
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_real(int rows, int cols, std::span<const double> entries) {
    if (entries.size() != static_cast<size_t>(rows) * cols) {
        throw DimensionError("entry count does not match matrix dimensions");
    }
    Matrix m(rows, cols);
    for (size_t i = 0; i < entries.size(); ++i) m.data_[i] = entries[i];
    m.ensure_finite("matrix construction");
    return m;
}

void Matrix::ensure_finite(const char* context) const {
    for (const Complex& z : data_) {
        if (!finite(z)) {
            throw std::invalid_argument(std::string(context) + ": non-finite entry");
        }
    }
}

Matrix Matrix::operator+(const Matrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
        throw DimensionError("matrix addition: shape mismatch");
    }
    Matrix out(rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + rhs.data_[i];
    out.ensure_finite("matrix addition");
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
        throw DimensionError("matrix subtraction: shape mismatch");
    }
    Matrix out(rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - rhs.data_[i];
    out.ensure_finite("matrix subtraction");
    return out;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) {
        throw DimensionError("matrix product: inner dimensions do not agree");
    }
    Matrix out(rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int k = 0; k < cols_; ++k) {
            const Complex aik = (*this)(i, k);
            if (aik == Complex(0.0)) continue;
            for (int j = 0; j < rhs.cols_; ++j) {
                out(i, j) += aik * rhs(k, j);
            }
        }
    }
    out.ensure_finite("matrix product");
    return out;
}

Matrix Matrix::operator*(Complex scalar) const {
    Matrix out(rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * scalar;
    out.ensure_finite("matrix scaling");
    return out;
}

CVector Matrix::apply(std::span<const Complex> x) const {
    if (static_cast<int>(x.size()) != cols_) {
        throw DimensionError("matvec: vector length does not match column count");
    }
    CVector out(rows_, Complex(0.0));
    for (int i = 0; i < rows_; ++i) {
        Complex acc(0.0);
        const Complex* row = &data_[static_cast<size_t>(i) * cols_];
        for (int j = 0; j < cols_; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
    return out;
}

CVector Matrix::apply(std::span<const double> x) const {
    CVector cx(x.begin(), x.end());
    return apply(std::span<const Complex>(cx));
}

Matrix Matrix::conjugate_transpose() const {
    Matrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i) {
        for (int j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    }
    return out;
}

double Matrix::frobenius_norm() const {
    double acc = 0.0;
    for (const Complex& z : data_) acc += std::norm(z);
    return std::sqrt(acc);
}

double Matrix::max_abs() const {
    double acc = 0.0;
    for (const Complex& z : data_) acc = std::max(acc, std::abs(z));
    return acc;
}

bool Matrix::is_upper_triangular() const {
    for (int i = 1; i < rows_; ++i) {
        for (int j = 0; j < std::min(i, cols_); ++j) {
            if ((*this)(i, j) != Complex(0.0)) return false;
        }
    }
    return true;
}

Matrix unitary_inverse(const Matrix& v) {
    if (!v.is_square()) {
        throw DimensionError("unitary_inverse: matrix must be square");
    }
    return v.conjugate_transpose();
}

Matrix matmul(const Matrix& a, const Matrix& b) { return a * b; }

CVector matvec(const Matrix& a, std::span<const Complex> x) { return a.apply(x); }

CVector to_complex(std::span<const double> x) { return CVector(x.begin(), x.end()); }

std::vector<double> real_part(const CVector& x) {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i].real();
    return out;
}

double max_abs(std::span<const Complex> x) {
    double acc = 0.0;
    for (const Complex& z : x) acc = std::max(acc, std::abs(z));
    return acc;
}

double max_abs(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc = std::max(acc, std::abs(v));
    return acc;
}

double max_imag_abs(const CVector& x) {
    double acc = 0.0;
    for (const Complex& z : x) acc = std::max(acc, std::abs(z.imag()));
    return acc;
}

}  // namespace schurode
