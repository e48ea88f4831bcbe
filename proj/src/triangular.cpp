#include "schurode/triangular.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace schurode {

namespace {

const std::vector<Complex> kEmptyPoly;

void require_upper_triangular(const Matrix& t, const char* context) {
    if (!t.is_square()) {
        throw DimensionError(std::string(context) + ": matrix must be square");
    }
    if (!t.is_upper_triangular()) {
        throw DimensionError(std::string(context) +
                             ": matrix must be upper triangular with exact zeros");
    }
}

}  // namespace

Complex CouplingPolynomials::coeff(int i, int j, int k) const {
    if (j <= i || k < 0) return 0.0;
    const auto& p = polys_[pair_index(i, j)];
    if (static_cast<size_t>(k) >= p.size()) return 0.0;
    return p[k];
}

const std::vector<Complex>& CouplingPolynomials::poly(int i, int j) const {
    if (j <= i) return kEmptyPoly;
    return polys_[pair_index(i, j)];
}

Complex CouplingPolynomials::eval(int i, int j, double x) const {
    const auto& p = poly(i, j);
    if (p.empty()) return 0.0;
    Complex acc = p.back();
    for (size_t k = p.size() - 1; k-- > 0;) acc = acc * x + p[k];
    return acc;
}

double default_eps_eig(const Matrix& t) {
    return 1e-8 * std::max(1.0, t.frobenius_norm());
}

CouplingPolynomials coupling_polynomials(const Matrix& t, double eps_eig) {
    require_upper_triangular(t, "coupling_polynomials");
    const int n = t.rows();

    CouplingPolynomials out;
    out.n_ = n;
    out.eps_eig_ = eps_eig;
    out.polys_.resize(static_cast<size_t>(n) * (n - 1) / 2);
    out.diag_.min_separation = std::numeric_limits<double>::infinity();

    std::vector<Complex> source;
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) {
            // source(x) = sum_{m=i+1}^{j-1} T_mj r_im(x)
            source.clear();
            for (int m = i + 1; m < j; ++m) {
                const Complex tmj = t(m, j);
                if (tmj == Complex(0.0)) continue;
                const auto& rim = out.polys_[out.pair_index(i, m)];
                if (rim.size() > source.size()) source.resize(rim.size(), Complex(0.0));
                for (size_t k = 0; k < rim.size(); ++k) source[k] += tmj * rim[k];
            }

            const Complex gap = t(j, j) - t(i, i);
            std::vector<Complex> p;
            if (std::abs(gap) <= eps_eig) {
                ++out.diag_.equal_pairs;
                // x^0 identification no longer constrains p_0; set it to zero.
                p.assign(std::max<size_t>(source.size() + 1, 2), Complex(0.0));
                p[1] = t(i, j);
                if (!source.empty()) p[1] -= source[0];
                for (size_t k = 2; k <= source.size(); ++k) {
                    p[k] = -source[k - 1] / static_cast<double>(k);
                }
            } else {
                out.diag_.min_separation =
                    std::min(out.diag_.min_separation, std::abs(gap));
                p.assign(std::max<size_t>(source.size(), 1), Complex(0.0));
                for (int k = static_cast<int>(source.size()) - 1; k >= 1; --k) {
                    Complex acc = source[k];
                    if (static_cast<size_t>(k + 1) < p.size()) {
                        acc += static_cast<double>(k + 1) * p[k + 1];
                    }
                    p[k] = -acc / gap;
                }
                Complex acc = t(i, j);
                if (p.size() > 1) acc -= p[1];
                if (!source.empty()) acc -= source[0];
                p[0] = acc / gap;
            }
            while (!p.empty() && p.back() == Complex(0.0)) p.pop_back();
            out.polys_[out.pair_index(i, j)] = std::move(p);
        }
    }
    return out;
}

TriangularSolution::TriangularSolution(const Matrix& t, CouplingPolynomials couplings,
                                       CVector constants, double x0)
    : couplings_(std::move(couplings)), constants_(std::move(constants)), x0_(x0) {
    require_upper_triangular(t, "TriangularSolution");
    if (t.rows() != couplings_.size() ||
        constants_.size() != static_cast<size_t>(t.rows())) {
        throw DimensionError("TriangularSolution: size mismatch");
    }
    diag_.resize(t.rows());
    for (int i = 0; i < t.rows(); ++i) diag_[i] = t(i, i);
}

CVector TriangularSolution::at(double x) const {
    const int n = size();
    CVector phi(n);
    for (int i = n - 1; i >= 0; --i) {
        Complex acc = constants_[i] * std::exp(diag_[i] * x);
        for (int j = i + 1; j < n; ++j) {
            const auto& p = couplings_.poly(i, j);
            if (p.empty()) continue;
            Complex r = p.back();
            for (size_t k = p.size() - 1; k-- > 0;) r = r * x + p[k];
            acc += r * phi[j];
        }
        phi[i] = acc;
    }
    return phi;
}

CVector triangular_constants(const Matrix& t, const CouplingPolynomials& couplings,
                             const CVector& phi0, double x0) {
    require_upper_triangular(t, "triangular_constants");
    const int n = t.rows();
    if (couplings.size() != n || phi0.size() != static_cast<size_t>(n)) {
        throw DimensionError("triangular_constants: size mismatch");
    }
    CVector c(n);
    for (int i = n - 1; i >= 0; --i) {
        Complex acc = phi0[i];
        for (int j = i + 1; j < n; ++j) acc -= couplings.eval(i, j, x0) * phi0[j];
        c[i] = acc * std::exp(-t(i, i) * x0);
    }
    return c;
}

TriangularSolution solve_triangular_ivp(const Matrix& t, const CVector& phi0,
                                        double x0, double eps_eig) {
    if (eps_eig <= 0.0) eps_eig = default_eps_eig(t);
    CouplingPolynomials couplings = coupling_polynomials(t, eps_eig);
    CVector constants = triangular_constants(t, couplings, phi0, x0);
    return TriangularSolution(t, std::move(couplings), std::move(constants), x0);
}

ExpPolySolution solve_linear_ivp(const Matrix& a, const CVector& y0, double x0,
                                 double eps_eig, int max_iter) {
    if (!a.is_square()) {
        throw DimensionError("solve_linear_ivp: matrix must be square");
    }
    if (y0.size() != static_cast<size_t>(a.rows())) {
        throw DimensionError("solve_linear_ivp: initial state length mismatch");
    }
    SchurForm schur = schur_decompose(a, max_iter);
    const CVector phi0 = unitary_inverse(schur.V).apply(y0);
    TriangularSolution tri = solve_triangular_ivp(schur.T, phi0, x0, eps_eig);
    return ExpPolySolution(std::move(schur), std::move(tri));
}

ExpPolySolution solve_linear_ivp(const Matrix& a, std::span<const double> y0,
                                 double x0, double eps_eig, int max_iter) {
    return solve_linear_ivp(a, to_complex(y0), x0, eps_eig, max_iter);
}

}  // namespace schurode
