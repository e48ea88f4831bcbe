#include "schurode/oracles.hpp"

#include <cmath>

namespace schurode {

namespace {

double ipow(double base, int exp) {
    double acc = 1.0;
    double b = base;
    for (int e = exp; e > 0; e >>= 1) {
        if (e & 1) acc *= b;
        if (e > 1) b *= b;
    }
    return acc;
}

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

// One RK4 step of size h from state y, with compensated accumulation so
// rounding does not drift over long windows (comp carries the running
// low-order bits per component).
void rk4_step(const PolynomialODE& sys, std::vector<double>& y,
              std::vector<double>& comp, double h) {
    const size_t n = y.size();
    const std::vector<double> k1 = sys.rhs(y);
    std::vector<double> tmp(n);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    const std::vector<double> k2 = sys.rhs(tmp);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    const std::vector<double> k3 = sys.rhs(tmp);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    const std::vector<double> k4 = sys.rhs(tmp);
    for (size_t i = 0; i < n; ++i) {
        const double delta =
            h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) - comp[i];
        const double next = y[i] + delta;
        comp[i] = (next - y[i]) - delta;
        y[i] = next;
    }
}

}  // namespace

void Trajectory::attach_reference(std::vector<std::vector<double>> reference) {
    if (reference.size() != y.size()) {
        throw DimensionError("attach_reference: sample count mismatch");
    }
    ref = std::move(reference);
    err.assign(y.size(), {});
    for (size_t s = 0; s < y.size(); ++s) {
        if (ref[s].size() != y[s].size()) {
            throw DimensionError("attach_reference: state length mismatch");
        }
        err[s].resize(y[s].size());
        for (size_t i = 0; i < y[s].size(); ++i) {
            err[s][i] = std::abs(y[s][i] - ref[s][i]);
        }
    }
}

Matrix matrix_exponential(const Matrix& a, double x) {
    if (!a.is_square()) {
        throw DimensionError("matrix_exponential: matrix must be square");
    }
    const int n = a.rows();
    Matrix b = a * Complex(x);

    // Scale until the 1-norm is at most 1/2, then square back.
    double norm1 = 0.0;
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) col += std::abs(b(i, j));
        norm1 = std::max(norm1, col);
    }
    int squarings = 0;
    while (norm1 > 0.5 && squarings < 64) {
        norm1 *= 0.5;
        ++squarings;
    }
    b = b * Complex(std::ldexp(1.0, -squarings));

    Matrix e = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 200; ++k) {
        term = (term * b) * Complex(1.0 / k);
        e = e + term;
        if (term.frobenius_norm() <= 1e-16 * e.frobenius_norm()) break;
    }
    for (int s = 0; s < squarings; ++s) e = e * e;
    return e;
}

CVector matrix_exponential_apply(const Matrix& a, double x, const CVector& y0) {
    return matrix_exponential(a, x).apply(y0);
}

std::vector<double> matrix_exponential_apply(const Matrix& a, double x,
                                             std::span<const double> y0) {
    return real_part(matrix_exponential(a, x).apply(y0));
}

namespace {

// Advance from `from` to `target` in whole steps plus one exact remainder.
// Step boundaries are derived as from + k*step rather than accumulated, so
// the labeled time and the true elapsed time agree to one rounding per
// segment; otherwise the time label drifts by ~n_steps * ulp over long runs.
void march_segment(const PolynomialODE& sys, std::vector<double>& y,
                   std::vector<double>& comp, double from, double target, double step,
                   const char* context) {
    const double length = target - from;
    if (!(length > 0.0)) return;
    const long long whole = static_cast<long long>(std::floor(length / step));
    for (long long k = 0; k < whole; ++k) {
        rk4_step(sys, y, comp, step);
        if (!all_finite(y)) {
            throw DivergenceError(std::string(context) + ": state diverged",
                                  from + static_cast<double>(k + 1) * step);
        }
    }
    const double rest = std::fma(static_cast<double>(-whole), step, length);
    if (rest > 0.0) {
        rk4_step(sys, y, comp, rest);
        if (!all_finite(y)) {
            throw DivergenceError(std::string(context) + ": state diverged", target);
        }
    }
}

}  // namespace

Trajectory rk_integrate(const PolynomialODE& sys, std::span<const double> y0,
                        double x0, double x1, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("rk_integrate: step must be positive");
    if (x1 < x0) throw std::invalid_argument("rk_integrate: x1 must be >= x0");

    Trajectory out;
    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> comp(y.size(), 0.0);
    out.x.push_back(x0);
    out.y.push_back(y);
    const double length = x1 - x0;
    const long long whole = (length > 0.0)
                                ? static_cast<long long>(std::floor(length / step))
                                : 0;
    for (long long k = 0; k < whole; ++k) {
        rk4_step(sys, y, comp, step);
        const double x = x0 + static_cast<double>(k + 1) * step;
        if (!all_finite(y)) {
            throw DivergenceError("rk_integrate: state diverged", x);
        }
        out.x.push_back(x);
        out.y.push_back(y);
    }
    const double rest = std::fma(static_cast<double>(-whole), step, length);
    if (rest > 0.0) {
        rk4_step(sys, y, comp, rest);
        if (!all_finite(y)) {
            throw DivergenceError("rk_integrate: state diverged", x1);
        }
        out.x.push_back(x1);
        out.y.push_back(y);
    } else if (whole > 0) {
        out.x.back() = x1;  // the last whole step landed on x1
    }
    return out;
}

std::vector<std::vector<double>> rk_reference(const PolynomialODE& sys,
                                              std::span<const double> y0, double x0,
                                              std::span<const double> xs, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("rk_reference: step must be positive");
    std::vector<std::vector<double>> out;
    out.reserve(xs.size());
    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> comp(y.size(), 0.0);
    double x = x0;
    for (double target : xs) {
        if (target < x - 1e-15) {
            throw std::invalid_argument("rk_reference: sample points must be non-decreasing");
        }
        march_segment(sys, y, comp, x, target, step, "rk_reference");
        x = std::max(x, target);
        out.push_back(y);
    }
    return out;
}

QuadratureRule gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    QuadratureRule rule;
    rule.order = order;
    rule.points.assign(order, 0.0);
    rule.weights.assign(order, 0.0);

    const int half = order / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = -p1 / dp;
            x += dx;
            if (std::abs(dx) <= 1e-15) break;
        }
        {
            // refresh dp at the converged node
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[order - 1 - i] = x;
        rule.points[i] = -x;
        rule.weights[order - 1 - i] = w;
        rule.weights[i] = w;
    }
    if (order % 2 == 1) {
        // middle node is exactly zero by symmetry
        double p0 = 1.0;
        double p1 = 0.0;
        for (int k = 2; k <= order; ++k) {
            const double pk = -(k - 1.0) * p0 / k;
            p0 = p1;
            p1 = pk;
        }
        const double dp = order * (0.0 * p1 - p0) / (0.0 - 1.0);
        rule.points[half] = 0.0;
        rule.weights[half] = 2.0 / (dp * dp);
    }
    return rule;
}

double quadrature_inner_product(std::span<const WeightedMonomial> f,
                                std::span<const WeightedMonomial> g, int n, int order) {
    if (n < 1) throw std::invalid_argument("quadrature_inner_product: n must be >= 1");
    for (int d = 0; d < n; ++d) {
        int fmax = 0;
        int gmax = 0;
        for (const auto& t : f) fmax = std::max(fmax, t.exponents.at(d));
        for (const auto& t : g) gmax = std::max(gmax, t.exponents.at(d));
        if (fmax + gmax > 2 * order - 1) {
            throw UnderResolutionError(
                "quadrature_inner_product: rule of order " + std::to_string(order) +
                " cannot integrate per-axis degree " + std::to_string(fmax + gmax));
        }
    }
    const QuadratureRule rule = gauss_legendre(order);

    std::vector<int> idx(n, 0);
    std::vector<double> pt(n);
    double total = 0.0;
    while (true) {
        double w = 1.0;
        for (int d = 0; d < n; ++d) {
            pt[d] = rule.points[idx[d]];
            w *= rule.weights[idx[d]];
        }
        double fv = 0.0;
        for (const auto& t : f) {
            double v = t.coeff;
            for (int d = 0; d < n; ++d) v *= ipow(pt[d], t.exponents[d]);
            fv += v;
        }
        double gv = 0.0;
        for (const auto& t : g) {
            double v = t.coeff;
            for (int d = 0; d < n; ++d) v *= ipow(pt[d], t.exponents[d]);
            gv += v;
        }
        total += w * fv * gv;

        int d = 0;
        while (d < n && ++idx[d] == rule.order) {
            idx[d] = 0;
            ++d;
        }
        if (d == n) break;
    }
    return total;
}

}  // namespace schurode
