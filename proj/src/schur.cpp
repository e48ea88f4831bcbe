#include "schurode/schur.hpp"

#include <cmath>
#include <vector>

namespace schurode {

namespace {

struct Givens {
    double c = 1.0;
    Complex s = 0.0;
};

// Rotation G = [[c, s], [-conj(s), c]] with G * (a, b)^t = (r, 0)^t.
Givens make_givens(Complex a, Complex b) {
    Givens g;
    const double aa = std::abs(a);
    const double ab = std::abs(b);
    if (ab == 0.0) {
        g.c = 1.0;
        g.s = 0.0;
    } else if (aa == 0.0) {
        g.c = 0.0;
        g.s = std::conj(b) / ab;
    } else {
        const double nrm = std::hypot(aa, ab);
        const Complex phase = a / aa;
        g.c = aa / nrm;
        g.s = phase * std::conj(b) / nrm;
    }
    return g;
}

// Rows (i, i+1) of h, columns [c0, c1].
void apply_left(Matrix& h, const Givens& g, int i, int c0, int c1) {
    for (int j = c0; j <= c1; ++j) {
        const Complex x = h(i, j);
        const Complex y = h(i + 1, j);
        h(i, j) = g.c * x + g.s * y;
        h(i + 1, j) = -std::conj(g.s) * x + g.c * y;
    }
}

// Columns (i, i+1) of h, rows [r0, r1], multiplying by G^H from the right.
void apply_right(Matrix& h, const Givens& g, int i, int r0, int r1) {
    for (int r = r0; r <= r1; ++r) {
        const Complex x = h(r, i);
        const Complex y = h(r, i + 1);
        h(r, i) = g.c * x + std::conj(g.s) * y;
        h(r, i + 1) = -g.s * x + g.c * y;
    }
}

// Unitary similarity reduction to upper Hessenberg via Householder
// reflections, accumulated into v.
void hessenberg_reduce(Matrix& h, Matrix& v) {
    const int n = h.rows();
    CVector w(n);
    for (int k = 0; k + 2 < n; ++k) {
        double xnorm2 = 0.0;
        for (int i = k + 1; i < n; ++i) xnorm2 += std::norm(h(i, k));
        const double xnorm = std::sqrt(xnorm2);
        if (xnorm == 0.0) continue;

        const Complex alpha = h(k + 1, k);
        const double aa = std::abs(alpha);
        const Complex phase = (aa == 0.0) ? Complex(1.0) : alpha / aa;
        const Complex beta = -phase * xnorm;

        // w spans the reflector; normalized below.
        double wnorm2 = 0.0;
        w[0] = alpha - beta;
        wnorm2 += std::norm(w[0]);
        for (int i = k + 2; i < n; ++i) {
            w[i - k - 1] = h(i, k);
            wnorm2 += std::norm(w[i - k - 1]);
        }
        if (wnorm2 == 0.0) continue;
        const double winv = 1.0 / std::sqrt(wnorm2);
        const int len = n - k - 1;
        for (int i = 0; i < len; ++i) w[i] *= winv;

        // h := (I - 2 w w*) h on rows k+1.., columns k..n-1
        for (int j = k; j < n; ++j) {
            Complex dot(0.0);
            for (int i = 0; i < len; ++i) dot += std::conj(w[i]) * h(k + 1 + i, j);
            dot *= 2.0;
            for (int i = 0; i < len; ++i) h(k + 1 + i, j) -= dot * w[i];
        }
        // h := h (I - 2 w w*) on columns k+1..
        for (int r = 0; r < n; ++r) {
            Complex dot(0.0);
            for (int i = 0; i < len; ++i) dot += h(r, k + 1 + i) * w[i];
            dot *= 2.0;
            for (int i = 0; i < len; ++i) h(r, k + 1 + i) -= dot * std::conj(w[i]);
        }
        // v := v (I - 2 w w*)
        for (int r = 0; r < n; ++r) {
            Complex dot(0.0);
            for (int i = 0; i < len; ++i) dot += v(r, k + 1 + i) * w[i];
            dot *= 2.0;
            for (int i = 0; i < len; ++i) v(r, k + 1 + i) -= dot * std::conj(w[i]);
        }

        h(k + 1, k) = beta;
        for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

Complex wilkinson_shift(const Matrix& h, int hi) {
    const Complex a = h(hi - 1, hi - 1);
    const Complex b = h(hi - 1, hi);
    const Complex c = h(hi, hi - 1);
    const Complex d = h(hi, hi);
    const Complex half_tr = 0.5 * (a + d);
    const Complex disc = std::sqrt(half_tr * half_tr - (a * d - b * c));
    const Complex l1 = half_tr + disc;
    const Complex l2 = half_tr - disc;
    return (std::abs(l1 - d) <= std::abs(l2 - d)) ? l1 : l2;
}

// One explicit shifted QR sweep on the window [lo, hi], accumulated into v.
void qr_step(Matrix& h, Matrix& v, int lo, int hi, Complex shift) {
    const int n = h.rows();
    for (int i = lo; i <= hi; ++i) h(i, i) -= shift;

    std::vector<Givens> rot(hi - lo);
    for (int i = lo; i < hi; ++i) {
        Givens g = make_givens(h(i, i), h(i + 1, i));
        apply_left(h, g, i, i, n - 1);
        h(i + 1, i) = 0.0;
        rot[i - lo] = g;
    }
    for (int i = lo; i < hi; ++i) {
        apply_right(h, rot[i - lo], i, 0, i + 1);
        apply_right(v, rot[i - lo], i, 0, n - 1);
    }
    for (int i = lo; i <= hi; ++i) h(i, i) += shift;
}

}  // namespace

SchurForm schur_decompose(const Matrix& a, int max_iter) {
    if (!a.is_square()) {
        throw DimensionError("schur_decompose: matrix must be square");
    }
    if (max_iter <= 0) {
        throw std::invalid_argument("schur_decompose: max_iter must be positive");
    }
    a.ensure_finite("schur_decompose");

    const int n = a.rows();
    const double source_norm = a.frobenius_norm();
    Matrix h = a;
    Matrix v = Matrix::identity(n);
    hessenberg_reduce(h, v);

    // The budget is amortized over the whole matrix, as in standard shifted-QR
    // practice: defective clusters may need far more sweeps than the average.
    const long long budget = static_cast<long long>(max_iter) * n;
    long long total_iter = 0;
    int hi = n - 1;
    int stagnant = 0;
    while (hi > 0) {
        // Deflate negligible subdiagonal entries in the leading part.
        for (int i = hi; i >= 1; --i) {
            const double thresh =
                1e-14 * (std::abs(h(i - 1, i - 1)) + std::abs(h(i, i)));
            if (std::abs(h(i, i - 1)) <= thresh) h(i, i - 1) = 0.0;
        }
        if (h(hi, hi - 1) == Complex(0.0)) {
            --hi;
            stagnant = 0;
            continue;
        }
        if (total_iter >= budget) {
            throw ConvergenceError(
                "schur_decompose: QR iteration failed to converge", n - 1 - hi);
        }

        int lo = hi;
        while (lo > 0 && h(lo, lo - 1) != Complex(0.0)) --lo;

        Complex shift;
        if (stagnant > 0 && stagnant % 10 == 0) {
            // Exceptional shift to break rare symmetric cycles.
            shift = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1));
        } else {
            shift = wilkinson_shift(h, hi);
        }
        qr_step(h, v, lo, hi, shift);
        ++stagnant;
        ++total_iter;
    }

    // Downstream recursions index the upper triangle only; store exact zeros.
    for (int i = 1; i < n; ++i) {
        for (int j = 0; j < i; ++j) h(i, j) = 0.0;
    }
    h.ensure_finite("schur_decompose result");
    return SchurForm{std::move(h), std::move(v), source_norm};
}

}  // namespace schurode
