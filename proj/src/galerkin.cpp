#include "schurode/galerkin.hpp"

#include <cmath>
#include <map>
#include <string>

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

void check_basis_args(int n, int sigma) {
    if (n < 1) throw std::invalid_argument("basis dimension must be >= 1");
    if (sigma < 0) throw std::invalid_argument("basis order must be >= 0");
}

}  // namespace

long long basis_number(int n, int sigma, long long cap) {
    check_basis_args(n, sigma);
    long long m = 1;
    for (int i = 1; i <= n; ++i) {
        // m stays integral at every step: it equals binomial(sigma + i, i).
        m = m * (sigma + i) / i;
        if (m > cap) {
            throw CapacityError("basis_number: basis count " + std::to_string(m) +
                                    " exceeds cap " + std::to_string(cap),
                                m, cap);
        }
    }
    return m;
}

BasisIndex ordering(int n, int sigma, long long cap) {
    const long long m = basis_number(n, sigma, cap);
    BasisIndex out;
    out.n = n;
    out.sigma = sigma;
    out.m = static_cast<int>(m);
    out.exponents.reserve(out.m);
    out.exponents.emplace_back(n, 0);

    // Digital counter per grade: start from (k, 0, ..., 0) and count until the
    // tuple (0, ..., 0, k) has been emitted, keeping tuples whose total is k.
    for (int k = 1; k <= sigma; ++k) {
        std::vector<int> tuple(n, 0);
        tuple[0] = k;
        out.exponents.push_back(tuple);
        while (tuple[n - 1] != k) {
            ++tuple[0];
            for (int i = 0; i + 1 < n; ++i) {
                if (tuple[i] <= k) break;
                tuple[i] = 0;
                ++tuple[i + 1];
            }
            int total = 0;
            for (int e : tuple) total += e;
            if (total == k) out.exponents.push_back(tuple);
        }
    }
    if (static_cast<long long>(out.exponents.size()) != m) {
        throw std::logic_error("ordering: enumeration does not match basis_number");
    }
    return out;
}

Legendre1D legendre_tables(int sigma) {
    check_basis_args(1, sigma);
    Legendre1D out;
    out.sigma = sigma;
    const int rows = sigma + 1;
    out.L.assign(rows, std::vector<double>(rows, 0.0));
    out.N = out.L;
    out.D = out.L;

    out.L[0][0] = 1.0;
    if (sigma >= 1) out.L[1][1] = 1.0;
    for (int d = 2; d <= sigma; ++d) {
        for (int j = 0; j < d; ++j) {
            out.L[d][j + 1] += (2.0 * d - 1.0) / d * out.L[d - 1][j];
            out.L[d][j] -= (d - 1.0) / d * out.L[d - 2][j];
        }
    }
    for (int d = 0; d <= sigma; ++d) {
        const double scale = std::sqrt((2.0 * d + 1.0) / 2.0);
        for (int j = 0; j <= sigma; ++j) out.N[d][j] = scale * out.L[d][j];
    }
    for (int d = 0; d <= sigma; ++d) {
        for (int j = 1; j <= sigma; ++j) out.D[d][j - 1] = j * out.N[d][j];
    }
    return out;
}

std::vector<std::vector<double>> multidim_legendre(const BasisIndex& basis,
                                                   const Legendre1D& oned) {
    if (oned.sigma < basis.sigma) {
        throw DimensionError("multidim_legendre: 1-D tables shorter than basis order");
    }
    const int m = basis.m;
    const int n = basis.n;
    std::vector<std::vector<double>> table(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            double prod = 1.0;
            for (int k = 0; k < n; ++k) {
                prod *= oned.N[basis.exponents[i][k]][basis.exponents[j][k]];
                if (prod == 0.0) break;
            }
            table[i][j] = prod;
        }
    }
    return table;
}

double monomial_integral(std::span<const int> gamma) {
    double denom = 1.0;
    for (int g : gamma) {
        if (g < 0) throw std::invalid_argument("monomial_integral: negative exponent");
        if (g % 2 == 1) return 0.0;
        denom *= g + 1;
    }
    return std::ldexp(1.0, static_cast<int>(gamma.size())) / denom;
}

Matrix operator_matrix(const PolynomialODE& sys, const BasisIndex& basis,
                       const Legendre1D& oned,
                       const std::vector<std::vector<double>>& lmulti,
                       long long monomial_cap) {
    const int n = basis.n;
    const int m = basis.m;
    if (sys.dimension() != n) {
        throw DimensionError("operator_matrix: system dimension does not match basis");
    }
    if (sys.has_explicit_x()) {
        throw std::invalid_argument("operator_matrix: system must be autonomous");
    }
    if (lmulti.size() != static_cast<size_t>(m)) {
        throw DimensionError("operator_matrix: multidimensional table size mismatch");
    }

    // Sparse views of each basis polynomial's monomials.
    std::vector<std::vector<std::pair<int, double>>> basis_monomials(m);
    for (int j = 0; j < m; ++j) {
        for (int u = 0; u < m; ++u) {
            if (lmulti[j][u] != 0.0) basis_monomials[j].push_back({u, lmulti[j][u]});
        }
    }

    const double eta = std::ldexp(1.0, n);  // 2^n
    Matrix mmat(m, m);
    std::vector<double> partial(static_cast<size_t>(n) * m);

    for (int i = 0; i < m; ++i) {
        // Partial derivatives of basis i over the monomial table: the factor in
        // the derived variable uses D, every other factor uses N.
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < m; ++j) {
                double prod = 1.0;
                for (int h = 0; h < n; ++h) {
                    const auto& tbl = (h == k) ? oned.D : oned.N;
                    prod *= tbl[basis.exponents[i][h]][basis.exponents[j][h]];
                    if (prod == 0.0) break;
                }
                partial[static_cast<size_t>(k) * m + j] = prod;
            }
        }

        // Total derivative grad(h_i) . f as a merged sparse monomial list.
        std::map<std::vector<int>, double> total;
        for (int k = 0; k < n; ++k) {
            for (const Monomial& mono : sys.equations()[k]) {
                for (int j = 0; j < m; ++j) {
                    const double pj = partial[static_cast<size_t>(k) * m + j];
                    if (pj == 0.0) continue;
                    std::vector<int> key(n);
                    for (int d = 0; d < n; ++d) {
                        key[d] = mono.exponents[d] + basis.exponents[j][d];
                    }
                    total[std::move(key)] += mono.kappa * pj;
                    if (static_cast<long long>(total.size()) > monomial_cap) {
                        throw CapacityError(
                            "operator_matrix: intermediate monomial count exceeds cap",
                            static_cast<long long>(total.size()), monomial_cap);
                    }
                }
            }
        }

        // Inner products against every basis polynomial via parity integrals;
        // any odd summed exponent contributes zero and is skipped.
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (const auto& [exps, coeff] : total) {
                for (const auto& [u, w] : basis_monomials[j]) {
                    bool odd = false;
                    double denom = 1.0;
                    for (int d = 0; d < n; ++d) {
                        const int g = exps[d] + basis.exponents[u][d];
                        if (g % 2 == 1) {
                            odd = true;
                            break;
                        }
                        denom *= g + 1;
                    }
                    if (!odd) acc += coeff * w * (eta / denom);
                }
            }
            mmat(i, j) = acc;
        }
    }
    return mmat;
}

Matrix projection_matrix(int n, int m) {
    check_basis_args(n, 0);
    if (m < n + 1) {
        throw DimensionError("projection_matrix: basis must include all first-order rows");
    }
    Matrix h(n, m);
    const double psi = std::sqrt(std::ldexp(1.0, n) / 3.0);
    for (int i = 0; i < n; ++i) h(i, i + 1) = psi;
    return h;
}

std::vector<double> boundary_conditions(const std::vector<std::vector<double>>& lmulti,
                                        const BasisIndex& basis,
                                        std::span<const double> y0) {
    if (y0.size() != static_cast<size_t>(basis.n)) {
        throw DimensionError("boundary_conditions: initial state length mismatch");
    }
    const int m = basis.m;
    if (lmulti.size() != static_cast<size_t>(m)) {
        throw DimensionError("boundary_conditions: table size mismatch");
    }
    // Monomial values at y0, shared across rows.
    std::vector<double> mono(m);
    for (int j = 0; j < m; ++j) {
        double v = 1.0;
        for (int k = 0; k < basis.n; ++k) v *= ipow(y0[k], basis.exponents[j][k]);
        mono[j] = v;
    }
    std::vector<double> h0(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            if (lmulti[i][j] != 0.0) acc += lmulti[i][j] * mono[j];
        }
        h0[i] = acc;
    }
    return h0;
}

GalerkinSystem build_galerkin(const PolynomialODE& sys, int sigma,
                              std::span<const double> y0, long long basis_cap,
                              long long monomial_cap) {
    GalerkinSystem out;
    out.basis = ordering(sys.dimension(), sigma, basis_cap);
    out.oned = legendre_tables(sigma);
    out.lmulti = multidim_legendre(out.basis, out.oned);
    out.M = operator_matrix(sys, out.basis, out.oned, out.lmulti, monomial_cap);
    out.H = projection_matrix(out.basis.n, out.basis.m);
    out.h0 = boundary_conditions(out.lmulti, out.basis, y0);
    return out;
}

}  // namespace schurode
