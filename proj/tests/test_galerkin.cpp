#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "schurode/galerkin.hpp"
#include "test_support.hpp"

using namespace schurode;
using namespace schurode::test;

TEST_CASE("basis_number matches binomial counts") {
    CHECK(basis_number(1, 3) == 4);
    CHECK(basis_number(2, 11) == 78);
    CHECK(basis_number(3, 2) == 10);
    CHECK(basis_number(2, 0) == 1);
    CHECK_THROWS_AS(basis_number(4, 40), CapacityError);
    try {
        basis_number(4, 40);
    } catch (const CapacityError& e) {
        CHECK(e.cap == kDefaultBasisCap);
        CHECK(e.requested > e.cap);
    }
}

TEST_CASE("ordering enumerates grades in counter order") {
    const BasisIndex b1 = ordering(2, 1);
    REQUIRE(b1.m == 3);
    CHECK(b1.exponents[0] == std::vector<int>{0, 0});
    CHECK(b1.exponents[1] == std::vector<int>{1, 0});
    CHECK(b1.exponents[2] == std::vector<int>{0, 1});

    const BasisIndex b2 = ordering(2, 2);
    REQUIRE(b2.m == 6);
    CHECK(b2.exponents[3] == std::vector<int>{2, 0});
    CHECK(b2.exponents[4] == std::vector<int>{1, 1});
    CHECK(b2.exponents[5] == std::vector<int>{0, 2});

    const BasisIndex b3 = ordering(1, 5);
    for (int i = 0; i <= 5; ++i) CHECK(b3.exponents[i] == std::vector<int>{i});
}

TEST_CASE("ordering is graded with unique rows") {
    for (int n : {1, 2, 3, 4}) {
        for (int sigma : {0, 1, 3, 5}) {
            const BasisIndex b = ordering(n, sigma);
            CHECK(static_cast<long long>(b.m) == basis_number(n, sigma));
            int last_total = 0;
            for (int i = 0; i < b.m; ++i) {
                int total = 0;
                for (int e : b.exponents[i]) {
                    total += e;
                    CHECK(e >= 0);
                }
                CHECK(total <= sigma);
                CHECK(total >= last_total);  // graded
                last_total = total;
                for (int j = i + 1; j < b.m; ++j) CHECK(b.exponents[i] != b.exponents[j]);
            }
        }
    }
}

TEST_CASE("legendre tables match the classical polynomials") {
    const Legendre1D t = legendre_tables(4);
    // L2 = (3 y^2 - 1) / 2
    CHECK(t.L[2][0] == doctest::Approx(-0.5));
    CHECK(t.L[2][1] == 0.0);
    CHECK(t.L[2][2] == doctest::Approx(1.5));
    // N0 = sqrt(1/2)
    CHECK(t.N[0][0] == doctest::Approx(std::sqrt(0.5)));
    // N1 = sqrt(3/2) y
    CHECK(t.N[1][1] == doctest::Approx(std::sqrt(1.5)));
    // d/dy N2 = 3 sqrt(5/2) y
    CHECK(t.D[2][1] == doctest::Approx(3.0 * std::sqrt(2.5)));
    CHECK(t.D[2][0] == 0.0);
}

TEST_CASE("one-dimensional rows are orthonormal under exact integration") {
    const int sigma = 8;
    const Legendre1D t = legendre_tables(sigma);
    for (int a = 0; a <= sigma; ++a) {
        for (int b = 0; b <= sigma; ++b) {
            double acc = 0.0;
            for (int i = 0; i <= sigma; ++i) {
                for (int j = 0; j <= sigma; ++j) {
                    if (t.N[a][i] == 0.0 || t.N[b][j] == 0.0) continue;
                    const int g = i + j;
                    acc += t.N[a][i] * t.N[b][j] *
                           monomial_integral(std::span<const int>(&g, 1));
                }
            }
            CHECK(std::abs(acc - (a == b ? 1.0 : 0.0)) <= 1e-12);
        }
    }
}

TEST_CASE("D rows are the formal derivatives of N rows") {
    const Legendre1D t = legendre_tables(6);
    for (int d = 0; d <= 6; ++d) {
        for (int j = 0; j < 6; ++j) {
            CHECK(t.D[d][j] == (j + 1) * t.N[d][j + 1]);
        }
        CHECK(t.D[d][6] == 0.0);
    }
}

TEST_CASE("multidimensional table: degenerate and 2-D spot checks") {
    const Legendre1D oned = legendre_tables(3);
    const BasisIndex b1 = ordering(1, 3);
    const auto l1 = multidim_legendre(b1, oned);
    for (int i = 0; i < b1.m; ++i) {
        for (int j = 0; j < b1.m; ++j) CHECK(l1[i][j] == oned.N[i][j]);
    }

    const BasisIndex b2 = ordering(2, 2);
    const auto l2 = multidim_legendre(b2, oned);
    // basis 1 = [1,0]: single monomial q with coefficient sqrt(3)/2
    CHECK(l2[1][1] == doctest::Approx(std::sqrt(3.0) / 2.0));
    for (int j = 0; j < b2.m; ++j) {
        if (j != 1) CHECK(l2[1][j] == 0.0);
    }
    // constant basis row
    CHECK(l2[0][0] == doctest::Approx(0.5));
}

TEST_CASE("Gram matrix of the multidimensional basis is the identity") {
    for (auto [n, sigma] : {std::pair{2, 5}, std::pair{3, 4}}) {
        const BasisIndex basis = ordering(n, sigma);
        const Legendre1D oned = legendre_tables(sigma);
        const auto lmulti = multidim_legendre(basis, oned);
        const Matrix g = exact_gram(lmulti, basis);
        CHECK((g - Matrix::identity(basis.m)).max_abs() <= 1e-10);
    }
}

TEST_CASE("Gram matrix under (sigma+1)-point tensor quadrature") {
    for (auto [n, sigma] : {std::pair{2, 5}, std::pair{3, 4}, std::pair{1, 5}}) {
        const BasisIndex basis = ordering(n, sigma);
        const Legendre1D oned = legendre_tables(sigma);
        const auto lmulti = multidim_legendre(basis, oned);
        std::vector<std::vector<WeightedMonomial>> rows(basis.m);
        for (int i = 0; i < basis.m; ++i) {
            for (int u = 0; u < basis.m; ++u) {
                if (lmulti[i][u] != 0.0) {
                    rows[i].push_back({lmulti[i][u], basis.exponents[u]});
                }
            }
        }
        double worst = 0.0;
        for (int i = 0; i < basis.m; ++i) {
            for (int j = 0; j < basis.m; ++j) {
                const double v = quadrature_inner_product(rows[i], rows[j], n, sigma + 1);
                worst = std::max(worst, std::abs(v - (i == j ? 1.0 : 0.0)));
            }
        }
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("monomial integrals: parity and closed form") {
    CHECK(monomial_integral(std::vector<int>{0, 0}) == 4.0);
    CHECK(monomial_integral(std::vector<int>{1, 2}) == 0.0);
    CHECK(monomial_integral(std::vector<int>{2}) == doctest::Approx(2.0 / 3.0));
    CHECK(monomial_integral(std::vector<int>{2, 4, 0}) ==
          doctest::Approx(8.0 / 15.0));
    CHECK_THROWS_AS(monomial_integral(std::vector<int>{-1}), std::invalid_argument);
}

TEST_CASE("monomial integrals agree with the quadrature oracle") {
    auto rng = make_rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(trial % 3);
        std::vector<int> gamma(n);
        for (auto& g : gamma) g = static_cast<int>(uniform(rng, 0.0, 6.99));
        WeightedMonomial one{1.0, std::vector<int>(n, 0)};
        WeightedMonomial mono{1.0, gamma};
        const double quad =
            quadrature_inner_product(std::span<const WeightedMonomial>(&mono, 1),
                                     std::span<const WeightedMonomial>(&one, 1), n, 8);
        CHECK(std::abs(quad - monomial_integral(gamma)) <= 1e-13);
    }
}

TEST_CASE("operator matrix of the zero field is zero") {
    const PolynomialODE zero({"q", "p"}, {{}, {}});
    const BasisIndex basis = ordering(2, 3);
    const Legendre1D oned = legendre_tables(3);
    const auto lmulti = multidim_legendre(basis, oned);
    const Matrix m = operator_matrix(zero, basis, oned, lmulti);
    CHECK(m.max_abs() == 0.0);
}

TEST_CASE("harmonic oscillator at sigma=1 has exactly two unit entries") {
    const PolynomialODE sys = duffing_linear_part();
    const BasisIndex basis = ordering(2, 1);
    const Legendre1D oned = legendre_tables(1);
    const auto lmulti = multidim_legendre(basis, oned);
    const Matrix m = operator_matrix(sys, basis, oned, lmulti);
    CHECK(m(1, 2).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m(2, 1).real() == doctest::Approx(-1.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if ((i == 1 && j == 2) || (i == 2 && j == 1)) continue;
            CHECK(m(i, j) == Complex(0.0));
        }
    }
}

TEST_CASE("operator matrix matches the quadrature oracle") {
    for (const PolynomialODE& sys : {duffing_full(0.1), vanderpol_full(0.1)}) {
        const int sigma = 3;
        const BasisIndex basis = ordering(2, sigma);
        const Legendre1D oned = legendre_tables(sigma);
        const auto lmulti = multidim_legendre(basis, oned);
        const Matrix closed = operator_matrix(sys, basis, oned, lmulti);
        const Matrix quad = quadrature_operator_matrix(sys, basis, 2 * sigma + 4);
        CHECK((closed - quad).max_abs() <= 1e-10);
    }
}

TEST_CASE("parity skipping equals integration without skipping") {
    // reassemble M accumulating every term, odd powers contributing an exact
    // 0.0 instead of being skipped
    const PolynomialODE sys = duffing_full(0.2);
    const int sigma = 4;
    const BasisIndex basis = ordering(2, sigma);
    const Legendre1D oned = legendre_tables(sigma);
    const auto lmulti = multidim_legendre(basis, oned);
    const Matrix skipping = operator_matrix(sys, basis, oned, lmulti);

    const int n = basis.n;
    const int m = basis.m;
    Matrix naive(m, m);
    for (int i = 0; i < m; ++i) {
        std::vector<std::vector<double>> partial(n, std::vector<double>(m));
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < m; ++j) {
                double prod = 1.0;
                for (int h = 0; h < n; ++h) {
                    const auto& tbl = (h == k) ? oned.D : oned.N;
                    prod *= tbl[basis.exponents[i][h]][basis.exponents[j][h]];
                }
                partial[k][j] = prod;
            }
        }
        std::map<std::vector<int>, double> total;
        for (int k = 0; k < n; ++k) {
            for (const Monomial& mono : sys.equations()[k]) {
                for (int j = 0; j < m; ++j) {
                    if (partial[k][j] == 0.0) continue;
                    std::vector<int> key(n);
                    for (int d = 0; d < n; ++d) {
                        key[d] = mono.exponents[d] + basis.exponents[j][d];
                    }
                    total[key] += mono.kappa * partial[k][j];
                }
            }
        }
        const double eta = std::ldexp(1.0, n);
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (const auto& [exps, coeff] : total) {
                for (int u = 0; u < m; ++u) {
                    if (lmulti[j][u] == 0.0) continue;
                    bool odd = false;
                    double denom = 1.0;
                    for (int d = 0; d < n; ++d) {
                        const int g = exps[d] + basis.exponents[u][d];
                        if (g % 2 == 1) odd = true;  // no early exit
                        denom *= g + 1;
                    }
                    const double integral = odd ? 0.0 : eta / denom;
                    acc += coeff * lmulti[j][u] * integral;
                }
            }
            naive(i, j) = acc;
        }
    }
    CHECK((skipping - naive).max_abs() == 0.0);
}

TEST_CASE("purely linear fields embed A in the first-order block") {
    auto rng = make_rng(3);
    for (int n : {2, 3}) {
        const Matrix a = random_real_matrix(rng, n);
        std::vector<std::vector<Monomial>> eqs(n);
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                Monomial m;
                m.kappa = a(i, k).real();
                m.exponents.assign(n, 0);
                m.exponents[k] = 1;
                eqs[i].push_back(m);
            }
        }
        const PolynomialODE sys(names, eqs);
        for (int sigma : {1, 3}) {
            const BasisIndex basis = ordering(n, sigma);
            const Legendre1D oned = legendre_tables(sigma);
            const auto lmulti = multidim_legendre(basis, oned);
            const Matrix m = operator_matrix(sys, basis, oned, lmulti);
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < n; ++k) {
                    CHECK(std::abs(m(1 + i, 1 + k) - a(i, k)) <= 1e-12);
                }
            }
            if (sigma == 1) {
                for (int i = 1; i <= n; ++i) CHECK(m(i, 0) == Complex(0.0));
            }
        }
    }
}

TEST_CASE("projection matrix places sqrt(2^n/3) above the diagonal") {
    const Matrix h1 = projection_matrix(1, 4);
    CHECK(h1(0, 1).real() == doctest::Approx(std::sqrt(2.0 / 3.0)));
    const Matrix h2 = projection_matrix(2, 6);
    CHECK(h2(0, 1).real() == doctest::Approx(2.0 / std::sqrt(3.0)));
    CHECK(h2(1, 2).real() == doctest::Approx(2.0 / std::sqrt(3.0)));
    int nonzeros = 0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 6; ++j) {
            if (h2(i, j) != Complex(0.0)) ++nonzeros;
        }
    }
    CHECK(nonzeros == 2);
    CHECK_THROWS_AS(projection_matrix(3, 3), DimensionError);
}

TEST_CASE("H recovers the state from exact basis evaluations") {
    auto rng = make_rng(21);
    for (int n : {1, 2, 3}) {
        const int sigma = 3;
        const BasisIndex basis = ordering(n, sigma);
        const Legendre1D oned = legendre_tables(sigma);
        const auto lmulti = multidim_legendre(basis, oned);
        const Matrix h = projection_matrix(n, basis.m);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> y(n);
            for (auto& v : y) v = uniform(rng, -1, 1);
            const auto basis_values = boundary_conditions(lmulti, basis, y);
            const CVector recovered =
                h.apply(std::span<const double>(basis_values));
            for (int i = 0; i < n; ++i) {
                CHECK(std::abs(recovered[i].real() - y[i]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("boundary conditions evaluate the basis at y0") {
    const BasisIndex b2 = ordering(2, 2);
    const Legendre1D oned2 = legendre_tables(2);
    const auto l2 = multidim_legendre(b2, oned2);
    const auto h0 = boundary_conditions(l2, b2, std::vector<double>{0.0, 0.0});
    CHECK(h0[0] == doctest::Approx(0.5));
    CHECK(h0[1] == 0.0);
    CHECK(h0[2] == 0.0);

    // 1-D at y = 1: N_d(1) = sqrt((2d+1)/2)
    const BasisIndex b1 = ordering(1, 4);
    const Legendre1D oned1 = legendre_tables(4);
    const auto l1 = multidim_legendre(b1, oned1);
    const auto h1 = boundary_conditions(l1, b1, std::vector<double>{1.0});
    for (int d = 0; d <= 4; ++d) {
        CHECK(h1[d] == doctest::Approx(std::sqrt((2.0 * d + 1.0) / 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("assembly is bit-identical across repeated runs") {
    const PolynomialODE sys = duffing_full(0.1);
    const auto g1 = build_galerkin(sys, 5, std::vector<double>{1.0, 0.0});
    const auto g2 = build_galerkin(sys, 5, std::vector<double>{1.0, 0.0});
    REQUIRE(g1.basis.m == g2.basis.m);
    for (int i = 0; i < g1.basis.m; ++i) {
        for (int j = 0; j < g1.basis.m; ++j) {
            CHECK(std::memcmp(&g1.M(i, j), &g2.M(i, j), sizeof(Complex)) == 0);
        }
        CHECK(std::memcmp(&g1.h0[i], &g2.h0[i], sizeof(double)) == 0);
    }
}

TEST_CASE("operator assembly honors the monomial cap") {
    const PolynomialODE sys = duffing_full(0.1);
    const BasisIndex basis = ordering(2, 5);
    const Legendre1D oned = legendre_tables(5);
    const auto lmulti = multidim_legendre(basis, oned);
    CHECK_THROWS_AS(operator_matrix(sys, basis, oned, lmulti, 3), CapacityError);
}
