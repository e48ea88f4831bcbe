// Acceptance suite: runs every criterion at its pinned tolerance and prints
// one pass/fail line per criterion. Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "schurode/galerkin.hpp"
#include "schurode/io.hpp"
#include "schurode/oracles.hpp"
#include "schurode/perturbation.hpp"
#include "schurode/triangular.hpp"
#include "test_support.hpp"

using namespace schurode;
using namespace schurode::test;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::vector<double> sample_points(double x0, double x1, int count) {
    std::vector<double> xs(count);
    for (int i = 0; i < count; ++i) xs[i] = x0 + (x1 - x0) * i / (count - 1);
    return xs;
}

double duffing_position_error(double eps, int sigma, double periods, int samples,
                              LiftedSolution* out_solution = nullptr) {
    const PolynomialODE full = duffing_full(eps);
    const std::vector<double> y0{1.0, 0.0};
    const auto g = build_galerkin(full, sigma, y0);
    const auto sol = solve_direct(g.M, g.H, g.h0, 0.0);
    const auto xs = sample_points(0.0, periods * 2.0 * M_PI, samples);
    const auto ref = rk_reference(full, y0, 0.0, xs, 1e-4);
    double err = 0.0;
    for (size_t s = 0; s < xs.size(); ++s) {
        err = std::max(err, std::abs(sol.y(xs[s])[0] - ref[s][0]));
    }
    if (out_solution) *out_solution = sol;
    return err;
}

// ---------------------------------------------------------------------------

Outcome criterion_linear_oracle() {
    auto rng = make_rng(20240601);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix a = random_separated_matrix(rng, 10, 0.1);
        std::vector<double> y0(10);
        for (auto& v : y0) v = uniform(rng, -1.0, 1.0);
        const auto sol = solve_linear_ivp(a, std::span<const double>(y0), 0.0);
        for (double x : {0.1, 0.3, 0.5, 0.7, 1.0}) {
            const auto yhat = sol.y_real(x);
            const auto yref = matrix_exponential_apply(a, x, std::span<const double>(y0));
            const double scale = std::max(1.0, max_abs(std::span<const double>(yref)));
            worst = std::max(worst, max_diff(yhat, yref) / scale);
        }
    }
    std::ostringstream os;
    os << "max relative deviation " << worst << " (tol 1e-8)";
    return {worst <= 1e-8, os.str()};
}

Outcome criterion_jordan_exactness() {
    double worst = 0.0;
    for (int n : {2, 4}) {
        const Complex lambda(-0.5, 0.0);
        const Complex t(0.8, 0.0);
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) {
            m(i, i) = lambda;
            if (i + 1 < n) m(i, i + 1) = t;
        }
        CVector phi0(n);
        const double vals[] = {1.0, -0.3, 0.7, 0.2};
        for (int i = 0; i < n; ++i) phi0[i] = vals[i];
        const auto sol = solve_triangular_ivp(m, phi0, 0.0);
        for (double x = 0.0; x <= 2.0; x += 0.1) {
            CVector truth(n);
            for (int i = 0; i < n; ++i) {
                Complex acc(0.0);
                double fact = 1.0;
                Complex power(1.0);
                for (int j = i; j < n; ++j) {
                    if (j > i) {
                        fact *= (j - i);
                        power *= t * x;
                    }
                    acc += phi0[j] * power / fact;
                }
                truth[i] = acc * std::exp(lambda * x);
            }
            worst = std::max(worst, max_diff(sol.at(x), truth));
        }
    }
    std::ostringstream os;
    os << "max deviation from the analytic form " << worst << " (tol 1e-12)";
    return {worst <= 1e-12, os.str()};
}

Outcome criterion_orthonormality() {
    double worst = 0.0;
    for (auto [n, sigma] : {std::pair{2, 5}, std::pair{3, 4}}) {
        const BasisIndex basis = ordering(n, sigma);
        const Legendre1D oned = legendre_tables(sigma);
        const auto lmulti = multidim_legendre(basis, oned);
        const Matrix gram = exact_gram(lmulti, basis);
        worst = std::max(worst, (gram - Matrix::identity(basis.m)).max_abs());
    }
    std::ostringstream os;
    os << "max Gram deviation from identity " << worst << " (tol 1e-10)";
    return {worst <= 1e-10, os.str()};
}

Outcome criterion_operator_oracle() {
    double worst = 0.0;
    const int sigma = 5;
    for (const PolynomialODE& sys : {duffing_full(0.1), vanderpol_full(0.1)}) {
        const BasisIndex basis = ordering(2, sigma);
        const Legendre1D oned = legendre_tables(sigma);
        const auto lmulti = multidim_legendre(basis, oned);
        const Matrix closed = operator_matrix(sys, basis, oned, lmulti);
        const Matrix quad = quadrature_operator_matrix(sys, basis, 10);
        worst = std::max(worst, (closed - quad).max_abs());
    }
    std::ostringstream os;
    os << "max entry deviation from quadrature " << worst << " (tol 1e-10)";
    return {worst <= 1e-10, os.str()};
}

Outcome criterion_duffing_fig1() {
    const double err = duffing_position_error(0.1, 11, 1.0, 1001);
    std::ostringstream os;
    os << "max position error " << err << " (tol 1e-7)";
    return {err <= 1e-7, os.str()};
}

Outcome criterion_duffing_small_eps() {
    const double err = duffing_position_error(0.001, 7, 1.0, 1001);
    std::ostringstream os;
    os << "max position error " << err << " (tol 1e-9)";
    return {err <= 1e-9, os.str()};
}

Outcome criterion_long_term() {
    const double err11 = duffing_position_error(0.001, 11, 11.0, 2001);
    const double err9 = duffing_position_error(0.001, 9, 11.0, 2001);
    std::ostringstream os;
    os << "sigma=11 error " << err11 << " (tol 1e-10), sigma=9 error " << err9;
    return {err11 <= 1e-10 && err11 <= err9, os.str()};
}

Outcome criterion_van_der_pol() {
    const std::vector<double> xs = sample_points(0.0, 2.0 * M_PI, 1001);
    double worst = 0.0;

    {
        const PolynomialODE sys = vanderpol_full(0.1);
        const std::vector<double> y0{0.7, 0.0};
        const auto g = build_galerkin(sys, 11, y0);
        const auto sol = solve_direct(g.M, g.H, g.h0, 0.0);
        const auto ref = rk_reference(sys, y0, 0.0, xs, 1e-4);
        for (size_t s = 0; s < xs.size(); ++s) {
            worst = std::max(worst, std::abs(sol.y(xs[s])[0] - ref[s][0]));
        }
    }
    // limit-cycle-adjacent runs on the Y = 2 normalized system
    const PolynomialODE scaled =
        normalize_variables(vanderpol_full(0.1), ScaleMap{{2.0, 2.0}, 1.0});
    for (double p0 : {1.95, 2.05}) {
        const std::vector<double> y0{0.0, p0 / 2.0};
        const auto g = build_galerkin(scaled, 11, y0);
        const auto sol = solve_direct(g.M, g.H, g.h0, 0.0);
        const auto ref = rk_reference(scaled, y0, 0.0, xs, 1e-4);
        for (size_t s = 0; s < xs.size(); ++s) {
            worst = std::max(worst, std::abs(sol.y(xs[s])[0] - ref[s][0]));
        }
    }
    std::ostringstream os;
    os << "max position error across runs " << worst << " (tol 1e-3)";
    return {worst <= 1e-3, os.str()};
}

Outcome criterion_scheme_hierarchy() {
    const int sigma = 7;
    const auto base = build_galerkin(duffing_linear_part(), sigma,
                                     std::vector<double>{1.0, 0.0});
    const Matrix p =
        operator_matrix(duffing_perturbation(), base.basis, base.oned, base.lmulti);
    const std::vector<double> y0{1.0, 0.0};
    const auto xs = sample_points(0.0, 2.0 * M_PI, 257);

    auto max_dev = [&](const LiftedSolution& a, const LiftedSolution& b) {
        double dev = 0.0;
        for (double x : xs) dev = std::max(dev, max_diff(a.y(x), b.y(x)));
        return dev;
    };
    auto err_vs_rk = [&](const LiftedSolution& sol, double eps) {
        const auto ref = rk_reference(duffing_full(eps), y0, 0.0, xs, 1e-4);
        double err = 0.0;
        for (size_t s = 0; s < xs.size(); ++s) {
            err = std::max(err, std::abs(sol.y(xs[s])[0] - ref[s][0]));
        }
        return err;
    };

    const double eps = 0.001;
    const SplitOperator split{base.M, p, eps};
    const Matrix m = base.M + p * eps;
    const auto direct = solve_direct(m, base.H, base.h0, 0.0);
    const auto exact = solve_exact_decomposition(split, base.H, base.h0, 0.0);
    const double dev_exact = max_dev(direct, exact);

    const auto tau1 = solve_higher_order(split, base.H, base.h0, 0.0, 1);
    const auto tau2 = solve_higher_order(split, base.H, base.h0, 0.0, 2);
    const double err1 = err_vs_rk(tau1, eps);
    const double err2 = err_vs_rk(tau2, eps);

    double devs[2];
    int idx = 0;
    for (double e : {0.001, 0.0005}) {
        const SplitOperator sp{base.M, p, e};
        const Matrix me = base.M + p * e;
        const auto d = solve_direct(me, base.H, base.h0, 0.0);
        const auto a = solve_approx_first_order(sp, base.H, base.h0, 0.0);
        devs[idx++] = max_dev(d, a);
    }
    const double order = std::log2(devs[0] / devs[1]);

    std::ostringstream os;
    os << "exact-vs-direct " << dev_exact << " (tol 1e-9), err(tau=2) " << err2
       << " <= err(tau=1) " << err1 << ", first-order empirical order " << order
       << " (window [1.7, 2.3])";
    const bool pass = dev_exact <= 1e-9 && err2 <= err1 && order >= 1.7 && order <= 2.3;
    return {pass, os.str()};
}

Outcome criterion_determinism() {
    // criteria 4-6 pipelines, run twice, byte-compared as CSV
    auto render = [](const Matrix& m) {
        std::ostringstream os;
        write_matrix(os, m);
        return os.str();
    };
    auto run_all = [&]() {
        std::string blob;
        const int sigma = 5;
        for (const PolynomialODE& sys : {duffing_full(0.1), vanderpol_full(0.1)}) {
            const BasisIndex basis = ordering(2, sigma);
            const Legendre1D oned = legendre_tables(sigma);
            const auto lmulti = multidim_legendre(basis, oned);
            blob += render(operator_matrix(sys, basis, oned, lmulti));
        }
        for (auto [eps, sig] : {std::pair{0.1, 11}, std::pair{0.001, 7}}) {
            const PolynomialODE full = duffing_full(eps);
            const std::vector<double> y0{1.0, 0.0};
            const auto g = build_galerkin(full, sig, y0);
            const auto sol = solve_direct(g.M, g.H, g.h0, 0.0);
            const auto xs = sample_points(0.0, 2.0 * M_PI, 201);
            Trajectory traj;
            traj.x = xs;
            for (double x : xs) traj.y.push_back(sol.y(x));
            traj.attach_reference(rk_reference(full, y0, 0.0, xs, 1e-4));
            blob += trajectory_csv(traj);
        }
        return blob;
    };
    const std::string a = run_all();
    const std::string b = run_all();
    std::ostringstream os;
    os << (a == b ? "repeated runs byte-identical" : "runs differ");
    return {a == b, os.str()};
}

struct Criterion {
    int number;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "linear-solver oracle equivalence", 10.0, criterion_linear_oracle},
        {2, "Jordan-block exactness", 0.0, criterion_jordan_exactness},
        {3, "multidimensional orthonormality", 5.0, criterion_orthonormality},
        {4, "operator-matrix oracle equivalence", 30.0, criterion_operator_oracle},
        {5, "Duffing reproduction (eps 0.1, sigma 11)", 60.0, criterion_duffing_fig1},
        {6, "Duffing small-parameter reproduction", 0.0, criterion_duffing_small_eps},
        {7, "long-term growth over 11 periods", 0.0, criterion_long_term},
        {8, "Van der Pol reproduction", 0.0, criterion_van_der_pol},
        {9, "perturbation-scheme hierarchy", 60.0, criterion_scheme_hierarchy},
        {10, "determinism of criteria 4-6", 0.0, criterion_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        bool pass = outcome.pass;
        std::string note;
        if (c.budget_s > 0.0 && seconds > c.budget_s) {
            pass = false;
            note = " [RUNTIME OVER BUDGET]";
        }
        if (!pass) ++failures;
        std::printf("[%s] criterion %2d: %s - %s (%.2fs)%s\n", pass ? "PASS" : "FAIL",
                    c.number, c.name, outcome.detail.c_str(), seconds, note.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
