#include "schurode/perturbation.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace schurode {

namespace {

Complex cpow(Complex base, int exp) {
    Complex acc(1.0);
    for (int e = 0; e < exp; ++e) acc *= base;
    return acc;
}

void check_split(const SplitOperator& split) {
    if (!split.B.is_square() || !split.P.is_square() ||
        split.B.rows() != split.P.rows()) {
        throw DimensionError("perturbation: B and P must be square and equally sized");
    }
    if (!std::isfinite(split.epsilon)) {
        throw std::invalid_argument("perturbation: epsilon must be finite");
    }
}

CVector stacked_ic(const Matrix& v_unperturbed, std::span<const double> h0,
                   int blocks, int m) {
    if (static_cast<int>(h0.size()) != m) {
        throw DimensionError("perturbation: h0 length does not match operator size");
    }
    CVector psi0(static_cast<size_t>(blocks) * m, Complex(0.0));
    const CVector phi0 = unitary_inverse(v_unperturbed).apply(h0);
    for (int i = 0; i < m; ++i) psi0[static_cast<size_t>(blocks - 1) * m + i] = phi0[i];
    return psi0;
}

LiftedSolution solve_block_system(BlockTriangularSystem sys, const Matrix& hproj,
                                  std::vector<Matrix> backtransforms, double x0,
                                  double eps_eig, int unperturbed_block) {
    const Matrix big = sys.flatten();
    TriangularSolution tri = solve_triangular_ivp(big, sys.ic, x0, eps_eig);
    return LiftedSolution(std::move(tri), hproj, std::move(backtransforms),
                          std::move(sys.weights), unperturbed_block);
}

}  // namespace

Matrix BlockTriangularSystem::flatten() const {
    const int m = block_size;
    const int nb = static_cast<int>(blocks.size());
    Matrix big(nb * m, nb * m);
    for (int p = 0; p < nb; ++p) {
        if (static_cast<int>(blocks[p].size()) != nb) {
            throw DimensionError("BlockTriangularSystem: ragged block grid");
        }
        for (int q = 0; q < nb; ++q) {
            const Matrix& blk = blocks[p][q];
            if (blk.empty()) continue;
            if (q < p) {
                throw DimensionError("BlockTriangularSystem: nonzero block below diagonal");
            }
            if (blk.rows() != m || blk.cols() != m) {
                throw DimensionError("BlockTriangularSystem: block size mismatch");
            }
            if (q == p && !blk.is_upper_triangular()) {
                throw DimensionError("BlockTriangularSystem: diagonal block not triangular");
            }
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) {
                    big(p * m + i, q * m + j) = blk(i, j);
                }
            }
        }
    }
    return big;
}

LiftedSolution::LiftedSolution(TriangularSolution triangular, Matrix hproj,
                               std::vector<Matrix> backtransforms,
                               std::vector<Complex> weights, int unperturbed_block)
    : triangular_(std::move(triangular)),
      hproj_(std::move(hproj)),
      backtransforms_(std::move(backtransforms)),
      weights_(std::move(weights)),
      unperturbed_block_(unperturbed_block) {
    if (backtransforms_.size() != weights_.size() || weights_.empty()) {
        throw DimensionError("LiftedSolution: one backtransform per block required");
    }
    const int m = hproj_.cols();
    if (triangular_.size() != static_cast<int>(weights_.size()) * m) {
        throw DimensionError("LiftedSolution: stacked solution size mismatch");
    }
    projected_.reserve(weights_.size());
    for (size_t b = 0; b < weights_.size(); ++b) {
        if (backtransforms_[b].rows() != m || backtransforms_[b].cols() != m) {
            throw DimensionError("LiftedSolution: backtransform size mismatch");
        }
        projected_.push_back((hproj_ * backtransforms_[b]) * weights_[b]);
    }
}

CVector LiftedSolution::combine(double x, int only_block, bool exclude) const {
    const int m = hproj_.cols();
    const CVector psi = triangular_.at(x);
    CVector acc(hproj_.rows(), Complex(0.0));
    for (int b = 0; b < block_count(); ++b) {
        if (!exclude && only_block >= 0 && b != only_block) continue;
        if (exclude && b == only_block) continue;
        const std::span<const Complex> part(psi.data() + static_cast<size_t>(b) * m, m);
        const CVector yb = projected_[b].apply(part);
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += yb[i];
    }
    return acc;
}

std::vector<double> LiftedSolution::y(double x) const {
    return real_part(combine(x, -1, false));
}

CVector LiftedSolution::h(double x) const {
    const int m = hproj_.cols();
    const CVector psi = triangular_.at(x);
    CVector acc(m, Complex(0.0));
    for (int b = 0; b < block_count(); ++b) {
        const std::span<const Complex> part(psi.data() + static_cast<size_t>(b) * m, m);
        const CVector hb = backtransforms_[b].apply(part);
        for (int i = 0; i < m; ++i) acc[i] += weights_[b] * hb[i];
    }
    return acc;
}

std::vector<double> LiftedSolution::y_unperturbed(double x) const {
    return real_part(combine(x, unperturbed_block_, false));
}

std::vector<double> LiftedSolution::y_perturbation(double x) const {
    return real_part(combine(x, unperturbed_block_, true));
}

LiftedSolution solve_direct(const Matrix& m, const Matrix& hproj,
                            std::span<const double> h0, double x0, double eps_eig,
                            int max_iter) {
    if (!m.is_square() || hproj.cols() != m.rows()) {
        throw DimensionError("solve_direct: operator and projection sizes disagree");
    }
    if (static_cast<int>(h0.size()) != m.rows()) {
        throw DimensionError("solve_direct: h0 length does not match operator size");
    }
    SchurForm schur = schur_decompose(m, max_iter);
    const CVector phi0 = unitary_inverse(schur.V).apply(h0);
    TriangularSolution tri = solve_triangular_ivp(schur.T, phi0, x0, eps_eig);
    return LiftedSolution(std::move(tri), hproj, {schur.V}, {Complex(1.0)}, 0);
}

LiftedSolution solve_exact_decomposition(const SplitOperator& split, const Matrix& hproj,
                                         std::span<const double> h0, double x0,
                                         double eps_eig, int max_iter) {
    check_split(split);
    const int m = split.B.rows();
    const Matrix full = split.B + split.P * split.epsilon;
    SchurForm ms = schur_decompose(full, max_iter);
    SchurForm bs = schur_decompose(split.B, max_iter);

    BlockTriangularSystem sys;
    sys.block_size = m;
    sys.blocks.assign(2, std::vector<Matrix>(2));
    sys.blocks[0][0] = ms.T;
    sys.blocks[0][1] = unitary_inverse(ms.V) * split.P * bs.V;
    sys.blocks[1][1] = bs.T;
    sys.ic = stacked_ic(bs.V, h0, 2, m);
    sys.weights = {Complex(split.epsilon), Complex(1.0)};
    return solve_block_system(std::move(sys), hproj, {ms.V, bs.V}, x0, eps_eig, 1);
}

LiftedSolution solve_approx_first_order(const SplitOperator& split, const Matrix& hproj,
                                        std::span<const double> h0, double x0,
                                        double eps_eig, int max_iter) {
    check_split(split);
    const int m = split.B.rows();
    SchurForm bs = schur_decompose(split.B, max_iter);
    const Matrix coupling = unitary_inverse(bs.V) * split.P * bs.V;

    BlockTriangularSystem sys;
    sys.block_size = m;
    sys.blocks.assign(2, std::vector<Matrix>(2));
    sys.blocks[0][0] = bs.T;
    sys.blocks[0][1] = coupling;
    sys.blocks[1][1] = bs.T;
    sys.ic = stacked_ic(bs.V, h0, 2, m);
    sys.weights = {Complex(split.epsilon), Complex(1.0)};
    return solve_block_system(std::move(sys), hproj, {bs.V, bs.V}, x0, eps_eig, 1);
}

LiftedSolution solve_higher_order(const SplitOperator& split, const Matrix& hproj,
                                  std::span<const double> h0, double x0, int tau_order,
                                  double eps_eig, int max_iter, long long solver_cap) {
    check_split(split);
    if (tau_order < 1) {
        throw std::invalid_argument("solve_higher_order: tau_order must be >= 1");
    }
    const int m = split.B.rows();
    const long long total = static_cast<long long>(tau_order + 1) * m;
    if (total > solver_cap) {
        throw CapacityError("solve_higher_order: stacked system exceeds solver cap",
                            total, solver_cap);
    }
    SchurForm bs = schur_decompose(split.B, max_iter);
    const Matrix coupling = unitary_inverse(bs.V) * split.P * bs.V;

    const int nb = tau_order + 1;
    BlockTriangularSystem sys;
    sys.block_size = m;
    sys.blocks.assign(nb, std::vector<Matrix>(nb));
    sys.weights.resize(nb);
    std::vector<Matrix> back(nb, bs.V);
    for (int p = 0; p < nb; ++p) {
        sys.blocks[p][p] = bs.T;
        if (p + 1 < nb) sys.blocks[p][p + 1] = coupling;
        // block p carries the order tau-p component
        sys.weights[p] = cpow(Complex(split.epsilon), tau_order - p);
    }
    sys.ic = stacked_ic(bs.V, h0, nb, m);
    return solve_block_system(std::move(sys), hproj, std::move(back), x0, eps_eig,
                              nb - 1);
}

LiftedSolution solve_multi_source(const MultiSourceOperator& sources, const Matrix& hproj,
                                  std::span<const double> h0, double x0, int tau_order,
                                  double eps_eig, int max_iter, long long solver_cap) {
    if (!sources.B.is_square()) {
        throw DimensionError("solve_multi_source: B must be square");
    }
    if (tau_order < 1) {
        throw std::invalid_argument("solve_multi_source: tau_order must be >= 1");
    }
    const int m = sources.B.rows();
    const int ns = static_cast<int>(sources.P.size());
    if (sources.eps.size() != static_cast<size_t>(ns)) {
        throw DimensionError("solve_multi_source: one small parameter per source required");
    }
    int nk = 0;
    for (const auto& per_source : sources.P) {
        nk = std::max(nk, static_cast<int>(per_source.size()));
        for (const Matrix& p : per_source) {
            if (!p.empty() && (p.rows() != m || p.cols() != m)) {
                throw DimensionError("solve_multi_source: inconsistent source dimensions");
            }
        }
    }
    if (nk > tau_order) {
        throw std::invalid_argument(
            "solve_multi_source: perturbation orders exceed the expansion order");
    }
    for (double e : sources.eps) {
        if (!(e > 0.0) || !std::isfinite(e)) {
            throw std::invalid_argument("solve_multi_source: eps entries must be positive");
        }
    }
    double delta = sources.delta;
    if (delta <= 0.0) {
        delta = 0.0;
        for (double e : sources.eps) delta = std::max(delta, e);
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("solve_multi_source: no positive reference parameter");
    }

    const long long total = static_cast<long long>(tau_order + 1) * m;
    if (total > solver_cap) {
        throw CapacityError("solve_multi_source: stacked system exceeds solver cap",
                            total, solver_cap);
    }

    SchurForm bs = schur_decompose(sources.B, max_iter);
    const Matrix vinv = unitary_inverse(bs.V);

    // R^(j) = V^-1 [sum_s (eps_s/delta)^j P^(s,j)] V for j = 1..nk
    std::vector<Matrix> coupling(nk + 1);
    for (int j = 1; j <= nk; ++j) {
        Matrix q(m, m);
        bool any = false;
        for (int s = 0; s < ns; ++s) {
            if (j > static_cast<int>(sources.P[s].size())) continue;
            const Matrix& p = sources.P[s][j - 1];
            if (p.empty()) continue;
            double w = 1.0;
            for (int e = 0; e < j; ++e) w *= sources.eps[s] / delta;
            q = q + p * w;
            any = true;
        }
        if (any) coupling[j] = vinv * q * bs.V;
    }

    const int nb = tau_order + 1;
    BlockTriangularSystem sys;
    sys.block_size = m;
    sys.blocks.assign(nb, std::vector<Matrix>(nb));
    sys.weights.resize(nb);
    std::vector<Matrix> back(nb, bs.V);
    for (int p = 0; p < nb; ++p) {
        sys.blocks[p][p] = bs.T;
        for (int q = p + 1; q < nb; ++q) {
            const int j = q - p;
            if (j <= nk && !coupling[j].empty()) sys.blocks[p][q] = coupling[j];
        }
        sys.weights[p] = cpow(Complex(delta), tau_order - p);
    }
    sys.ic = stacked_ic(bs.V, h0, nb, m);
    return solve_block_system(std::move(sys), hproj, std::move(back), x0, eps_eig,
                              nb - 1);
}

}  // namespace schurode
