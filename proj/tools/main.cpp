#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "schurode/galerkin.hpp"
#include "schurode/io.hpp"
#include "schurode/oracles.hpp"
#include "schurode/perturbation.hpp"
#include "schurode/poly_system.hpp"
#include "schurode/triangular.hpp"

namespace fs = std::filesystem;
using namespace schurode;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitSchur = 3;
constexpr int kExitCapacity = 4;
constexpr int kExitDivergence = 5;

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string(what) + ": bad number '" + item + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> xs(count);
    for (int i = 0; i < count; ++i) {
        xs[i] = (count == 1) ? a : a + (b - a) * i / (count - 1);
    }
    return xs;
}

// ---------------------------------------------------------------------------
// Operator assembly with an optional on-disk cache (SCHURODE_CACHE_DIR).
// Matrices are keyed by the hash of the transformed system text plus sigma;
// the operators of a perturbation split are stored per source and order, so a
// cached entry serves every epsilon.

struct Operators {
    GalerkinSystem galerkin;                          // basis tables, H, h0; M of the base field
    std::map<std::pair<int, int>, Matrix> perturbed;  // P^(s,k)
};

std::optional<fs::path> cache_dir_for(const SystemDocument& doc, int sigma) {
    const char* root = std::getenv("SCHURODE_CACHE_DIR");
    if (root == nullptr || *root == '\0') return std::nullopt;
    const std::string key = content_hash(serialize(doc) + "|sigma=" + std::to_string(sigma));
    return fs::path(root) / key;
}

Matrix cached_operator(const PolynomialODE& field, const GalerkinSystem& g,
                       const std::optional<fs::path>& dir, const std::string& name) {
    if (dir) {
        const fs::path file = *dir / (name + ".txt");
        if (fs::exists(file)) return read_matrix(file);
    }
    Matrix m = operator_matrix(field, g.basis, g.oned, g.lmulti);
    if (dir) write_matrix(*dir / (name + ".txt"), m);
    return m;
}

Operators assemble(const SystemDocument& doc, int sigma, std::span<const double> y0) {
    Operators ops;
    ops.galerkin.basis = ordering(doc.base.dimension(), sigma);
    ops.galerkin.oned = legendre_tables(sigma);
    ops.galerkin.lmulti = multidim_legendre(ops.galerkin.basis, ops.galerkin.oned);
    ops.galerkin.H = projection_matrix(ops.galerkin.basis.n, ops.galerkin.basis.m);
    ops.galerkin.h0 = boundary_conditions(ops.galerkin.lmulti, ops.galerkin.basis, y0);

    const auto dir = cache_dir_for(doc, sigma);
    ops.galerkin.M = cached_operator(doc.base, ops.galerkin, dir,
                                     doc.has_perturbation() ? "B" : "M");
    for (const auto& [key, field] : doc.perturbations) {
        const std::string name =
            "P_" + std::to_string(key.first) + "_" + std::to_string(key.second);
        ops.perturbed.emplace(key, cached_operator(field, ops.galerkin, dir, name));
    }
    return ops;
}

// ---------------------------------------------------------------------------

struct SimulateConfig {
    std::string system_path;
    int sigma = 1;
    std::string epsilon_text = "1";
    std::string scheme = "direct";
    int tau_order = 1;
    std::string ic_text;
    double x0 = 0.0;
    double x1 = 6.283185307179586;
    int samples = 1001;
    std::string scale_text;
    double tau_time = 1.0;
    double rk_step = 1e-4;
    std::string out_path;
    bool emit_matrices = false;
    double eps_eig = 0.0;
};

struct PreparedSystem {
    SystemDocument doc;           // transformed (scaled, autonomized)
    std::vector<double> y0;       // transformed initial state (with z when lifted)
    std::vector<double> unscale;  // per displayed variable
    int display_vars = 0;         // variables reported to the user
};

PreparedSystem prepare(const SystemDocument& parsed, const std::vector<double>& ic,
                       const std::string& scale_text, double tau_time, double x0) {
    PreparedSystem out;
    out.doc = parsed;
    const int n = parsed.base.dimension();
    if (static_cast<int>(ic.size()) != n) {
        throw std::invalid_argument("--ic must list one value per declared variable");
    }
    out.display_vars = n;
    out.y0 = ic;
    out.unscale.assign(n, 1.0);

    if (!scale_text.empty()) {
        std::vector<double> factors = parse_list(scale_text, "--scale");
        if (factors.size() == 1) factors.assign(n, factors[0]);
        ScaleMap scale{factors, tau_time};
        out.doc = normalize_variables(out.doc, scale);
        for (int i = 0; i < n; ++i) {
            out.y0[i] = ic[i] / factors[i];
            out.unscale[i] = factors[i];
        }
    }
    bool with_x = out.doc.base.has_explicit_x();
    for (const auto& [key, field] : out.doc.perturbations) {
        with_x = with_x || field.has_explicit_x();
    }
    if (with_x) {
        out.doc = autonomize(out.doc, tau_time);
        out.y0.push_back(tau_time * x0);
    }
    return out;
}

LiftedSolution dispatch_scheme(const SimulateConfig& cfg, const Operators& ops,
                               const SystemDocument& doc,
                               const std::vector<double>& eps) {
    const Matrix& B = ops.galerkin.M;
    const Matrix& H = ops.galerkin.H;
    const std::vector<double>& h0 = ops.galerkin.h0;

    if (cfg.scheme == "direct") {
        Matrix m = B;
        for (const auto& [key, p] : ops.perturbed) {
            double w = 1.0;
            for (int e = 0; e < key.second; ++e) w *= eps.at(key.first - 1);
            m = m + p * w;
        }
        return solve_direct(m, H, h0, cfg.x0, cfg.eps_eig);
    }
    if (cfg.scheme == "multi-source") {
        MultiSourceOperator src;
        src.B = B;
        src.eps = eps;
        src.P.assign(doc.source_count(), {});
        for (const auto& [key, p] : ops.perturbed) {
            auto& per_source = src.P[key.first - 1];
            if (static_cast<int>(per_source.size()) < key.second) {
                per_source.resize(key.second);
            }
            per_source[key.second - 1] = p;
        }
        return solve_multi_source(src, H, h0, cfg.x0, cfg.tau_order, cfg.eps_eig);
    }

    // Single-source split schemes: M = B + eps P with P = sum_k eps^(k-1) P^(1,k).
    if (doc.source_count() > 1) {
        throw std::invalid_argument("scheme '" + cfg.scheme +
                                    "' supports a single perturbation source; "
                                    "use --scheme multi-source");
    }
    if (!doc.has_perturbation()) {
        throw std::invalid_argument("scheme '" + cfg.scheme +
                                    "' requires a perturb section in the system file");
    }
    const double e1 = eps.at(0);
    Matrix p(ops.galerkin.basis.m, ops.galerkin.basis.m);
    for (const auto& [key, pk] : ops.perturbed) {
        double w = 1.0;
        for (int e = 1; e < key.second; ++e) w *= e1;
        p = p + pk * w;
    }
    SplitOperator split{B, p, e1};
    if (cfg.scheme == "exact-decomp") {
        return solve_exact_decomposition(split, H, h0, cfg.x0, cfg.eps_eig);
    }
    if (cfg.scheme == "approx") {
        return solve_approx_first_order(split, H, h0, cfg.x0, cfg.eps_eig);
    }
    if (cfg.scheme == "higher-order") {
        return solve_higher_order(split, H, h0, cfg.x0, cfg.tau_order, cfg.eps_eig);
    }
    throw std::invalid_argument("unknown scheme '" + cfg.scheme + "'");
}

void emit_matrix_files(const Operators& ops, const fs::path& csv_path) {
    const fs::path dir = csv_path.parent_path();
    const std::string stem = csv_path.stem().string();
    auto name = [&](const std::string& suffix) {
        return dir / (stem + "." + suffix + ".txt");
    };
    write_matrix(name(ops.perturbed.empty() ? "M" : "B"), ops.galerkin.M);
    for (const auto& [key, p] : ops.perturbed) {
        write_matrix(
            name("P_" + std::to_string(key.first) + "_" + std::to_string(key.second)), p);
    }
    write_matrix(name("H"), ops.galerkin.H);
    write_vector(name("h0"), ops.galerkin.h0);
}

int cmd_simulate(const SimulateConfig& cfg) {
    const SystemDocument parsed = parse_system(read_file(cfg.system_path));
    const std::vector<double> ic = parse_list(cfg.ic_text, "--ic");
    const std::vector<double> eps = parse_list(cfg.epsilon_text, "--epsilon");
    if (static_cast<int>(eps.size()) < parsed.source_count()) {
        throw std::invalid_argument("--epsilon must list one value per perturbation source");
    }
    if (cfg.samples < 2) throw std::invalid_argument("--samples must be at least 2");
    if (!(cfg.x1 > cfg.x0)) throw std::invalid_argument("--x1 must exceed --x0");

    const PreparedSystem prep = prepare(parsed, ic, cfg.scale_text, cfg.tau_time, cfg.x0);
    for (double v : prep.y0) {
        if (std::abs(v) > 1.0) {
            std::cerr << "note: initial state leaves [-1,1]; accuracy degrades "
                         "outside the basis domain (consider --scale)\n";
            break;
        }
    }
    if (prep.y0.size() > static_cast<size_t>(prep.display_vars) &&
        std::max(std::abs(cfg.tau_time * cfg.x0), std::abs(cfg.tau_time * cfg.x1)) >
            1.0) {
        std::cerr << "note: the autonomization state tau*x leaves [-1,1] over the "
                     "window; consider a smaller --tau-time\n";
    }
    const Operators ops = assemble(prep.doc, cfg.sigma, prep.y0);
    const LiftedSolution sol = dispatch_scheme(cfg, ops, prep.doc, eps);
    {
        const auto& diag = sol.triangular().couplings().diagnostics();
        std::cerr << "eigenvalue separation: min " << diag.min_separation << ", "
                  << diag.equal_pairs << " pair(s) on the equal branch\n";
    }

    const std::vector<double> xs = linspace(cfg.x0, cfg.x1, cfg.samples);
    Trajectory traj;
    traj.x = xs;
    traj.y.reserve(xs.size());
    for (double x : xs) {
        auto y = sol.y(x);
        y.resize(prep.display_vars);
        for (int i = 0; i < prep.display_vars; ++i) y[i] *= prep.unscale[i];
        traj.y.push_back(std::move(y));
    }

    const PolynomialODE full = prep.doc.combined(eps);
    auto ref = rk_reference(full, prep.y0, cfg.x0, xs, cfg.rk_step);
    for (auto& row : ref) {
        row.resize(prep.display_vars);
        for (int i = 0; i < prep.display_vars; ++i) row[i] *= prep.unscale[i];
    }
    traj.attach_reference(std::move(ref));

    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    atomic_write(cfg.out_path, csv.str());
    if (cfg.emit_matrices) emit_matrix_files(ops, cfg.out_path);

    for (int i = 0; i < prep.display_vars; ++i) {
        double m = 0.0;
        for (const auto& row : traj.err) m = std::max(m, row[i]);
        std::cout << "max_err y_" << (i + 1) << " = " << format_full(m) << "\n";
    }
    return 0;
}

int cmd_solve_linear(const std::string& system_path, const std::string& matrix_path,
                     const std::string& ic_text, double x0, double x1, int samples,
                     const std::string& out_path, double eps_eig, int max_iter) {
    if (samples < 2) throw std::invalid_argument("--samples must be at least 2");
    if (!(x1 > x0)) throw std::invalid_argument("--x1 must exceed --x0");
    Matrix a;
    if (!matrix_path.empty()) {
        a = read_matrix(matrix_path);
        if (!a.is_square()) throw std::invalid_argument("--matrix must be square");
    } else if (!system_path.empty()) {
        const SystemDocument doc = parse_system(read_file(system_path));
        if (doc.has_perturbation()) {
            throw std::invalid_argument("solve-linear expects a plain linear system");
        }
        const int n = doc.base.dimension();
        a = Matrix(n, n);
        for (int i = 0; i < n; ++i) {
            for (const Monomial& m : doc.base.equations()[i]) {
                int total = m.x_exponent;
                for (int e : m.exponents) total += e;
                if (total != 1 || m.x_exponent != 0) {
                    throw std::invalid_argument("solve-linear: field is not purely linear");
                }
                for (int k = 0; k < n; ++k) {
                    if (m.exponents[k] == 1) a(i, k) += m.kappa;
                }
            }
        }
    } else {
        throw std::invalid_argument("solve-linear needs --system or --matrix");
    }

    const std::vector<double> y0 = parse_list(ic_text, "--ic");
    if (static_cast<int>(y0.size()) != a.rows()) {
        throw std::invalid_argument("--ic length must match the system size");
    }
    const ExpPolySolution sol =
        solve_linear_ivp(a, std::span<const double>(y0), x0, eps_eig, max_iter);

    Trajectory traj;
    traj.x = linspace(x0, x1, samples);
    std::vector<std::vector<double>> ref;
    for (double x : traj.x) {
        traj.y.push_back(sol.y_real(x));
        ref.push_back(matrix_exponential_apply(a, x - x0, std::span<const double>(y0)));
    }
    traj.attach_reference(std::move(ref));

    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    atomic_write(out_path, csv.str());

    double m = 0.0;
    for (const auto& row : traj.err) {
        for (double v : row) m = std::max(m, v);
    }
    std::cout << "max_err = " << format_full(m) << "\n";
    return 0;
}

int cmd_linearize(const std::string& system_path, int sigma, const std::string& ic_text,
                  const std::string& scale_text, double tau_time,
                  const std::string& out_dir) {
    const SystemDocument parsed = parse_system(read_file(system_path));
    std::vector<double> ic(parsed.base.dimension(), 0.0);
    if (!ic_text.empty()) ic = parse_list(ic_text, "--ic");

    const PreparedSystem prep = prepare(parsed, ic, scale_text, tau_time, 0.0);
    const auto start = std::chrono::steady_clock::now();
    const Operators ops = assemble(prep.doc, sigma, prep.y0);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_matrix(dir / (ops.perturbed.empty() ? "M.txt" : "B.txt"), ops.galerkin.M);
    for (const auto& [key, p] : ops.perturbed) {
        write_matrix(dir / ("P_" + std::to_string(key.first) + "_" +
                            std::to_string(key.second) + ".txt"),
                     p);
    }
    write_matrix(dir / "H.txt", ops.galerkin.H);
    write_vector(dir / "h0.txt", ops.galerkin.h0);

    std::cout << "m = " << ops.galerkin.basis.m << "\n"
              << "assembly_time_s = " << elapsed.count() << "\n";
    return 0;
}

int cmd_examples(const std::string& name, std::string out_path) {
    std::string content;
    if (name == "duffing") {
        content =
            "# Duffing oscillator: dq/dt = p, dp/dt = -q - eps q^3\n"
            "# The perturbation strength eps is supplied at run time (--epsilon).\n"
            "var q p\n"
            "d q = 1 p\n"
            "d p = -1 q\n"
            "perturb 1 1 p = -1 q^3\n";
    } else if (name == "vanderpol") {
        content =
            "# Van der Pol oscillator: dq/dt = p, dp/dt = -q + eps (1 - q^2) p\n"
            "var q p\n"
            "d q = 1 p\n"
            "d p = -1 q\n"
            "perturb 1 1 p = 1 p ; -1 q^2 p\n";
    } else if (name == "vanderpol-scaled") {
        content =
            "# Van der Pol oscillator in variables r = q/2, s = p/2 (scale Y = 2):\n"
            "# ds/dt = -r + eps (1 - 4 r^2) s\n"
            "var r s\n"
            "d r = 1 s\n"
            "d s = -1 r\n"
            "perturb 1 1 s = 1 s ; -4 r^2 s\n";
    } else {
        throw std::invalid_argument("unknown example '" + name +
                                    "' (expected duffing, vanderpol, vanderpol-scaled)");
    }
    if (out_path.empty()) out_path = name + ".ode";
    atomic_write(out_path, content);
    std::cout << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-form ODE solving via Schur decomposition and Galerkin lifting"};
    app.require_subcommand(1);

    SimulateConfig sim;
    auto* simulate = app.add_subcommand(
        "simulate", "Solve a polynomial system via the lifted linearization and "
                    "report errors against an RK4 reference");
    simulate->add_option("--system", sim.system_path, "system definition file")->required();
    simulate->add_option("--sigma", sim.sigma, "maximum basis order")->required();
    simulate->add_option("--epsilon", sim.epsilon_text,
                         "small parameter(s), comma-separated per source");
    simulate->add_option("--scheme", sim.scheme,
                         "direct | exact-decomp | approx | higher-order | multi-source");
    simulate->add_option("--tau", sim.tau_order, "perturbation expansion order");
    simulate->add_option("--ic", sim.ic_text, "initial state, comma-separated")->required();
    simulate->add_option("--x0", sim.x0, "initial abscissa");
    simulate->add_option("--x1", sim.x1, "final abscissa");
    simulate->add_option("--samples", sim.samples, "number of output samples");
    simulate->add_option("--scale", sim.scale_text, "per-variable normalization factors");
    simulate->add_option("--tau-time", sim.tau_time, "autonomization constant");
    simulate->add_option("--rk-step", sim.rk_step, "reference integrator step");
    simulate->add_option("--out", sim.out_path, "output CSV path")->required();
    simulate->add_flag("--emit-matrices", sim.emit_matrices,
                       "write the assembled matrices next to the CSV");
    simulate->add_option("--eps-eig", sim.eps_eig, "eigenvalue-equality threshold override");

    std::string sl_system, sl_matrix, sl_ic, sl_out;
    double sl_x0 = 0.0, sl_x1 = 1.0, sl_eps_eig = 0.0;
    int sl_samples = 101;
    int sl_max_iter = 30;
    auto* solvelin = app.add_subcommand(
        "solve-linear", "Closed-form solution of a linear system with a "
                        "matrix-exponential error report");
    solvelin->add_option("--system", sl_system, "system file with a purely linear field");
    solvelin->add_option("--matrix", sl_matrix, "matrix container file");
    solvelin->add_option("--ic", sl_ic, "initial state")->required();
    solvelin->add_option("--x0", sl_x0, "initial abscissa");
    solvelin->add_option("--x1", sl_x1, "final abscissa");
    solvelin->add_option("--samples", sl_samples, "number of output samples");
    solvelin->add_option("--out", sl_out, "output CSV path")->required();
    solvelin->add_option("--eps-eig", sl_eps_eig, "eigenvalue-equality threshold override");
    solvelin->add_option("--max-iter", sl_max_iter, "QR iteration budget per eigenvalue");

    std::string lin_system, lin_ic, lin_scale, lin_out = ".";
    int lin_sigma = 1;
    double lin_tau_time = 1.0;
    auto* linearize = app.add_subcommand(
        "linearize", "Assemble and write the Galerkin operator matrices");
    linearize->add_option("--system", lin_system, "system definition file")->required();
    linearize->add_option("--sigma", lin_sigma, "maximum basis order")->required();
    linearize->add_option("--ic", lin_ic, "initial state for h0 (default zeros)");
    linearize->add_option("--scale", lin_scale, "per-variable normalization factors");
    linearize->add_option("--tau-time", lin_tau_time, "autonomization constant");
    linearize->add_option("--out", lin_out, "output directory");

    std::string ex_name, ex_out;
    auto* examples = app.add_subcommand("examples", "Write a preset system file");
    examples->add_option("name", ex_name, "duffing | vanderpol | vanderpol-scaled")
        ->required();
    examples->add_option("--out", ex_out, "output path (default <name>.ode)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (solvelin->parsed()) {
            return cmd_solve_linear(sl_system, sl_matrix, sl_ic, sl_x0, sl_x1, sl_samples,
                                    sl_out, sl_eps_eig, sl_max_iter);
        }
        if (linearize->parsed()) {
            return cmd_linearize(lin_system, lin_sigma, lin_ic, lin_scale, lin_tau_time,
                                 lin_out);
        }
        if (examples->parsed()) return cmd_examples(ex_name, ex_out);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << " (" << e.converged_eigenvalues
                  << " eigenvalue(s) converged)\n";
        return kExitSchur;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << " at x = " << e.abscissa << "\n";
        return kExitDivergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
