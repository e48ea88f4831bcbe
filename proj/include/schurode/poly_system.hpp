#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schurode/errors.hpp"

namespace schurode {

/// One monomial kappa * prod_k y_k^exponents[k] * x^x_exponent of a
/// polynomial right-hand side. x_exponent marks explicit dependence on the
/// independent variable and is removed by autonomize().
struct Monomial {
    double kappa = 0.0;
    std::vector<int> exponents;
    int x_exponent = 0;

    bool operator==(const Monomial&) const = default;
};

/// Per-variable scale factors plus the autonomization constant.
struct ScaleMap {
    std::vector<double> factors;
    double tau = 1.0;
};

/// A polynomial vector field dy_i/dx = sum_j kappa_ij prod_k y_k^gamma_ijk.
/// Zero-coefficient monomials are dropped on construction; exponents must be
/// nonnegative integers.
class PolynomialODE {
public:
    PolynomialODE() = default;
    PolynomialODE(std::vector<std::string> var_names,
                  std::vector<std::vector<Monomial>> equations);

    int dimension() const { return static_cast<int>(var_names_.size()); }
    /// Largest monomial count over all equations.
    int max_terms() const;
    bool has_explicit_x() const;

    const std::vector<std::string>& var_names() const { return var_names_; }
    const std::vector<std::vector<Monomial>>& equations() const { return equations_; }

    /// Exact monomial-sum evaluation; requires an autonomous system.
    std::vector<double> rhs(std::span<const double> y) const;

    bool operator==(const PolynomialODE&) const = default;

private:
    std::vector<std::string> var_names_;
    std::vector<std::vector<Monomial>> equations_;
};

/// Change of variables y_i = Y_i * r_i: each monomial coefficient picks up
/// prod_k Y_k^gamma_k / Y_i.
PolynomialODE normalize_variables(const PolynomialODE& sys, const ScaleMap& scale);

/// Append a state z with dz/dx = tau and substitute x -> z/tau everywhere.
PolynomialODE autonomize(const PolynomialODE& sys, double tau);

/// A parsed system document: the base field plus optional perturbation fields
/// g^(s,k), combined as f = b + sum_{s,k} eps_s^k g^(s,k).
class SystemDocument {
public:
    PolynomialODE base;
    std::map<std::pair<int, int>, PolynomialODE> perturbations;

    bool has_perturbation() const { return !perturbations.empty(); }
    int source_count() const;
    int order_count() const;

    /// The full field for given per-source small parameters (size >= source_count).
    PolynomialODE combined(std::span<const double> eps) const;

    bool operator==(const SystemDocument&) const = default;
};

/// Document-level transforms: the base field and every perturbation field
/// change coordinates together. Autonomizing appends the z state to the base
/// (with its dz/dx = tau equation) and pads perturbation fields with a zero
/// z equation.
SystemDocument normalize_variables(const SystemDocument& doc, const ScaleMap& scale);
SystemDocument autonomize(const SystemDocument& doc, double tau);

/// Parse the plain-text system grammar:
///   line      := "var" NAME+ | "d" NAME "=" monomials
///              | "perturb" [S K] NAME "=" monomials | comment
///   monomials := monomial (";" monomial)*
///   monomial  := COEFF (NAME ("^" INT)?)*
/// Tokens are whitespace-separated; "x" names the independent variable.
SystemDocument parse_system(std::string_view text);

/// Emit the same grammar; numbers round-trip exactly.
std::string serialize(const SystemDocument& doc);
std::string serialize(const PolynomialODE& sys);

}  // namespace schurode
