#include "schurode/poly_system.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

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

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct Token {
    std::string text;
    int column = 0;
};

std::vector<Token> lex_line(const std::string& line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        if (line[i] == '#') break;  // comment to end of line
        if (line[i] == ';') {
            out.push_back({";", static_cast<int>(i) + 1});
            ++i;
            continue;
        }
        size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != ';' && line[i] != '#') {
            ++i;
        }
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

bool parse_full_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

bool parse_full_int(std::string_view s, int& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

void merge_monomials(std::vector<Monomial>& terms) {
    std::vector<Monomial> merged;
    for (const Monomial& m : terms) {
        bool found = false;
        for (Monomial& dst : merged) {
            if (dst.exponents == m.exponents && dst.x_exponent == m.x_exponent) {
                dst.kappa += m.kappa;
                found = true;
                break;
            }
        }
        if (!found) merged.push_back(m);
    }
    terms = std::move(merged);
}

std::string monomial_text(const Monomial& m, const std::vector<std::string>& names) {
    std::string out = format_double(m.kappa);
    for (size_t k = 0; k < m.exponents.size(); ++k) {
        if (m.exponents[k] == 0) continue;
        out += " " + names[k];
        if (m.exponents[k] != 1) out += "^" + std::to_string(m.exponents[k]);
    }
    if (m.x_exponent != 0) {
        out += " x";
        if (m.x_exponent != 1) out += "^" + std::to_string(m.x_exponent);
    }
    return out;
}

void serialize_equations(std::ostringstream& os, const PolynomialODE& sys,
                         const std::string& prefix) {
    for (int i = 0; i < sys.dimension(); ++i) {
        const auto& terms = sys.equations()[i];
        if (!prefix.empty() && terms.empty()) continue;  // perturb lines only when nonempty
        os << (prefix.empty() ? "d" : prefix) << " " << sys.var_names()[i] << " =";
        for (size_t t = 0; t < terms.size(); ++t) {
            os << (t == 0 ? " " : " ; ") << monomial_text(terms[t], sys.var_names());
        }
        os << "\n";
    }
}

}  // namespace

PolynomialODE::PolynomialODE(std::vector<std::string> var_names,
                             std::vector<std::vector<Monomial>> equations)
    : var_names_(std::move(var_names)), equations_(std::move(equations)) {
    if (equations_.size() != var_names_.size()) {
        throw DimensionError("PolynomialODE: one equation per variable required");
    }
    const size_t n = var_names_.size();
    for (auto& eq : equations_) {
        for (const Monomial& m : eq) {
            if (m.exponents.size() != n) {
                throw DimensionError("PolynomialODE: exponent tuple length mismatch");
            }
            for (int e : m.exponents) {
                if (e < 0) throw std::invalid_argument("PolynomialODE: negative exponent");
            }
            if (m.x_exponent < 0) {
                throw std::invalid_argument("PolynomialODE: negative exponent");
            }
            if (!std::isfinite(m.kappa)) {
                throw std::invalid_argument("PolynomialODE: non-finite coefficient");
            }
        }
        merge_monomials(eq);
        std::erase_if(eq, [](const Monomial& m) { return m.kappa == 0.0; });
    }
}

int PolynomialODE::max_terms() const {
    size_t nt = 0;
    for (const auto& eq : equations_) nt = std::max(nt, eq.size());
    return static_cast<int>(nt);
}

bool PolynomialODE::has_explicit_x() const {
    for (const auto& eq : equations_) {
        for (const Monomial& m : eq) {
            if (m.x_exponent != 0) return true;
        }
    }
    return false;
}

std::vector<double> PolynomialODE::rhs(std::span<const double> y) const {
    if (y.size() != var_names_.size()) {
        throw DimensionError("rhs: state length mismatch");
    }
    if (has_explicit_x()) {
        throw std::invalid_argument("rhs: system must be autonomous (run autonomize)");
    }
    std::vector<double> out(var_names_.size(), 0.0);
    for (size_t i = 0; i < equations_.size(); ++i) {
        double acc = 0.0;
        for (const Monomial& m : equations_[i]) {
            double term = m.kappa;
            for (size_t k = 0; k < m.exponents.size(); ++k) {
                if (m.exponents[k] != 0) term *= ipow(y[k], m.exponents[k]);
            }
            acc += term;
        }
        out[i] = acc;
    }
    return out;
}

PolynomialODE normalize_variables(const PolynomialODE& sys, const ScaleMap& scale) {
    const int n = sys.dimension();
    if (scale.factors.size() != static_cast<size_t>(n)) {
        throw DimensionError("normalize_variables: scale length mismatch");
    }
    for (double f : scale.factors) {
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw std::invalid_argument("normalize_variables: scales must be positive");
        }
    }
    auto eqs = sys.equations();
    for (int i = 0; i < n; ++i) {
        for (Monomial& m : eqs[i]) {
            double factor = 1.0 / scale.factors[i];
            for (int k = 0; k < n; ++k) factor *= ipow(scale.factors[k], m.exponents[k]);
            m.kappa *= factor;
        }
    }
    return PolynomialODE(sys.var_names(), std::move(eqs));
}

PolynomialODE autonomize(const PolynomialODE& sys, double tau) {
    if (tau == 0.0 || !std::isfinite(tau)) {
        throw std::invalid_argument("autonomize: tau must be nonzero and finite");
    }
    std::vector<std::string> names = sys.var_names();
    std::string zname = "z";
    while (std::find(names.begin(), names.end(), zname) != names.end()) zname += "_";
    names.push_back(zname);

    const double inv_tau = 1.0 / tau;
    std::vector<std::vector<Monomial>> eqs;
    eqs.reserve(names.size());
    for (const auto& eq : sys.equations()) {
        std::vector<Monomial> out;
        out.reserve(eq.size());
        for (const Monomial& m : eq) {
            Monomial t = m;
            t.exponents.push_back(m.x_exponent);
            t.kappa *= ipow(inv_tau, m.x_exponent);
            t.x_exponent = 0;
            out.push_back(std::move(t));
        }
        eqs.push_back(std::move(out));
    }
    Monomial dz;
    dz.kappa = tau;
    dz.exponents.assign(names.size(), 0);
    eqs.push_back({dz});
    return PolynomialODE(std::move(names), std::move(eqs));
}

int SystemDocument::source_count() const {
    int ns = 0;
    for (const auto& [key, field] : perturbations) ns = std::max(ns, key.first);
    return ns;
}

int SystemDocument::order_count() const {
    int nk = 0;
    for (const auto& [key, field] : perturbations) nk = std::max(nk, key.second);
    return nk;
}

PolynomialODE SystemDocument::combined(std::span<const double> eps) const {
    if (static_cast<int>(eps.size()) < source_count()) {
        throw DimensionError("combined: one small parameter per source required");
    }
    auto eqs = base.equations();
    for (const auto& [key, field] : perturbations) {
        const double factor = ipow(eps[key.first - 1], key.second);
        for (int i = 0; i < base.dimension(); ++i) {
            for (Monomial m : field.equations()[i]) {
                m.kappa *= factor;
                eqs[i].push_back(std::move(m));
            }
        }
    }
    return PolynomialODE(base.var_names(), std::move(eqs));
}

SystemDocument normalize_variables(const SystemDocument& doc, const ScaleMap& scale) {
    SystemDocument out;
    out.base = normalize_variables(doc.base, scale);
    for (const auto& [key, field] : doc.perturbations) {
        out.perturbations.emplace(key, normalize_variables(field, scale));
    }
    return out;
}

SystemDocument autonomize(const SystemDocument& doc, double tau) {
    SystemDocument out;
    out.base = autonomize(doc.base, tau);
    for (const auto& [key, field] : doc.perturbations) {
        PolynomialODE lifted = autonomize(field, tau);
        auto eqs = lifted.equations();
        eqs.back().clear();  // the dz/dx = tau equation belongs to the base only
        out.perturbations.emplace(key, PolynomialODE(lifted.var_names(), std::move(eqs)));
    }
    return out;
}

namespace {

struct EquationDraft {
    std::vector<Monomial> terms;
    bool seen = false;
};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    SystemDocument run() {
        std::istringstream stream{std::string(text_)};
        std::string line;
        while (std::getline(stream, line)) {
            ++lineno_;
            auto tokens = lex_line(line);
            if (tokens.empty()) continue;
            handle_line(tokens);
        }
        return finish();
    }

private:
    [[noreturn]] void fail(const std::string& what, int column) const {
        throw ParseError(what, lineno_, column);
    }

    int variable_index(const Token& tok) const {
        for (size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == tok.text) return static_cast<int>(i);
        }
        fail("unknown variable name '" + tok.text + "'", tok.column);
    }

    void handle_line(const std::vector<Token>& tokens) {
        const std::string& head = tokens[0].text;
        if (head == "var") {
            if (tokens.size() < 2) fail("expected variable names after 'var'", tokens[0].column);
            for (size_t i = 1; i < tokens.size(); ++i) {
                if (!is_name(tokens[i].text)) {
                    fail("invalid variable name '" + tokens[i].text + "'", tokens[i].column);
                }
                if (tokens[i].text == "x") {
                    fail("'x' names the independent variable and cannot be declared",
                         tokens[i].column);
                }
                if (std::find(names_.begin(), names_.end(), tokens[i].text) != names_.end()) {
                    fail("duplicate variable '" + tokens[i].text + "'", tokens[i].column);
                }
                names_.push_back(tokens[i].text);
                equations_.emplace_back();
            }
            return;
        }
        if (head == "d" || (head.size() > 1 && head[0] == 'd' && is_name(head.substr(1)))) {
            size_t pos = 1;
            Token var_tok;
            if (head == "d") {
                if (tokens.size() < 2) fail("expected variable name after 'd'", tokens[0].column);
                var_tok = tokens[1];
                pos = 2;
            } else {
                var_tok = {head.substr(1), tokens[0].column + 1};
            }
            const int var = variable_index(var_tok);
            expect_equals(tokens, pos);
            auto terms = parse_monomials(tokens, pos + 1);
            if (equations_[var].seen) fail("duplicate equation for '" + var_tok.text + "'", var_tok.column);
            equations_[var].terms = std::move(terms);
            equations_[var].seen = true;
            return;
        }
        if (head == "perturb") {
            size_t pos = 1;
            int source = 1;
            int order = 1;
            if (tokens.size() > 2 && parse_full_int(tokens[1].text, source)) {
                if (!(tokens.size() > 3 && parse_full_int(tokens[2].text, order))) {
                    fail("expected perturbation order after source index", tokens[1].column);
                }
                if (source < 1 || order < 1) {
                    fail("perturbation source and order must be >= 1", tokens[1].column);
                }
                pos = 3;
            }
            if (pos >= tokens.size()) fail("expected variable name in perturb line", tokens[0].column);
            const Token var_tok = tokens[pos];
            const int var = variable_index(var_tok);
            expect_equals(tokens, pos + 1);
            auto terms = parse_monomials(tokens, pos + 2);
            auto& group = perturb_[{source, order}];
            if (group.empty()) group.resize(names_.size());
            for (Monomial& m : terms) group[var].push_back(std::move(m));
            return;
        }
        fail("unrecognized line '" + head + "'", tokens[0].column);
    }

    static bool is_name(std::string_view s) {
        if (s.empty()) return false;
        for (char c : s) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
        }
        return !std::isdigit(static_cast<unsigned char>(s[0]));
    }

    void expect_equals(const std::vector<Token>& tokens, size_t pos) const {
        if (pos >= tokens.size() || tokens[pos].text != "=") {
            const int col = pos < tokens.size() ? tokens[pos].column : 1;
            fail("expected '='", col);
        }
    }

    std::vector<Monomial> parse_monomials(const std::vector<Token>& tokens, size_t pos) {
        std::vector<Monomial> out;
        while (pos < tokens.size()) {
            Monomial m;
            m.exponents.assign(names_.size(), 0);
            double coeff = 0.0;
            if (tokens[pos].text == ";") fail("empty monomial", tokens[pos].column);
            if (!parse_full_double(tokens[pos].text, coeff)) {
                fail("expected numeric coefficient, got '" + tokens[pos].text + "'",
                     tokens[pos].column);
            }
            m.kappa = coeff;
            ++pos;
            while (pos < tokens.size() && tokens[pos].text != ";") {
                const Token& tok = tokens[pos];
                std::string name = tok.text;
                int exp = 1;
                if (auto caret = name.find('^'); caret != std::string::npos) {
                    const std::string exp_text = name.substr(caret + 1);
                    name = name.substr(0, caret);
                    if (!parse_full_int(exp_text, exp)) {
                        fail("exponent must be a decimal integer", tok.column);
                    }
                    if (exp < 0) fail("negative exponent", tok.column);
                }
                if (name == "x") {
                    m.x_exponent += exp;
                } else {
                    const int var = variable_index({name, tok.column});
                    m.exponents[var] += exp;
                }
                ++pos;
            }
            out.push_back(std::move(m));
            if (pos < tokens.size() && tokens[pos].text == ";") {
                ++pos;
                if (pos >= tokens.size()) fail("trailing ';'", tokens.back().column);
            }
        }
        return out;
    }

    SystemDocument finish() {
        if (names_.empty()) {
            throw ParseError("no variables declared", std::max(lineno_, 1), 1);
        }
        std::vector<std::vector<Monomial>> eqs;
        eqs.reserve(equations_.size());
        for (auto& e : equations_) eqs.push_back(std::move(e.terms));
        SystemDocument doc;
        doc.base = PolynomialODE(names_, std::move(eqs));
        for (auto& [key, group] : perturb_) {
            doc.perturbations.emplace(key, PolynomialODE(names_, std::move(group)));
        }
        return doc;
    }

    std::string_view text_;
    int lineno_ = 0;
    std::vector<std::string> names_;
    std::vector<EquationDraft> equations_;
    std::map<std::pair<int, int>, std::vector<std::vector<Monomial>>> perturb_;
};

}  // namespace

SystemDocument parse_system(std::string_view text) { return Parser(text).run(); }

std::string serialize(const SystemDocument& doc) {
    std::ostringstream os;
    os << "var";
    for (const auto& name : doc.base.var_names()) os << " " << name;
    os << "\n";
    serialize_equations(os, doc.base, "");
    for (const auto& [key, field] : doc.perturbations) {
        const std::string prefix =
            "perturb " + std::to_string(key.first) + " " + std::to_string(key.second);
        serialize_equations(os, field, prefix);
    }
    return os.str();
}

std::string serialize(const PolynomialODE& sys) {
    SystemDocument doc;
    doc.base = sys;
    return serialize(doc);
}

}  // namespace schurode
