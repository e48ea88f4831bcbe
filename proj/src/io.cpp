#include "schurode/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace schurode {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double_token(std::istream& is, const char* context) {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error(std::string(context) + ": unexpected end of input");
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw std::runtime_error(std::string(context) + ": bad number '" + tok + "'");
    }
    return v;
}

}  // namespace

void write_matrix(std::ostream& os, const Matrix& m) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (m(i, j).imag() != 0.0) {
                throw std::invalid_argument("write_matrix: matrix is not real-valued");
            }
        }
    }
    os << "schurode-matrix 1\n" << m.rows() << " " << m.cols() << "\n";
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) os << " ";
            os << shortest(m(i, j).real());
        }
        os << "\n";
    }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ostringstream os;
    write_matrix(os, m);
    atomic_write(path, os.str());
}

Matrix read_matrix(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "schurode-matrix" || version != 1) {
        throw std::runtime_error("read_matrix: not a schurode-matrix file");
    }
    int rows = 0;
    int cols = 0;
    if (!(is >> rows >> cols) || rows <= 0 || cols <= 0) {
        throw std::runtime_error("read_matrix: bad dimension header");
    }
    std::vector<double> entries(static_cast<size_t>(rows) * cols);
    for (auto& e : entries) e = parse_double_token(is, "read_matrix");
    return Matrix::from_real(rows, cols, entries);
}

Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_matrix: cannot open " + path.string());
    return read_matrix(is);
}

void write_vector(const std::filesystem::path& path, std::span<const double> v) {
    write_matrix(path, Matrix::from_real(static_cast<int>(v.size()), 1, v));
}

std::vector<double> read_vector(const std::filesystem::path& path) {
    const Matrix m = read_matrix(path);
    if (m.cols() != 1) throw std::runtime_error("read_vector: expected a single column");
    std::vector<double> out(m.rows());
    for (int i = 0; i < m.rows(); ++i) out[i] = m(i, 0).real();
    return out;
}

std::string format_full(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    const size_t n = t.y.empty() ? 0 : t.y.front().size();
    const bool with_ref = !t.ref.empty();
    os << "x";
    for (size_t i = 1; i <= n; ++i) os << ",y_" << i;
    if (with_ref) {
        for (size_t i = 1; i <= n; ++i) os << ",ref_" << i;
        for (size_t i = 1; i <= n; ++i) os << ",err_" << i;
    }
    os << "\n";
    for (size_t s = 0; s < t.x.size(); ++s) {
        os << format_full(t.x[s]);
        for (size_t i = 0; i < n; ++i) os << "," << format_full(t.y[s][i]);
        if (with_ref) {
            for (size_t i = 0; i < n; ++i) os << "," << format_full(t.ref[s][i]);
            for (size_t i = 0; i < n; ++i) os << "," << format_full(t.err[s][i]);
        }
        os << "\n";
    }
}

std::string trajectory_csv(const Trajectory& t) {
    std::ostringstream os;
    write_trajectory_csv(os, t);
    return os.str();
}

std::string content_hash(std::string_view text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        os << content;
        if (!os) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace schurode
