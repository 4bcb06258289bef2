#include <cdsolve/io.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cdsolve {

namespace {

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open file");
    return in;
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double parse_double(const std::string& tok, const std::string& path, std::size_t line)
{
    // from_chars for doubles rejects a leading '+'
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    if (b != e && *b == '+') ++b;
    double v = 0.;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) {
        // inf / nan spellings are not accepted
        throw IoError(path + ":" + std::to_string(line) + ": invalid number '" + tok + "'");
    }
    return v;
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string strip_comment(const std::string& line, char mark)
{
    const auto pos = line.find(mark);
    return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

std::optional<MatrixFormat> parse_matrix_format(const std::string& name)
{
    const std::string n = lower(name);
    if (n == "mtx" || n == "matrix_market" || n == "matrixmarket") return MatrixFormat::MatrixMarket;
    if (n == "csv" || n == "dense") return MatrixFormat::DenseCsv;
    if (n == "libsvm" || n == "svmlight" || n == "svm") return MatrixFormat::Libsvm;
    return std::nullopt;
}

MatrixFormat guess_matrix_format(const std::string& path)
{
    const std::string p = lower(path);
    if (ends_with(p, ".mtx")) return MatrixFormat::MatrixMarket;
    if (ends_with(p, ".svm") || ends_with(p, ".libsvm")) return MatrixFormat::Libsvm;
    return MatrixFormat::DenseCsv;
}

SparseColMatrix read_matrix_market(const std::string& path)
{
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    ++lineno;
    std::istringstream hdr(lower(line));
    std::string banner, object, layout, field, symmetry;
    hdr >> banner >> object >> layout >> field >> symmetry;
    if (banner != "%%matrixmarket" || object != "matrix")
        throw IoError(path + ":1: missing '%%MatrixMarket matrix' header");
    if (layout != "coordinate" && layout != "array")
        throw IoError(path + ":1: unsupported layout '" + layout + "'");
    if (field != "real" && field != "integer" && field != "double" && field != "pattern")
        throw IoError(path + ":1: unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        throw IoError(path + ":1: unsupported symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";
    const bool pattern = field == "pattern";

    std::vector<std::string> f;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        f = split_fields(line);
        if (!f.empty()) break;
    }
    if (f.empty()) throw IoError(path + ": missing size line");
    const std::size_t size_line = lineno;
    auto to_index = [&](const std::string& s, std::size_t ln) {
        const double v = parse_double(s, path, ln);
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw IoError(path + ":" + std::to_string(ln) + ": invalid index '" + s + "'");
        return static_cast<std::size_t>(v);
    };

    if (layout == "array") {
        if (f.size() != 2) throw IoError(path + ":" + std::to_string(size_line) + ": expected 'rows cols'");
        const std::size_t m = to_index(f[0], size_line), n = to_index(f[1], size_line);
        std::vector<double> vals;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '%') continue;
            for (auto& tok : split_fields(line)) vals.push_back(parse_double(tok, path, lineno));
        }
        std::vector<Triplet> t;
        if (symmetric) {
            // lower triangle, column-major
            std::size_t k = 0;
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t r = c; r < m; ++r, ++k) {
                    if (k >= vals.size()) throw IoError(path + ": too few entries");
                    t.push_back({r, c, vals[k]});
                    if (r != c) t.push_back({c, r, vals[k]});
                }
        } else {
            if (vals.size() != m * n)
                throw IoError(path + ": expected " + std::to_string(m * n) + " entries, found " +
                              std::to_string(vals.size()));
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t r = 0; r < m; ++r) t.push_back({r, c, vals[c * m + r]});
        }
        return SparseColMatrix::from_triplets(m, n, std::move(t));
    }

    if (f.size() != 3) throw IoError(path + ":" + std::to_string(size_line) + ": expected 'rows cols nnz'");
    const std::size_t m = to_index(f[0], size_line), n = to_index(f[1], size_line),
                      nnz = to_index(f[2], size_line);
    std::vector<Triplet> t;
    t.reserve(symmetric ? 2 * nnz : nnz);
    std::size_t read = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        auto e = split_fields(line);
        if (e.empty()) continue;
        if (e.size() != (pattern ? 2u : 3u))
            throw IoError(path + ":" + std::to_string(lineno) + ": malformed entry");
        const std::size_t r = to_index(e[0], lineno), c = to_index(e[1], lineno);
        if (r < 1 || r > m || c < 1 || c > n)
            throw IoError(path + ":" + std::to_string(lineno) + ": index out of range");
        const double v = pattern ? 1. : parse_double(e[2], path, lineno);
        t.push_back({r - 1, c - 1, v});
        if (symmetric && r != c) t.push_back({c - 1, r - 1, v});
        ++read;
    }
    if (read != nnz)
        throw IoError(path + ": header announces " + std::to_string(nnz) + " entries, found " + std::to_string(read));
    return SparseColMatrix::from_triplets(m, n, std::move(t));
}

void write_matrix_market(const std::string& path, const SparseColMatrix& m)
{
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open file for writing");
    out << "%%MatrixMarket matrix coordinate real general\n" << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    char buf[64];
    for (std::size_t c = 0; c < m.cols(); ++c)
        for (std::size_t k = m.col_begin(c); k < m.col_end(c); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", m.values()[k]);
            out << m.row_idx()[k] + 1 << ' ' << c + 1 << ' ' << buf << '\n';
        }
}

SparseColMatrix read_dense_csv(const std::string& path)
{
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 0, cols = 0, rows = 0;
    std::vector<double> data;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = split_fields(strip_comment(line, '#'));
        if (fields.empty()) continue;
        if (rows == 0) cols = fields.size();
        if (fields.size() != cols)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                          " columns, found " + std::to_string(fields.size()));
        for (const auto& tok : fields) data.push_back(parse_double(tok, path, lineno));
        ++rows;
    }
    return SparseColMatrix::from_dense(rows, cols, data);
}

LibsvmData read_libsvm(const std::string& path, std::optional<std::size_t> n_features)
{
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 0, rows = 0, max_col = 0;
    std::vector<Triplet> t;
    LibsvmData d;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(strip_comment(line, '#'));
        std::string tok;
        if (!(ls >> tok)) continue;
        d.labels.push_back(parse_double(tok, path, lineno));
        while (ls >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw IoError(path + ":" + std::to_string(lineno) + ": expected index:value, found '" + tok + "'");
            const double idx = parse_double(tok.substr(0, colon), path, lineno);
            if (idx < 1 || idx != static_cast<double>(static_cast<std::size_t>(idx)))
                throw IoError(path + ":" + std::to_string(lineno) + ": invalid feature index");
            const auto c = static_cast<std::size_t>(idx) - 1;
            max_col = std::max(max_col, c + 1);
            t.push_back({rows, c, parse_double(tok.substr(colon + 1), path, lineno)});
        }
        ++rows;
    }
    const std::size_t cols = n_features.value_or(max_col);
    if (max_col > cols)
        throw IoError(path + ": feature index " + std::to_string(max_col) + " exceeds declared " +
                      std::to_string(cols) + " features");
    d.A = SparseColMatrix::from_triplets(rows, cols, std::move(t));
    return d;
}

SparseColMatrix read_matrix(const std::string& path, std::optional<MatrixFormat> format)
{
    switch (format.value_or(guess_matrix_format(path))) {
    case MatrixFormat::MatrixMarket: return read_matrix_market(path);
    case MatrixFormat::Libsvm: return read_libsvm(path).A;
    case MatrixFormat::DenseCsv: break;
    }
    return read_dense_csv(path);
}

std::vector<double> read_vector(const std::string& path)
{
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> v;
    while (std::getline(in, line)) {
        ++lineno;
        for (const auto& tok : split_fields(strip_comment(line, '#'))) v.push_back(parse_double(tok, path, lineno));
    }
    return v;
}

void write_vector(std::ostream& os, const std::vector<double>& v)
{
    char buf[64];
    for (double e : v) {
        std::snprintf(buf, sizeof buf, "%.17g", e);
        os << buf << '\n';
    }
}

void write_vector(const std::string& path, const std::vector<double>& v)
{
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open file for writing");
    write_vector(out, v);
}

}  // namespace cdsolve
