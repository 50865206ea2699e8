#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hlu/core.hpp"
#include "hlu/error.hpp"

namespace hlu {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("Matrix Market: empty input");

    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    if (!(header >> banner >> object >> format >> field >> symmetry)) throw ParseError("Matrix Market: malformed header");
    if (banner != "%%MatrixMarket") throw ParseError("Matrix Market: missing %%MatrixMarket banner");
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix") throw ParseError("Matrix Market: object must be 'matrix'");
    if (format != "coordinate") throw UnsupportedFormat("Matrix Market: only coordinate format is supported");
    if (field != "real" && field != "integer" && field != "double")
        throw UnsupportedFormat("Matrix Market: unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        throw UnsupportedFormat("Matrix Market: unsupported symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";

    do {
        if (!std::getline(in, line)) throw ParseError("Matrix Market: missing size line");
    } while (line.empty() || line[0] == '%');

    std::size_t rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream size_line(line);
        if (!(size_line >> rows >> cols >> nnz)) throw ParseError("Matrix Market: malformed size line");
    }
    if (rows != cols) throw UnsupportedFormat("Matrix Market: matrix must be square");

    std::vector<Entry> entries;
    entries.reserve(symmetric ? 2 * nnz : nnz);
    std::size_t seen = 0;
    while (seen < nnz && std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream es(line);
        std::size_t r = 0, c = 0;
        double v = 0.0;
        if (!(es >> r >> c >> v)) throw ParseError("Matrix Market: malformed entry on line '" + line + "'");
        if (r == 0 || c == 0 || r > rows || c > cols) throw ParseError("Matrix Market: entry index out of range");
        entries.push_back({r - 1, c - 1, v});
        if (symmetric && r != c) entries.push_back({c - 1, r - 1, v});
        ++seen;
    }
    if (seen != nnz) throw ParseError("Matrix Market: fewer entries than declared");
    return SparseMatrix(rows, std::move(entries), symmetric ? Symmetry::symmetric : Symmetry::general);
}

SparseMatrix load_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_matrix_market(in);
}

void write_matrix_market(const SparseMatrix& m, std::ostream& out) {
    const bool symmetric = m.symmetry_hint() == Symmetry::symmetric && m.is_symmetric();
    std::vector<Entry> entries = m.entries();
    if (symmetric) std::erase_if(entries, [](const Entry& e) { return e.col > e.row; });

    out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
    out << m.size() << ' ' << m.size() << ' ' << entries.size() << '\n';
    char buf[64];
    for (const Entry& e : entries) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), e.value);
        out << e.row + 1 << ' ' << e.col + 1 << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf))
            << '\n';
    }
}

void save_matrix_market(const SparseMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_matrix_market(m, out);
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace hlu
