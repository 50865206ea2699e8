#include "hlu/problems.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>

#include "hlu/error.hpp"

namespace hlu {

void GridSpec::validate() const {
    if (nx < 2 || ny < 2 || (nz != 1 && nz < 2)) throw Error("grid dimensions must be at least 2");
}

namespace {

struct Neighbor {
    std::size_t index;
    int axis;
    int dir;  // +1 / -1
};

// Neighbours of (x,y,z) along each axis; periodic grids wrap.
std::vector<Neighbor> neighbors(const GridSpec& g, std::size_t x, std::size_t y, std::size_t z) {
    std::vector<Neighbor> out;
    const std::array<std::size_t, 3> dims{g.nx, g.ny, g.nz};
    const std::array<std::size_t, 3> pos{x, y, z};
    const int axes = g.is_3d() ? 3 : 2;
    for (int a = 0; a < axes; ++a)
        for (int d : {-1, 1}) {
            auto p = pos;
            const std::size_t n = dims[a];
            if (d < 0) {
                if (p[a] == 0) {
                    if (g.bc == Boundary::dirichlet) continue;
                    p[a] = n - 1;
                } else {
                    --p[a];
                }
            } else {
                if (p[a] + 1 == n) {
                    if (g.bc == Boundary::dirichlet) continue;
                    p[a] = 0;
                } else {
                    ++p[a];
                }
            }
            out.push_back({g.index(p[0], p[1], p[2]), a, d});
        }
    return out;
}

template <class F>
void for_each_cell(const GridSpec& g, F&& f) {
    for (std::size_t z = 0; z < g.nz; ++z)
        for (std::size_t y = 0; y < g.ny; ++y)
            for (std::size_t x = 0; x < g.nx; ++x) f(g.index(x, y, z), x, y, z);
}

}  // namespace

SparseMatrix poisson(const GridSpec& spec) {
    return variable_coeff_poisson(spec, CoeffField{CoeffCase::constant, 0});
}

std::vector<double> coefficient_values(std::size_t n, const CoeffField& field) {
    std::vector<double> phi(n, 1.0);
    if (field.kind == CoeffCase::constant) return phi;
    Rng rng(field.seed);
    for (double& v : phi) {
        switch (field.kind) {
            case CoeffCase::unif01: v = rng.uniform(); break;
            case CoeffCase::inverse_unif01: {
                double rho = rng.uniform();
                while (rho < 1e-6) rho = rng.uniform();
                v = 1.0 / rho;
                break;
            }
            case CoeffCase::unif_neg1_1: v = rng.uniform(-1.0, 1.0); break;
            case CoeffCase::constant: break;
        }
    }
    return phi;
}

SparseMatrix variable_coeff_poisson(const GridSpec& spec, const CoeffField& field) {
    spec.validate();
    const std::size_t n = spec.size();
    const std::vector<double> phi = coefficient_values(n, field);
    std::vector<Entry> e;
    e.reserve(n * 7 + 1);
    for_each_cell(spec, [&](std::size_t p, std::size_t x, std::size_t y, std::size_t z) {
        // Dirichlet boundary faces use the cell's own coefficient.
        const auto nb = neighbors(spec, x, y, z);
        const std::size_t faces = spec.is_3d() ? 6 : 4;
        double diag = double(faces - nb.size()) * phi[p];
        for (const Neighbor& q : nb) {
            const double face = 0.5 * (phi[p] + phi[q.index]);
            diag += face;
            e.push_back({p, q.index, -face});
        }
        e.push_back({p, p, diag});
    });
    if (spec.bc == Boundary::periodic) e.push_back({0, 0, 1.0});
    return SparseMatrix(n, std::move(e), Symmetry::symmetric);
}

double grid_spacing(const GridSpec& spec) {
    return 1.0 / double(std::max({spec.nx, spec.ny, spec.nz}) + 1);
}

SparseMatrix advection_diffusion(const GridSpec& spec, double sigma, double r) {
    spec.validate();
    if (spec.bc != Boundary::dirichlet) throw Error("advection-diffusion is defined on Dirichlet grids");
    const double h = grid_spacing(spec);
    const double diag = sigma * h * h + (spec.is_3d() ? 6.0 : 4.0);
    std::vector<Entry> e;
    for_each_cell(spec, [&](std::size_t p, std::size_t x, std::size_t y, std::size_t z) {
        for (const Neighbor& q : neighbors(spec, x, y, z)) e.push_back({p, q.index, -1.0 + q.dir * r * h / 2.0});
        e.push_back({p, p, diag});
    });
    return SparseMatrix(spec.size(), std::move(e), r == 0.0 ? Symmetry::symmetric : Symmetry::general);
}

SparseMatrix identity_matrix(std::size_t n) {
    std::vector<Entry> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, i, 1.0});
    return SparseMatrix(n, std::move(e), Symmetry::symmetric);
}

SparseMatrix random_diagonally_dominant(std::size_t n, std::size_t per_row, std::uint64_t seed) {
    if (n == 0) throw Error("matrix size must be positive");
    Rng rng(seed);
    std::vector<Entry> e;
    std::vector<double> rowsum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < (per_row + 1) / 2 && n > 1; ++k) {
            const std::size_t j = rng.next() % n;
            if (j == i) continue;
            const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
            e.push_back({i, j, a});
            e.push_back({j, i, b});
            rowsum[i] += std::abs(a);
            rowsum[j] += std::abs(b);
        }
    }
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, i, rowsum[i] + 1.0 + rng.uniform()});
    return SparseMatrix(n, std::move(e));
}

ManufacturedRhs manufactured_rhs(const SparseMatrix& m, std::uint64_t seed) {
    Rng rng(seed);
    ManufacturedRhs out;
    out.x.resize(m.size());
    for (double& v : out.x) v = rng.uniform(-1.0, 1.0);
    out.b = m.multiply(out.x);
    return out;
}

namespace {

struct ParsedSpec {
    std::string name;
    std::vector<double> positional;
    std::map<std::string, double> named;
};

double parse_number(const std::string& s, const std::string& whole) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("bad number '" + s + "' in generator spec '" + whole + "'");
    return v;
}

ParsedSpec parse_spec(const std::string& spec) {
    ParsedSpec p;
    const auto colon = spec.find(':');
    p.name = spec.substr(0, colon);
    if (colon == std::string::npos) return p;
    std::string rest = spec.substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
        std::size_t comma = rest.find(',', start);
        if (comma == std::string::npos) comma = rest.size();
        const std::string tok = rest.substr(start, comma - start);
        if (!tok.empty()) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) {
                if (!p.named.empty()) throw ParseError("positional parameter after named one in '" + spec + "'");
                p.positional.push_back(parse_number(tok, spec));
            } else {
                p.named[tok.substr(0, eq)] = parse_number(tok.substr(eq + 1), spec);
            }
        }
        start = comma + 1;
    }
    return p;
}

std::size_t as_size(double v, const std::string& spec) {
    if (v < 0 || v != std::floor(v)) throw ParseError("expected a non-negative integer in '" + spec + "'");
    return static_cast<std::size_t>(v);
}

GridSpec grid_from(const ParsedSpec& p, std::size_t dims, Boundary bc, const std::string& spec) {
    if (p.positional.size() != 1 && p.positional.size() != dims)
        throw ParseError("'" + spec + "' needs 1 or " + std::to_string(dims) + " grid sizes");
    GridSpec g;
    g.bc = bc;
    auto dim = [&](std::size_t k) { return as_size(p.positional[p.positional.size() == 1 ? 0 : k], spec); };
    g.nx = dim(0);
    g.ny = dim(1);
    g.nz = dims == 3 ? dim(2) : 1;
    g.validate();
    return g;
}

double named_or(const ParsedSpec& p, const std::string& key, double fallback) {
    auto it = p.named.find(key);
    return it == p.named.end() ? fallback : it->second;
}

}  // namespace

SparseMatrix generate(const std::string& spec, std::uint64_t default_seed) {
    const ParsedSpec p = parse_spec(spec);
    const auto seed = static_cast<std::uint64_t>(named_or(p, "seed", double(default_seed)));
    const bool periodic = named_or(p, "periodic", 0.0) != 0.0;
    const Boundary bc = periodic ? Boundary::periodic : Boundary::dirichlet;
    if (p.name == "poisson2d") return poisson(grid_from(p, 2, bc, spec));
    if (p.name == "poisson3d") return poisson(grid_from(p, 3, bc, spec));
    if (p.name == "vcp" || p.name == "vcp2d") {
        const std::size_t dims = p.name == "vcp" ? 3 : 2;
        const int c = static_cast<int>(named_or(p, "case", 1));
        CoeffField f{CoeffCase::constant, seed};
        switch (c) {
            case 0: f.kind = CoeffCase::constant; break;
            case 1: f.kind = CoeffCase::unif01; break;
            case 2: f.kind = CoeffCase::inverse_unif01; break;
            case 3: f.kind = CoeffCase::unif_neg1_1; break;
            default: throw ParseError("vcp case must be 0..3 in '" + spec + "'");
        }
        return variable_coeff_poisson(grid_from(p, dims, Boundary::periodic, spec), f);
    }
    if (p.name == "advdiff" || p.name == "advdiff2d") {
        const std::size_t dims = p.name == "advdiff" ? 3 : 2;
        return advection_diffusion(grid_from(p, dims, Boundary::dirichlet, spec), named_or(p, "sigma", 0.0),
                                   named_or(p, "R", 0.0));
    }
    if (p.name == "identity") {
        if (p.positional.size() != 1) throw ParseError("identity needs a size: '" + spec + "'");
        return identity_matrix(as_size(p.positional[0], spec));
    }
    if (p.name == "randdd") {
        if (p.positional.empty()) throw ParseError("randdd needs a size: '" + spec + "'");
        const std::size_t per_row = p.positional.size() > 1 ? as_size(p.positional[1], spec) : 6;
        return random_diagonally_dominant(as_size(p.positional[0], spec), per_row, seed);
    }
    if (p.name == "ring") {
        // 1D periodic chain, mainly for tiny traces.
        if (p.positional.size() != 1) throw ParseError("ring needs a size: '" + spec + "'");
        const std::size_t n = as_size(p.positional[0], spec);
        if (n < 3) throw Error("ring needs at least 3 points");
        std::vector<Entry> e;
        for (std::size_t i = 0; i < n; ++i) {
            e.push_back({i, i, 2.0 + (i == 0 ? 1.0 : 0.0)});
            e.push_back({i, (i + 1) % n, -1.0});
            e.push_back({i, (i + n - 1) % n, -1.0});
        }
        return SparseMatrix(n, std::move(e), Symmetry::symmetric);
    }
    if (p.name == "path") {
        if (p.positional.size() != 1) throw ParseError("path needs a size: '" + spec + "'");
        const std::size_t n = as_size(p.positional[0], spec);
        std::vector<Entry> e;
        for (std::size_t i = 0; i < n; ++i) {
            e.push_back({i, i, 2.0});
            if (i + 1 < n) {
                e.push_back({i, i + 1, -1.0});
                e.push_back({i + 1, i, -1.0});
            }
        }
        return SparseMatrix(n, std::move(e), Symmetry::symmetric);
    }
    throw ParseError("unknown generator '" + p.name + "'");
}

}  // namespace hlu
