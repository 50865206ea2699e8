#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hlu/core.hpp"

namespace hlu {

enum class Boundary { dirichlet, periodic };

/// Structured grid; nz == 1 selects the 2D five-point stencil.
struct GridSpec {
    std::size_t nx = 2, ny = 2, nz = 1;
    Boundary bc = Boundary::dirichlet;

    bool is_3d() const noexcept { return nz > 1; }
    std::size_t size() const noexcept { return nx * ny * nz; }
    std::size_t index(std::size_t x, std::size_t y, std::size_t z = 0) const noexcept { return x + nx * (y + ny * z); }
    void validate() const;
};

enum class CoeffCase { constant, unif01, inverse_unif01, unif_neg1_1 };

struct CoeffField {
    CoeffCase kind = CoeffCase::constant;
    std::uint64_t seed = 0;
};

/// Uniform doubles in [0, 1) from mt19937_64, identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t next() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

/// h^2-scaled stencil: diagonal 2*dim, neighbours -1. Periodic grids pin
/// A[0,0] += 1 so the operator is nonsingular.
SparseMatrix poisson(const GridSpec& spec);

/// Cell-centred flux form of -div(phi grad T) with arithmetic-mean face
/// coefficients. Same pinning as poisson() on periodic grids.
SparseMatrix variable_coeff_poisson(const GridSpec& spec, const CoeffField& field);
std::vector<double> coefficient_values(std::size_t n, const CoeffField& field);

/// sigma*T + R*(d/dx + d/dy + d/dz)T - lap T on a Dirichlet grid, central
/// differences, h = 1/(max(nx,ny,nz) + 1).
SparseMatrix advection_diffusion(const GridSpec& spec, double sigma, double r);
double grid_spacing(const GridSpec& spec);

SparseMatrix identity_matrix(std::size_t n);

/// Random sparse matrix with about `per_row` off-diagonals per row and a
/// strictly dominant diagonal; structurally symmetric pattern.
SparseMatrix random_diagonally_dominant(std::size_t n, std::size_t per_row, std::uint64_t seed);

struct ManufacturedRhs {
    std::vector<double> b;
    std::vector<double> x;
};

/// x uniform in [-1, 1), b = A x.
ManufacturedRhs manufactured_rhs(const SparseMatrix& m, std::uint64_t seed);

/// Builds a matrix from a "name:params" string, e.g. "poisson2d:64,64",
/// "poisson3d:16,16,16", "vcp:16,16,16,case=2,seed=3",
/// "advdiff:16,16,16,sigma=1,R=1", "identity:64", "randdd:500,6,seed=1".
SparseMatrix generate(const std::string& spec, std::uint64_t default_seed = 0);

}  // namespace hlu
