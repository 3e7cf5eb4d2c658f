#pragma once

#include "yy/types.hpp"

#include <cstdint>

namespace yy {

// Low-discrepancy and stratified generators in the unit cube [0,1)^r.
// All sequences are deterministic: the same (n, r, skip) yields bit-identical
// output on every run and platform. The origin is never emitted (Halton and
// Faure index from 1; Sobol skips index 0 by default since a sample at the
// exact domain corner degenerates under Dirichlet row zeroing).

PointSet halton_unit(int n, int r, std::uint64_t skip = 0);
PointSet sobol_unit(int n, int r, std::uint64_t skip = 1);
PointSet faure_unit(int n, int r);
PointSet lhs_unit(int n, int r, std::uint64_t rng_seed);
PointSet random_unit(int n, int r, std::uint64_t rng_seed);

// Affine map u -> center + (2u - 1) * R, coordinatewise.
PointSet scale_to_domain(const PointSet& unit, const Domain& domain);

// Halton for r < 10, Sobol for r >= 10.
SequenceKind default_sequence(int r);
PointSet generate_unit(SequenceKind kind, int n, int r, std::uint64_t skip_or_seed);

// Exact star discrepancy for r = 2 point sets (test-oracle scale, n <= 256):
// enumerates every critical anchored box over the sample-coordinate grid
// (augmented with 1) and takes the worst deviation over open and closed
// counts. Exact D* in general dimension is NP-hard and out of scope.
double star_discrepancy_exact_2d(const PointSet& ps);

namespace detail {
extern const int kSobolMaxDim;
extern const unsigned kSobolPoly[];
extern const int kSobolMOffset[];
extern const unsigned kSobolM[];

double radical_inverse(std::uint64_t k, std::uint64_t base);
const std::vector<std::uint32_t>& prime_table();
}  // namespace detail

}  // namespace yy
