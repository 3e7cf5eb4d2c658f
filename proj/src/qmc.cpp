#include "yy/qmc.hpp"

#include "yy/rng.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <vector>

namespace yy {

std::string to_string(SequenceKind kind) {
    switch (kind) {
        case SequenceKind::Halton: return "halton";
        case SequenceKind::Sobol: return "sobol";
        case SequenceKind::Faure: return "faure";
        case SequenceKind::LHS: return "lhs";
        case SequenceKind::PseudoRandom: return "random";
    }
    return "unknown";
}

namespace detail {

double radical_inverse(std::uint64_t k, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double scale = inv;
    double x = 0.0;
    while (k) {
        x += static_cast<double>(k % base) * scale;
        k /= base;
        scale *= inv;
    }
    return x;
}

const std::vector<std::uint32_t>& prime_table() {
    static const std::vector<std::uint32_t> primes = [] {
        std::vector<std::uint32_t> p;
        p.reserve(1000);
        for (std::uint32_t c = 2; p.size() < 1000; ++c) {
            bool is_prime = true;
            for (std::uint32_t d = 2; d * d <= c; ++d)
                if (c % d == 0) { is_prime = false; break; }
            if (is_prime) p.push_back(c);
        }
        return p;
    }();
    return primes;
}

// Scaled direction numbers v_1..v_32 for one Sobol dimension (0-based).
static void sobol_directions(int dim, std::uint32_t v[33]) {
    const unsigned p = kSobolPoly[dim];
    const int s = p <= 1 ? 0 : std::bit_width(p) - 1;
    if (s == 0) {
        for (int k = 1; k <= 32; ++k) v[k] = 1u << (32 - k);
        return;
    }
    const unsigned* m = kSobolM + kSobolMOffset[dim];
    for (int k = 1; k <= s && k <= 32; ++k) v[k] = m[k - 1] << (32 - k);
    for (int k = s + 1; k <= 32; ++k) {
        std::uint32_t vk = v[k - s] ^ (v[k - s] >> s);
        for (int i = 1; i < s; ++i)
            if ((p >> (s - i)) & 1u) vk ^= v[k - i];
        v[k] = vk;
    }
}

}  // namespace detail

PointSet halton_unit(int n, int r, std::uint64_t skip) {
    if (n < 0 || r < 1) throw std::invalid_argument("halton_unit: need n >= 0, r >= 1");
    const auto& primes = detail::prime_table();
    if (static_cast<std::size_t>(r) > primes.size())
        throw std::invalid_argument("halton_unit: dimension exceeds prime table (max " +
                                    std::to_string(primes.size()) + ")");
    PointSet ps;
    ps.kind = SequenceKind::Halton;
    ps.domain = Domain::unit_cube(r);
    ps.points.resize(n, r);
    for (int k = 0; k < n; ++k)
        for (int d = 0; d < r; ++d)
            ps.points(k, d) = detail::radical_inverse(static_cast<std::uint64_t>(k) + skip + 1,
                                                      primes[d]);
    return ps;
}

PointSet sobol_unit(int n, int r, std::uint64_t skip) {
    if (n < 0 || r < 1) throw std::invalid_argument("sobol_unit: need n >= 0, r >= 1");
    if (r > detail::kSobolMaxDim)
        throw std::invalid_argument("sobol_unit: dimension exceeds direction-number table (max " +
                                    std::to_string(detail::kSobolMaxDim) + ")");
    PointSet ps;
    ps.kind = SequenceKind::Sobol;
    ps.domain = Domain::unit_cube(r);
    ps.points.resize(n, r);
    if (n == 0) return ps;

    std::vector<std::uint32_t> v(static_cast<std::size_t>(r) * 33);
    for (int d = 0; d < r; ++d) detail::sobol_directions(d, v.data() + 33 * d);

    // Gray-code update: the state at index k equals the naive construction
    // evaluated at gray(k) = k ^ (k >> 1). Emitted indices are skip..skip+n-1;
    // index 0 is the origin and appears only when skip = 0.
    std::vector<std::uint32_t> x(r, 0);
    std::uint64_t idx = 0;
    auto advance_to = [&](std::uint64_t target) {
        while (idx < target) {
            ++idx;
            const int c = std::countr_zero(idx) + 1;
            if (c > 32) throw std::runtime_error("sobol_unit: index exceeds 32-bit resolution");
            for (int d = 0; d < r; ++d) x[d] ^= v[33 * d + c];
        }
    };
    for (int i = 0; i < n; ++i) {
        advance_to(skip + static_cast<std::uint64_t>(i));
        for (int d = 0; d < r; ++d)
            ps.points(i, d) = static_cast<double>(x[d]) * 0x1.0p-32;
    }
    return ps;
}

PointSet faure_unit(int n, int r) {
    if (n < 0 || r < 1) throw std::invalid_argument("faure_unit: need n >= 0, r >= 1");
    // base = smallest prime >= max(r, 2)
    std::uint64_t p = 2;
    {
        const auto& primes = detail::prime_table();
        auto it = std::lower_bound(primes.begin(), primes.end(),
                                   static_cast<std::uint32_t>(std::max(r, 2)));
        if (it == primes.end())
            throw std::invalid_argument("faure_unit: no tabulated prime >= r");
        p = *it;
    }
    PointSet ps;
    ps.kind = SequenceKind::Faure;
    ps.domain = Domain::unit_cube(r);
    ps.points.resize(n, r);
    if (n == 0) return ps;

    // digit count covering indices 1..n
    int digits = 1;
    {
        std::uint64_t cap = p;
        while (cap < static_cast<std::uint64_t>(n) + 1) { cap *= p; ++digits; }
        ++digits;  // headroom for carries in the generating-matrix products
    }

    // Pascal matrix M(i,j) = C(j,i) mod p; generating matrix for dimension d
    // is M^(d-1) mod p. Entries stay below p, so 64-bit products are exact.
    const int D = digits;
    auto matmul = [&](const std::vector<std::uint64_t>& A, const std::vector<std::uint64_t>& B) {
        std::vector<std::uint64_t> C(static_cast<std::size_t>(D) * D, 0);
        for (int i = 0; i < D; ++i)
            for (int k = 0; k < D; ++k) {
                const std::uint64_t a = A[i * D + k];
                if (!a) continue;
                for (int j = 0; j < D; ++j)
                    C[i * D + j] = (C[i * D + j] + a * B[k * D + j]) % p;
            }
        return C;
    };
    std::vector<std::uint64_t> pascal(static_cast<std::size_t>(D) * D, 0);
    for (int j = 0; j < D; ++j) {
        pascal[0 * D + j] = 1 % p;
        for (int i = 1; i <= j; ++i)
            pascal[i * D + j] =
                (pascal[(i - 1) * D + (j - 1)] + (i < D ? pascal[i * D + (j - 1)] : 0)) % p;
    }
    std::vector<std::uint64_t> C(static_cast<std::size_t>(D) * D, 0);
    for (int i = 0; i < D; ++i) C[i * D + i] = 1;  // M^0

    std::vector<std::uint64_t> digits_k(D);
    for (int d = 0; d < r; ++d) {
        for (int i = 0; i < n; ++i) {
            std::uint64_t k = static_cast<std::uint64_t>(i) + 1;
            for (int t = 0; t < D; ++t) { digits_k[t] = k % p; k /= p; }
            double x = 0.0;
            double scale = 1.0 / static_cast<double>(p);
            for (int row = 0; row < D; ++row) {
                std::uint64_t y = 0;
                for (int t = 0; t < D; ++t) y += C[row * D + t] * digits_k[t];
                x += static_cast<double>(y % p) * scale;
                scale /= static_cast<double>(p);
            }
            ps.points(i, d) = x;
        }
        C = matmul(C, pascal);
    }
    return ps;
}

PointSet lhs_unit(int n, int r, std::uint64_t rng_seed) {
    if (n < 1 || r < 1) throw std::invalid_argument("lhs_unit: need n >= 1, r >= 1");
    PointSet ps;
    ps.kind = SequenceKind::LHS;
    ps.domain = Domain::unit_cube(r);
    ps.points.resize(n, r);
    Rng rng(rng_seed, 0, 0x4c485321ULL);
    std::vector<int> perm(n);
    for (int d = 0; d < r; ++d) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(perm[i], perm[j]);
        }
        for (int i = 0; i < n; ++i)
            ps.points(i, d) = (static_cast<double>(perm[i]) + rng.next_double()) /
                              static_cast<double>(n);
    }
    return ps;
}

PointSet random_unit(int n, int r, std::uint64_t rng_seed) {
    if (n < 0 || r < 1) throw std::invalid_argument("random_unit: need n >= 0, r >= 1");
    PointSet ps;
    ps.kind = SequenceKind::PseudoRandom;
    ps.domain = Domain::unit_cube(r);
    ps.points.resize(n, r);
    Rng rng(rng_seed, 0, 0x72616e64ULL);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < r; ++d) ps.points(i, d) = rng.next_double();
    return ps;
}

PointSet scale_to_domain(const PointSet& unit, const Domain& domain) {
    if (unit.r() != domain.dim())
        throw std::invalid_argument("scale_to_domain: dimension mismatch");
    PointSet out;
    out.kind = unit.kind;
    out.domain = domain;
    out.points = ((2.0 * unit.points).array() - 1.0) * domain.half_width;
    out.points.rowwise() += domain.center.transpose();
    return out;
}

SequenceKind default_sequence(int r) {
    return r < 10 ? SequenceKind::Halton : SequenceKind::Sobol;
}

PointSet generate_unit(SequenceKind kind, int n, int r, std::uint64_t skip_or_seed) {
    switch (kind) {
        case SequenceKind::Halton: return halton_unit(n, r, skip_or_seed);
        case SequenceKind::Sobol: return sobol_unit(n, r, skip_or_seed);
        case SequenceKind::Faure: return faure_unit(n, r);
        case SequenceKind::LHS: return lhs_unit(n, r, skip_or_seed);
        case SequenceKind::PseudoRandom: return random_unit(n, r, skip_or_seed);
    }
    throw std::invalid_argument("generate_unit: unknown sequence kind");
}

double star_discrepancy_exact_2d(const PointSet& ps) {
    if (ps.r() != 2) throw std::invalid_argument("star_discrepancy_exact_2d: r must be 2");
    const int n = ps.n();
    if (n < 1) throw std::invalid_argument("star_discrepancy_exact_2d: empty point set");

    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) { xs[i] = ps.points(i, 0); ys[i] = ps.points(i, 1); }
    auto grid = [](std::vector<double> v) {
        v.push_back(1.0);
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const std::vector<double> gx = grid(xs), gy = grid(ys);

    // The supremum over anchored boxes [0,a) x [0,b) is attained in the limit
    // at grid coordinates, from below (open count) or at the point (closed).
    double dstar = 0.0;
    for (double a : gx) {
        for (double b : gy) {
            int open = 0, closed = 0;
            for (int i = 0; i < n; ++i) {
                const double px = ps.points(i, 0), py = ps.points(i, 1);
                if (px < a && py < b) ++open;
                if (px <= a && py <= b) ++closed;
            }
            const double vol = a * b;
            dstar = std::max(dstar, vol - static_cast<double>(open) / n);
            dstar = std::max(dstar, static_cast<double>(closed) / n - vol);
        }
    }
    return dstar;
}

}  // namespace yy
