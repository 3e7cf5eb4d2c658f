#include "yy/qmc.hpp"
#include "yy/rng.hpp"

#include "doctest.h"

#include <array>
#include <bit>
#include <set>

using namespace yy;

namespace {

// Straight-line Sobol oracle: re-derives the direction numbers from the
// embedded polynomial table and XORs them over the plain binary digits of
// the index (no Gray code). The Gray-code generator's k-th state equals
// this construction at gray(k) = k ^ (k >> 1).
double sobol_naive(std::uint64_t index, int dim) {
    const unsigned p = yy::detail::kSobolPoly[dim];
    const int s = p <= 1 ? 0 : std::bit_width(p) - 1;
    std::uint32_t v[33] = {0};
    if (s == 0) {
        for (int k = 1; k <= 32; ++k) v[k] = 1u << (32 - k);
    } else {
        const unsigned* m = yy::detail::kSobolM + yy::detail::kSobolMOffset[dim];
        for (int k = 1; k <= s; ++k) v[k] = m[k - 1] << (32 - k);
        for (int k = s + 1; k <= 32; ++k) {
            v[k] = v[k - s] ^ (v[k - s] >> s);
            for (int i = 1; i < s; ++i)
                if ((p >> (s - i)) & 1u) v[k] ^= v[k - i];
        }
    }
    std::uint32_t x = 0;
    int bit = 1;
    while (index) {
        if (index & 1u) x ^= v[bit];
        index >>= 1;
        ++bit;
    }
    return static_cast<double>(x) * 0x1.0p-32;
}

// Dense-grid sweep lower bound for the 2-d star discrepancy.
double dstar_grid_sweep(const PointSet& ps, int res) {
    const int n = ps.n();
    double worst = 0.0;
    for (int a = 1; a <= res; ++a) {
        const double ax = static_cast<double>(a) / res;
        for (int b = 1; b <= res; ++b) {
            const double by = static_cast<double>(b) / res;
            int open = 0, closed = 0;
            for (int i = 0; i < n; ++i) {
                if (ps.points(i, 0) < ax && ps.points(i, 1) < by) ++open;
                if (ps.points(i, 0) <= ax && ps.points(i, 1) <= by) ++closed;
            }
            worst = std::max(worst, std::abs(ax * by - static_cast<double>(open) / n));
            worst = std::max(worst, std::abs(ax * by - static_cast<double>(closed) / n));
        }
    }
    return worst;
}

// Independent Pascal-matrix power oracle for Faure coordinates.
double faure_oracle(std::uint64_t k, int dim_1based, std::uint64_t p, int digits) {
    const int D = digits;
    std::vector<std::uint64_t> M(D * D, 0), C(D * D, 0);
    for (int j = 0; j < D; ++j) {
        // binomials by direct multiplicative formula, reduced mod p
        for (int i = 0; i <= j; ++i) {
            // C(j, i) mod p via Pascal recursion on the fly
            if (i == 0)
                M[0 * D + j] = 1 % p;
            else
                M[i * D + j] = (M[(i - 1) * D + (j - 1)] + M[i * D + (j - 1)]) % p;
        }
    }
    for (int i = 0; i < D; ++i) C[i * D + i] = 1;
    for (int e = 0; e < dim_1based - 1; ++e) {
        std::vector<std::uint64_t> T(D * D, 0);
        for (int i = 0; i < D; ++i)
            for (int t = 0; t < D; ++t)
                for (int j = 0; j < D; ++j) T[i * D + j] = (T[i * D + j] + C[i * D + t] * M[t * D + j]) % p;
        C = std::move(T);
    }
    std::vector<std::uint64_t> kd(D, 0);
    for (int t = 0; t < D && k; ++t) { kd[t] = k % p; k /= p; }
    double x = 0, scale = 1.0 / static_cast<double>(p);
    for (int i = 0; i < D; ++i) {
        std::uint64_t y = 0;
        for (int t = 0; t < D; ++t) y += C[i * D + t] * kd[t];
        x += static_cast<double>(y % p) * scale;
        scale /= static_cast<double>(p);
    }
    return x;
}

}  // namespace

TEST_CASE("halton radical inverse matches hand evaluation") {
    const PointSet ps = halton_unit(3, 1, 0);
    CHECK(ps.points(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ps.points(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ps.points(2, 0) == doctest::Approx(0.75).epsilon(1e-15));

    const PointSet q = halton_unit(1, 2, 0);
    CHECK(q.points(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(q.points(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("halton empty and skip") {
    const PointSet ps = halton_unit(0, 3, 0);
    CHECK(ps.n() == 0);
    CHECK(ps.r() == 3);

    // skip shifts the sequence: point 0 with skip=2 equals point 2 with skip=0
    const PointSet a = halton_unit(5, 4, 0);
    const PointSet b = halton_unit(3, 4, 2);
    CHECK((a.points.bottomRows(3) - b.points).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("halton rejects dimension beyond prime table") {
    CHECK_THROWS_AS(halton_unit(1, 1001, 0), std::invalid_argument);
    CHECK_NOTHROW(halton_unit(1, 1000, 0));
}

TEST_CASE("sobol first point is one half in every dimension") {
    const PointSet ps = sobol_unit(1, 12);
    for (int d = 0; d < 12; ++d) CHECK(ps.points(0, d) == 0.5);
}

TEST_CASE("sobol golden values and naive-XOR oracle") {
    const PointSet ps = sobol_unit(2, 1);
    CHECK(ps.points(0, 0) == 0.5);
    CHECK(ps.points(1, 0) == 0.75);

    const int n = 64;
    const PointSet big = sobol_unit(n, 6);
    for (int i = 0; i < n; ++i) {
        const std::uint64_t k = 1 + static_cast<std::uint64_t>(i);  // default skip = 1
        const std::uint64_t g = k ^ (k >> 1);
        for (int d = 0; d < 6; ++d)
            CHECK(big.points(i, d) == sobol_naive(g, d));
    }
}

TEST_CASE("sobol skip=0 starts at the origin") {
    const PointSet ps = sobol_unit(2, 3, 0);
    CHECK(ps.points.row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ps.points(1, 0) == 0.5);
}

TEST_CASE("sobol range and dimension guard") {
    const PointSet ps = sobol_unit(200, 40);
    CHECK(ps.points.minCoeff() >= 0.0);
    CHECK(ps.points.maxCoeff() < 1.0);
    CHECK_THROWS_AS(sobol_unit(1, 1025), std::invalid_argument);
    CHECK_NOTHROW(sobol_unit(4, 1024));
}

TEST_CASE("faure reduces to van der Corput for r=1") {
    const PointSet ps = faure_unit(3, 1);
    CHECK(ps.points(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ps.points(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ps.points(2, 0) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("faure matches matrix-power oracle") {
    SUBCASE("r=2 base 2") {
        const PointSet ps = faure_unit(16, 2);
        for (int k = 1; k <= 16; ++k)
            for (int d = 1; d <= 2; ++d)
                CHECK(ps.points(k - 1, d - 1) ==
                      doctest::Approx(faure_oracle(k, d, 2, 8)).epsilon(1e-14));
    }
    SUBCASE("r=5 base 5") {
        const PointSet ps = faure_unit(30, 5);
        for (int k = 1; k <= 30; ++k)
            for (int d = 1; d <= 5; ++d)
                CHECK(ps.points(k - 1, d - 1) ==
                      doctest::Approx(faure_oracle(k, d, 5, 6)).epsilon(1e-14));
    }
    SUBCASE("all points in [0,1)") {
        const PointSet ps = faure_unit(100, 7);
        CHECK(ps.points.minCoeff() >= 0.0);
        CHECK(ps.points.maxCoeff() < 1.0);
    }
}

TEST_CASE("lhs stratification: each dimension hits every stratum once") {
    const int n = 37, r = 4;
    const PointSet ps = lhs_unit(n, r, 99);
    for (int d = 0; d < r; ++d) {
        std::set<int> strata;
        for (int i = 0; i < n; ++i) {
            const int s = static_cast<int>(std::floor(ps.points(i, d) * n));
            CHECK(s >= 0);
            CHECK(s < n);
            strata.insert(s);
        }
        CHECK(static_cast<int>(strata.size()) == n);
    }
}

TEST_CASE("lhs determinism and seed sensitivity") {
    const PointSet a = lhs_unit(16, 3, 7);
    const PointSet b = lhs_unit(16, 3, 7);
    const PointSet c = lhs_unit(16, 3, 8);
    CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.points - c.points).cwiseAbs().maxCoeff() > 0.0);

    const PointSet single = lhs_unit(1, 5, 2);
    CHECK(single.points.minCoeff() >= 0.0);
    CHECK(single.points.maxCoeff() < 1.0);
}

TEST_CASE("generators are deterministic across calls") {
    for (auto kind : {SequenceKind::Halton, SequenceKind::Sobol, SequenceKind::Faure}) {
        const PointSet a = generate_unit(kind, 50, 8, kind == SequenceKind::Sobol ? 1 : 0);
        const PointSet b = generate_unit(kind, 50, 8, kind == SequenceKind::Sobol ? 1 : 0);
        CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("points are pairwise distinct") {
    for (auto kind : {SequenceKind::Halton, SequenceKind::Sobol, SequenceKind::Faure}) {
        const PointSet ps = generate_unit(kind, 128, 3, kind == SequenceKind::Sobol ? 1 : 0);
        std::set<std::array<double, 3>> seen;
        for (int i = 0; i < ps.n(); ++i)
            seen.insert({ps.points(i, 0), ps.points(i, 1), ps.points(i, 2)});
        CHECK(static_cast<int>(seen.size()) == ps.n());
    }
}

TEST_CASE("scale_to_domain maps midpoint to center and corners to corners") {
    Domain dom(Vec::Constant(3, 2.0), 3.0);
    PointSet unit;
    unit.domain = Domain::unit_cube(3);
    unit.points.resize(2, 3);
    unit.points.row(0).setConstant(0.5);
    unit.points.row(1).setConstant(0.0);
    const PointSet scaled = scale_to_domain(unit, dom);
    CHECK((scaled.points.row(0).transpose() - dom.center).cwiseAbs().maxCoeff() == 0.0);
    CHECK((scaled.points.row(1).transpose() - Vec::Constant(3, -1.0)).cwiseAbs().maxCoeff() ==
          0.0);

    SUBCASE("center 0, R 3 sends the origin corner to -3") {
        Domain dom0(Vec::Zero(2), 3.0);
        PointSet u2;
        u2.points = Mat::Zero(1, 2);
        const PointSet s2 = scale_to_domain(u2, dom0);
        CHECK(s2.points(0, 0) == -3.0);
        CHECK(s2.points(0, 1) == -3.0);
    }

    SUBCASE("round trip recovers unit coordinates") {
        const PointSet u = halton_unit(64, 3, 0);
        const PointSet s = scale_to_domain(u, dom);
        Mat back = s.points;
        back.rowwise() -= dom.center.transpose();
        back = ((back / dom.half_width).array() + 1.0) / 2.0;
        CHECK((back - u.points).cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("dimension mismatch throws") {
        const PointSet u = halton_unit(4, 2, 0);
        CHECK_THROWS_AS(scale_to_domain(u, dom), std::invalid_argument);
    }

    SUBCASE("scaled points lie in the closed domain") {
        const PointSet u = sobol_unit(256, 3);
        const PointSet s = scale_to_domain(u, dom);
        for (int i = 0; i < s.n(); ++i) CHECK(dom.contains(s.points.row(i).transpose()));
    }
}

TEST_CASE("exact 2-d star discrepancy vs dense-grid sweep") {
    SUBCASE("single point at (1,1)") {
        PointSet ps;
        ps.domain = Domain::unit_cube(2);
        ps.points = Mat::Constant(1, 2, 1.0);
        const double exact = star_discrepancy_exact_2d(ps);
        CHECK(exact == doctest::Approx(1.0));
        CHECK(std::abs(exact - dstar_grid_sweep(ps, 400)) < 6e-3);
    }
    SUBCASE("points at the origin") {
        PointSet ps;
        ps.domain = Domain::unit_cube(2);
        ps.points = Mat::Zero(5, 2);
        const double exact = star_discrepancy_exact_2d(ps);
        CHECK(std::abs(exact - dstar_grid_sweep(ps, 400)) < 6e-3);
        CHECK(exact == doctest::Approx(1.0));  // closed box of vanishing volume holds all mass
    }
    SUBCASE("sobol beats fixed-seed uniform random at n=64") {
        const double d_sobol = star_discrepancy_exact_2d(sobol_unit(64, 2));
        const double d_rand = star_discrepancy_exact_2d(random_unit(64, 2, 4242));
        CHECK(d_sobol < d_rand);
    }
    SUBCASE("agreement with sweep on a structured set") {
        const PointSet ps = halton_unit(48, 2, 0);
        const double exact = star_discrepancy_exact_2d(ps);
        const double sweep = dstar_grid_sweep(ps, 500);
        CHECK(exact >= sweep - 1e-12);  // sweep is a lower bound
        CHECK(exact - sweep < 5e-3);
    }
    SUBCASE("r != 2 rejected") {
        CHECK_THROWS_AS(star_discrepancy_exact_2d(halton_unit(8, 3, 0)), std::invalid_argument);
    }
}

TEST_CASE("discrepancy ordering is statistical, not accidental") {
    // Sobol and Halton each beat pseudo-random in >= 18 of 20 seeds
    for (const int n : {32, 64, 128}) {
        const double d_sobol = star_discrepancy_exact_2d(sobol_unit(n, 2));
        const double d_halton = star_discrepancy_exact_2d(halton_unit(n, 2, 0));
        int sobol_wins = 0, halton_wins = 0;
        for (int s = 0; s < 20; ++s) {
            const double d_rand = star_discrepancy_exact_2d(random_unit(n, 2, 100 + s));
            if (d_sobol < d_rand) ++sobol_wins;
            if (d_halton < d_rand) ++halton_wins;
        }
        CHECK(sobol_wins >= 18);
        CHECK(halton_wins >= 18);
    }
}

TEST_CASE("default sequence chooser") {
    CHECK(default_sequence(1) == SequenceKind::Halton);
    CHECK(default_sequence(9) == SequenceKind::Halton);
    CHECK(default_sequence(10) == SequenceKind::Sobol);
    CHECK(default_sequence(1000) == SequenceKind::Sobol);
}
