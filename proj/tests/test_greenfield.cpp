#include <doctest.h>

#include "heightlab/greenfield.hpp"

#include <cmath>
#include <random>

using namespace heightlab;

namespace {

const SurfaceFamily& seed7() {
    static const SurfaceFamily fam = load_family(std::string(HEIGHTLAB_DATA) + "/families/seed7.json");
    return fam;
}

const HeightContext& ctx7() {
    static const HeightContext ctx = make_height_context(seed7());
    return ctx;
}

const GreenContext& g7() {
    static const GreenContext g = make_green_context(ctx7());
    return g;
}

}  // namespace

TEST_CASE("specialized sections lie on the fiber") {
    const auto& fam = seed7();
    for (const auto& s : fam.sections)
        for (Cx t : {Cx(0.3, 0.1), Cx(-1.7, 0.4), Cx(50, -20)}) {
            auto p = specialize(s, t);
            CHECK(fiber_residual(fam, p) < 1e-14);
            for (auto& c : p.c) CHECK(std::max(std::abs(c[0]), std::abs(c[1])) == doctest::Approx(1.0));
        }
}

TEST_CASE("fiber map powers and round trip") {
    const auto& fam = seed7();
    auto p = fiber_map(fam, specialize(fam.sections[1], Cx(0.4, -0.9)), 1);
    CHECK(chordal_distance(fiber_map(fam, p, 0), p) == 0);
    for (int k : {1, 2, 4}) {
        auto q = fiber_map(fam, p, k);
        CHECK(fiber_residual(fam, q) < 1e-9);
        CHECK(chordal_distance(fiber_map(fam, q, -k), p) < 1e-8);
    }
    // the engineered section is a 2-cycle on every fiber
    auto c = specialize(fam.sections[0], Cx(1.1, 0.2));
    CHECK(chordal_distance(fiber_map(fam, c, 2), c) < 1e-10);
}

TEST_CASE("floating orbit shadows the exact orbit at t = 1/3") {
    const auto& fam = seed7();
    const auto& s = fam.sections[1];
    auto f3 = automorphism_apply(fam, s, 3);
    Q t(1, 3);
    auto exact = to_complex(specialize(f3, t), Cx(1.0 / 3));
    auto flt = fiber_map(fam, specialize(s, Cx(1.0 / 3)), 3);
    CHECK(chordal_distance(exact, flt) < 1e-6);
    auto viaq = to_complex(fiber_apply_exact(fam, t, specialize(s, t), 3), Cx(1.0 / 3));
    CHECK(chordal_distance(exact, viaq) == 0);
}

TEST_CASE("potential of a 2-cycle has the closed form") {
    const auto& fam = seed7();
    const auto& g = g7();
    auto p = specialize(fam.sections[0], Cx(0.7, -0.3));
    auto fp = fiber_map(fam, p, 1);
    double a = v0(fam, g, p, Direction::Plus), b = v0(fam, g, fp, Direction::Plus);
    double lam = g.lambda;
    double limit = (a + b / lam) / (1 - 1 / (lam * lam));
    auto ps = green_potential(fam, g, p, Direction::Plus, 12);
    REQUIRE_FALSE(ps.dropped);
    CHECK(ps.u.back() == doctest::Approx(limit).epsilon(1e-12));
    // partial sums follow the geometric series exactly
    double u = 0;
    for (int j = 0; j < 12; ++j) u += std::pow(lam, -j) * (j % 2 ? b : a);
    CHECK(ps.u.back() == doctest::Approx(u).epsilon(1e-13));
}

TEST_CASE("Cauchy rate and invariance on random fiber points") {
    const auto& fam = seed7();
    const auto& g = g7();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-2, 2);
    int n = 0, ratio_ok = 0, inv_ok = 0;
    while (n < 40) {
        Cx t(U(rng), U(rng));
        auto p = fiber_map(fam, specialize(fam.sections[1 + rng() % 2], t), 1);
        auto ps = green_potential(fam, g, p, Direction::Plus, 12);
        if (ps.dropped) continue;
        ++n;
        ratio_ok += std::abs(ps.fitted_ratio * g.lambda - 1) <= 0.1;
        inv_ok += invariance_residual(fam, g, p, Direction::Plus, 12) < 1e-3;
        auto pm = green_potential(fam, g, p, Direction::Minus, 12);
        CHECK(std::abs(pm.increments.back()) < 1e-8);
    }
    CHECK(ratio_ok >= 36);
    CHECK(inv_ok >= 38);
}

TEST_CASE("excluded parameters are roots of Delta") {
    auto fam = seed7();
    auto roots = excluded_roots(fam);
    CHECK(roots.size() > 10);
    CHECK(fam.excluded->roots().size() == roots.size());
    std::vector<QPoly> sq;
    for (int i = 0; i < 3; ++i)
        if (!cached_delta(fam, i).is_zero()) sq.push_back(squarefree_part(cached_delta(fam, i).to_q()));
    for (auto z : roots) {
        // a Newton polish in GMP floats barely moves a true root of some Delta_i
        double move = 1e300;
        for (auto& q : sq) move = std::min(move, std::abs(polish_root(q, z) - z));
        CHECK(move < 1e-9 * std::max(1.0, std::abs(z)));
    }
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j) CHECK(roots[i] != roots[j]);
}

TEST_CASE("section potential grows like the height") {
    const auto& fam = seed7();
    const auto& g = g7();
    auto prof = potential_profile(fam, g, fam.sections[1], Direction::Plus, 500.0, 64, 10, 2);
    REQUIRE(prof.size() == 64);
    auto again = potential_profile(fam, g, fam.sections[1], Direction::Plus, 500.0, 64, 10, 1);
    CHECK(profile_csv(prof) == profile_csv(again));
    CHECK(profile_csv(prof).rfind("t_re,t_im,phi,tail\n", 0) == 0);
    auto phi = section_potential(fam, g, fam.sections[1], Cx(500, 0), Direction::Plus, 10);
    CHECK(phi.tail < 1e-6);
}

TEST_CASE("mass estimates") {
    const auto& fam = seed7();
    const auto& ctx = ctx7();
    MassOptions mo;
    mo.grid = 256;
    mo.height_n = 3;
    mo.threads = 2;
    auto per = mass_vs_height(fam, ctx, fam.sections[0], Direction::Plus, mo);
    CHECK(std::abs(per.estimate) < 0.05);
    CHECK(per.hhat.value == 0);

    auto r = mass_vs_height(fam, ctx, fam.sections[1], Direction::Plus, mo);
    REQUIRE(r.ratio);
    CHECK(*r.ratio > 0.8);
    CHECK(*r.ratio < 1.2);
    CHECK(r.estimators_agree);
    CHECK_FALSE(r.inconclusive);

    // a wider annulus measures the same mass
    MassOptions wide = mo;
    wide.r1 = 400;
    wide.r2 = 8000;
    auto w = mass_vs_height(fam, ctx, fam.sections[1], Direction::Plus, wide, r.hhat);
    CHECK(std::abs(w.estimate - r.estimate) <= w.uncertainty + r.uncertainty);

    // too shallow: reported, not silent
    MassOptions shallow = mo;
    shallow.depth = 1;
    auto s = mass_vs_height(fam, ctx, fam.sections[1], Direction::Plus, shallow, r.hhat);
    CHECK(s.inconclusive);
    CHECK_FALSE(s.diagnosis.empty());

    auto csv = mass_csv({per, r});
    CHECK(csv.rfind("direction,r1,r2,estimate,hhat,ratio,uncertainty", 0) == 0);
}

TEST_CASE("pairwise sum is order-fixed") {
    std::vector<double> x(1000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0 / (i + 1);
    double a = pairwise_sum(x.data(), x.size());
    CHECK(a == pairwise_sum(x.data(), x.size()));
    CHECK(a == doctest::Approx(7.485470860550345).epsilon(1e-14));
}
