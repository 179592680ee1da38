#include <doctest.h>

#include "heightlab/heights.hpp"

#include <cmath>

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

OrbitOptions no_cache() {
    OrbitOptions o;
    o.use_cache = false;
    return o;
}

}  // namespace

TEST_CASE("naive heights") {
    const auto& ctx = ctx7();
    Degrees zero{0, 0, 0}, ones{1, 1, 1};
    for (auto dir : {HeightDirection::Plus, HeightDirection::Minus, HeightDirection::Total})
        CHECK(naive_height(ctx, zero, dir).is_zero());
    // D+ = ((13 - a)/64, 1/8, (a - 5)/64) with a = 9 + 4 sqrt 5: coefficients sum to 1/4
    auto K = ctx.lat.dplus.coeffs[0].field();
    CHECK(naive_height(ctx, ones, HeightDirection::Plus) == QNum(K, Q(1, 4)));
    CHECK(naive_height(ctx, ones, HeightDirection::Minus) == QNum(K, Q(1, 4)));
    CHECK(naive_height(ctx, ones, HeightDirection::Total) == QNum(K, Q(1, 2)));
    Degrees d{2, 1, 0};
    auto hp = naive_height(ctx, d, HeightDirection::Plus);
    auto hm = naive_height(ctx, d, HeightDirection::Minus);
    CHECK(naive_height(ctx, d, HeightDirection::Total) == hp + hm);
    double s5 = std::sqrt(5.0);
    CHECK(hp.to_double() == doctest::Approx(2 * (4 - 4 * s5) / 64 + 0.125).epsilon(1e-14));
}

TEST_CASE("fit_decay_ratio on geometric data") {
    std::vector<double> x;
    for (int n = 0; n < 8; ++n) x.push_back(3.0 * std::pow(0.05, n) * (n % 2 ? -1 : 1));
    CHECK(fit_decay_ratio(x, 1) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(fit_decay_ratio({1.0}, 0) == 0);
}

TEST_CASE("periodic section has zero height") {
    const auto& fam = seed7();
    auto h = canonical_height(fam, ctx7(), fam.sections[0], Direction::Plus, 3, no_cache());
    CHECK(h.value == 0);
    CHECK(h.error_bound == 0);
    CHECK(h.certified);
    REQUIRE(h.period);
    CHECK(*h.period == 2);
    CHECK(detect_period(fam, fam.sections[0], 5) == 2);
}

TEST_CASE("random section: positive height, geometric increments, invariance") {
    const auto& fam = seed7();
    const auto& ctx = ctx7();
    const auto& s = fam.sections[1];
    auto opt = no_cache();
    opt.keep_sections = true;
    auto orbit = compute_orbit(fam, s, Direction::Plus, 4, opt);
    auto h = estimate_from_orbit(ctx, Direction::Plus, orbit);
    CHECK(h.value > 0.1);
    CHECK(std::abs(h.value - h.sequence.back().second) <= h.error_bound);
    CHECK(h.fitted_ratio * ctx.lambda == doctest::Approx(1).epsilon(0.1));

    // the orbit of f(s) is the shifted orbit of s: h_n(fs) = lambda h_{n+1}(s) on the degree data
    auto fs = orbit.exact_sections[1];
    auto hf = canonical_height(fam, ctx, fs, Direction::Plus, 3, opt);
    for (int n = 0; n <= 3; ++n) {
        CHECK(hf.degrees[n] == h.degrees[n + 1]);
        CHECK(hf.sequence[n].second == doctest::Approx(ctx.lambda * h.sequence[n + 1].second).epsilon(1e-12));
    }
    CHECK(std::abs(hf.value / ctx.lambda - h.value) <= 2 * (hf.error_bound / ctx.lambda + h.error_bound));
}

TEST_CASE("classification") {
    const auto& fam = seed7();
    const auto& ctx = ctx7();
    auto opt = no_cache();
    SUBCASE("periodic with minimal period") {
        auto v = classify(fam, ctx, fam.sections[0], 1e-3, 3, 12, opt);
        CHECK(v.tag == Verdict::Periodic);
        CHECK(v.period == 2);
        CHECK(v.str() == "periodic(2)");
        CHECK(v.forward_bounded);
        CHECK(v.backward_bounded);
    }
    SUBCASE("period beyond the search bound is flagged stable") {
        auto v = classify(fam, ctx, fam.sections[0], 1e-3, 3, 1, opt);
        CHECK(v.tag == Verdict::StableNonperiodicFlagged);
        CHECK(v.note.find("B+ candidate") != std::string::npos);
    }
    SUBCASE("random section is unstable") {
        auto v = classify(fam, ctx, fam.sections[1], 1e-3, 3, 12, opt);
        CHECK(v.tag == Verdict::Unstable);
        CHECK(v.hhat - v.hhat_error > 1e-3);
        CHECK_FALSE(v.forward_bounded);
        CHECK_FALSE(v.backward_bounded);
    }
    SUBCASE("gap above the height leaves it undetermined") {
        auto v = classify(fam, ctx, fam.sections[1], 10.0, 3, 3, opt);
        CHECK(v.tag == Verdict::Undetermined);
    }
    CHECK_THROWS(classify(fam, ctx, fam.sections[0], 0.0, 3, 12, opt));
}

TEST_CASE("arithmetic degree") {
    const auto& fam = seed7();
    double lam = ctx7().lambda;
    auto opt = no_cache();
    auto per = arithmetic_degree(fam, fam.sections[0], 3, opt);
    CHECK(per.exact);
    CHECK(per.point == 1);
    CHECK(per.lower == 1);
    CHECK(per.upper == 1);
    auto a = arithmetic_degree(fam, fam.sections[2], 4, opt);
    CHECK(std::abs(a.point / lam - 1) < 0.05);
    CHECK(a.upper <= 1.05 * lam);
    CHECK(a.lower <= a.upper);
}

TEST_CASE("backward heights are nonnegative and positive off cycles") {
    const auto& fam = seed7();
    auto opt = no_cache();
    auto hm = canonical_height(fam, ctx7(), fam.sections[2], Direction::Minus, 3, opt);
    CHECK(hm.value - hm.error_bound > 0);
    auto h0 = canonical_height(fam, ctx7(), fam.sections[0], Direction::Minus, 3, opt);
    CHECK(h0.value == 0);
}
