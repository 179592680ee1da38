#include <doctest.h>

#include "heightlab/heights.hpp"
#include "heightlab/polyparse.hpp"
#include "heightlab/wehler.hpp"

#include <cmath>

using namespace heightlab;

namespace {

std::string data(const std::string& name) { return std::string(HEIGHTLAB_DATA) + "/families/" + name; }

const SurfaceFamily& seed7() {
    static const SurfaceFamily fam = load_family(data("seed7.json"));
    return fam;
}

MarkedSection section_from(const std::array<std::array<const char*, 2>, 3>& s) {
    std::array<std::pair<QPoly, QPoly>, 3> r;
    for (int i = 0; i < 3; ++i) r[i] = {parse_poly(s[i][0]), parse_poly(s[i][1])};
    return MarkedSection::from_rational(r);
}

long total(const Degrees& d) { return d[0] + d[1] + d[2]; }

}  // namespace

TEST_CASE("family file round trip") {
    const auto& fam = seed7();
    CHECK(fam.word == std::vector<int>{1, 2, 3});
    CHECK(fam.sections.size() == 3);
    auto again = parse_family(family_to_json(fam));
    CHECK(again.canonical() == fam.canonical());
    for (std::size_t k = 0; k < fam.sections.size(); ++k) CHECK(again.sections[k] == fam.sections[k]);
    CHECK_NOTHROW(validate_family(fam));
}

TEST_CASE("validation errors") {
    SUBCASE("section off the surface") {
        auto fam = seed7();
        fam.sections[0] = MarkedSection::constant({{{{1, 1}}, {{1, 1}}, {{1, 1}}}});
        CHECK_THROWS_WITH_AS(validate_family(fam), "section 0 not on surface", ValidationError);
    }
    SUBCASE("word [1,2] is not hyperbolic") {
        auto fam = seed7();
        fam.word = {1, 2};
        CHECK_THROWS_AS(validate_family(fam), ValidationError);
        CHECK_NOTHROW(validate_family(fam, false));
    }
    SUBCASE("malformed polynomial") {
        CHECK_THROWS_WITH_AS(parse_family(R"({"coeffs":{"222":"1 + * t"},"word":[1,2,3],"sections":[]})"),
                             "coeffs[\"222\"]: parse error at position 4: unexpected '*'", ValidationError);
        try {
            parse_poly("t^2 + (3");
            FAIL("no parse error");
        } catch (const ParseError& e) {
            CHECK(e.position == 6);  // the unclosed parenthesis
        }
    }
}

TEST_CASE("involution 3 on the diagonal family satisfies Vieta") {
    auto fam = load_family(data("small.json"));
    const auto& s = fam.sections[0];
    REQUIRE(on_surface(fam, s));
    auto res = involution_apply(fam, 3, s);
    const auto& img = res.section;
    CHECK(on_surface(fam, img));
    // z z' = C/A with z = p/q as elements of Q(t)
    auto [A, B, C] = coordinate_quadratic(fam, 2, s);
    const auto& z = s.c[2];
    const auto& w = img.c[2];
    CHECK(A * z.p * w.p == C * z.q * w.q);
    // both roots vanish in the quadratic
    for (const ZPair* r : {&z, &w}) CHECK((A * r->p * r->p + B * r->p * r->q + C * r->q * r->q).is_zero());
    CHECK(involution_apply(fam, 3, img).section == s);
}

TEST_CASE("involutions are involutive and keep sections on the surface") {
    const auto& fam = seed7();
    for (const auto& s : fam.sections)
        for (int i = 1; i <= 3; ++i) {
            auto r = involution_apply(fam, i, s);
            CHECK(on_surface(fam, r.section));
            auto back = involution_apply(fam, i, r.section);
            CHECK(back.section == s);
            CHECK(r.fixed == (r.section == s));
        }
}

TEST_CASE("automorphism powers") {
    const auto& fam = seed7();
    const auto& s = fam.sections[1];
    CHECK(automorphism_apply(fam, s, 0) == s);
    auto f1 = automorphism_apply(fam, s, 1);
    CHECK(on_surface(fam, f1));
    CHECK(automorphism_apply(fam, f1, -1) == s);
    auto f2 = automorphism_apply(fam, s, 2);
    CHECK(automorphism_apply(fam, f1, 1) == f2);
    CHECK(automorphism_apply(fam, f2, -2) == s);
    CHECK_THROWS_AS(automorphism_apply(fam, s, 5, 100), DegreeCapExceeded);
}

TEST_CASE("engineered section is 2-periodic") {
    const auto& fam = seed7();
    const auto& s = fam.sections[0];
    auto f1 = automorphism_apply(fam, s, 1);
    CHECK_FALSE(f1 == s);
    CHECK(automorphism_apply(fam, s, 2) == s);
    CHECK(automorphism_apply(fam, s, -1) == f1);
}

TEST_CASE("degree growth follows lambda") {
    const auto& fam = seed7();
    auto ctx = make_height_context(fam);
    MarkedSection cur = fam.sections[1];
    std::vector<Degrees> d{cur.degrees()};
    for (int n = 1; n <= 3; ++n) {
        cur = automorphism_apply(fam, cur, 1);
        d.push_back(cur.degrees());
    }
    CHECK(d[1] == Degrees{1, 3, 9});
    CHECK(d[2] == Degrees{24, 64, 168});
    CHECK(d[3] == Degrees{441, 1155, 3025});
    double ratio = double(total(d[3])) / total(d[2]);
    CHECK(std::abs(ratio / ctx.lambda - 1) < 0.25);

    // the normalized triple lines up with the functional L_i . D-
    auto g = IntersectionForm::wehler();
    auto dm = ctx.lat.dminus.approx();
    std::array<double, 3> dir{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dir[i] += g.gram[i][j].get_d() * dm[j];
    double sd = dir[0] + dir[1] + dir[2];
    for (int i = 0; i < 3; ++i) CHECK(std::abs(double(d[3][i]) / total(d[3]) - dir[i] / sd) < 0.1 * dir[i] / sd);
}

TEST_CASE("section degree pairing") {
    auto s = section_from({{{"t^2", "1"}, {"t + 1", "2"}, {"3", "1"}}});
    CHECK(s.degrees() == Degrees{2, 1, 0});
    CHECK(section_degree(s, DivisorClass::rational({1, 1, 1})).to_double() == 3);
    CHECK(section_degree(MarkedSection::constant({{{{1, 2}}, {{0, 1}}, {{1, 0}}}}), DivisorClass::rational({5, 7, 9}))
              .is_zero());
    auto lat = lattice_data({1, 2, 3});
    auto dp = lat.dplus.approx();
    CHECK(section_degree(s, lat.dplus).to_double() == doctest::Approx(2 * dp[0] + dp[1]).epsilon(1e-14));
}

TEST_CASE("pairs are primitive with a fixed sign") {
    auto pr = normalize_pair(ZPoly({Z(-4), Z(6)}), ZPoly({Z(2), Z(-2)}));
    CHECK(pr.p == ZPoly({Z(2), Z(-3)}));
    CHECK(pr.q == ZPoly({Z(-1), Z(1)}));
}

TEST_CASE("smoothness probe") {
    CHECK(smoke_smoothness(seed7(), 5).flagged.empty());
    // (x0 y0 z0 + x1 y1 z1)^2 is singular along its whole zero set
    auto sq = parse_family(R"({"coeffs":{"222":"1","111":"2","000":"1"},"word":[1,2,3],"sections":[]})");
    auto rep = smoke_smoothness(sq, 4);
    CHECK(rep.flagged.size() == 4);
    CHECK_THROWS(smoke_smoothness(sq, 0));
}

TEST_CASE("section search finds the constant sections of the test family") {
    const auto& fam = seed7();
    auto found = find_sections(fam, 4);
    for (const auto& s : found) CHECK(on_surface(fam, s));
    int hits = 0;
    for (const auto& s : fam.sections)
        for (const auto& f : found) hits += (f == s);
    CHECK(hits >= 1);
}

TEST_CASE("exact fiber orbit matches the specialized section orbit") {
    const auto& fam = seed7();
    const auto& s = fam.sections[2];
    Q t(1, 3);
    auto f2 = automorphism_apply(fam, s, 2);
    CHECK(fiber_apply_exact(fam, t, specialize(s, t), 2) == specialize(f2, t));
    CHECK(fiber_apply_exact(fam, t, specialize(f2, t), -2) == specialize(s, t));
}

TEST_CASE("excluded parameters are append-only and shared") {
    auto fam = seed7();
    auto copy = fam;
    fam.excluded->add(Q(1, 2));
    CHECK(copy.excluded->rational().size() == fam.excluded->rational().size());
}
