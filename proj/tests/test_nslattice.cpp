#include <doctest.h>

#include "heightlab/nslattice.hpp"

#include <cmath>
#include <random>

using namespace heightlab;

namespace {

// det(xI - M) at integer x by cofactor expansion, compared against charpoly.
Z det_shift(const LatticeMap& m, long x) {
    IMat a = m.matrix;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = (i == j ? Z(x) : Z(0)) - a[i][j];
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

std::array<double, 3> power_iteration(const LatticeMap& m) {
    std::array<double, 3> v{1, 1, 1};
    for (int it = 0; it < 200; ++it) {
        std::array<double, 3> w{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) w[i] += m.matrix[i][j].get_d() * v[j];
        double s = 4 * (w[0] + w[1] + w[2]);  // pairing with L1+L2+L3
        for (int i = 0; i < 3; ++i) v[i] = w[i] / s;
    }
    return v;
}

const auto S = wehler_involutions();

}  // namespace

TEST_CASE("Wehler intersection form") {
    auto f = IntersectionForm::wehler();
    CHECK(f.symmetric());
    CHECK(f.det() == 16);
    CHECK(f.signature() == std::pair<int, int>{1, 2});
}

TEST_CASE("word [1] is s1 and is an isometric involution") {
    auto c = compose_word(S, {1});
    IVec l1{1, 0, 0}, l2{0, 1, 0}, l3{0, 0, 1};
    CHECK(c.map.apply(l1) == IVec{-1, 2, 2});
    CHECK(c.map.apply(l2) == l2);
    CHECK(c.map.apply(l3) == l3);
    CHECK(c.map.is_isometry(IntersectionForm::wehler()));
    CHECK(c.map * c.map == LatticeMap::identity());
}

TEST_CASE("word [1,1] is the identity") {
    auto c = compose_word(S, {1, 1});
    CHECK(c.map == LatticeMap::identity());
    CHECK(c.identity_warning);
    CHECK(compose_word(S, {}).identity_warning);
    CHECK(dynamical_degree(c.map).lo() == 1);
}

TEST_CASE("word [1,2] is unipotent") {
    auto c = compose_word(S, {1, 2});
    QPoly cp = charpoly(c.map);
    for (long x = -3; x <= 3; ++x) CHECK(Q(det_shift(c.map, x)) == cp.eval(Q(x)));
    CHECK(cp == QPoly{Q(-1), Q(3), Q(-3), Q(1)});
    CHECK_FALSE(is_hyperbolic(c.map));
    CHECK_THROWS_WITH(eigendivisor(c.map, Direction::Plus), "no Perron eigenvector");
}

TEST_CASE("word [1,2,3] spectrum") {
    auto c = compose_word(S, {1, 2, 3});
    QPoly cp = charpoly(c.map);
    for (long x = -3; x <= 3; ++x) CHECK(Q(det_shift(c.map, x)) == cp.eval(Q(x)));
    CHECK(cp == QPoly{Q(1), Q(-17), Q(-17), Q(1)});
    auto sp = spectrum(c.map);
    REQUIRE(sp.salem_factor.has_value());
    CHECK(*sp.salem_factor == QPoly{Q(1), Q(-18), Q(1)});
    CHECK(std::fabs(sp.lambda.to_double() - (9 + 4 * std::sqrt(5.0))) < 1e-12);
    CHECK(sp.other_roots.size() == 1);
    CHECK(sp.max_unit_deviation < 1e-12);
    AlgebraicReal a = dynamical_degree(c.map), b = dynamical_degree(c.map.inverse());
    CHECK(a.minimal_polynomial() == b.minimal_polynomial());
    CHECK(a.sign_of(b.minimal_polynomial()) == 0);
}

TEST_CASE("isometry and spectral reciprocity on random words") {
    std::mt19937_64 rng(5);
    auto f = IntersectionForm::wehler();
    int hyper = 0;
    for (int it = 0; it < 60; ++it) {
        std::vector<int> w;
        int len = 2 + static_cast<int>(rng() % 7);
        for (int k = 0; k < len; ++k) w.push_back(1 + static_cast<int>(rng() % 3));
        auto m = compose_word(S, w).map;
        CHECK(m.is_isometry(f));
        if (!is_hyperbolic(m)) continue;
        ++hyper;
        auto sp = spectrum(m);
        CHECK(sp.max_unit_deviation < 1e-8);
        AlgebraicReal a = dynamical_degree(m), b = dynamical_degree(m.inverse());
        CHECK(a.sign_of(b.minimal_polynomial()) == 0);
        CHECK(std::fabs(a.to_double() - b.to_double()) < 1e-9 * a.to_double());
    }
    CHECK(hyper > 10);
}

TEST_CASE("eigendivisors of [1,2,3]") {
    auto m = compose_word(S, {1, 2, 3}).map;
    auto f = IntersectionForm::wehler();
    DivisorClass dp = eigendivisor(m, Direction::Plus), dm = eigendivisor(m, Direction::Minus);
    // exact residual m D+ - lambda D+
    QNum lam = QNum::gen(dp.coeffs[0].field());
    for (int i = 0; i < 3; ++i) {
        QNum s = QNum(lam.field(), Q(0));
        for (int j = 0; j < 3; ++j) s = s + Q(m.matrix[i][j]) * dp.coeffs[j];
        CHECK((s - lam * dp.coeffs[i]).is_zero());
    }
    CHECK(pairing(f, dp, dp).is_zero());
    CHECK(pairing(f, dm, dm).is_zero());
    CHECK(pairing(f, dp, dm).sign() > 0);
    auto po = power_iteration(m);
    auto ap = dp.approx();
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(ap[i] - po[i]) < 1e-12);
    auto pm = power_iteration(m.inverse());
    auto am = dm.approx();
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(am[i] - pm[i]) < 1e-12);
    // normalization D.(L1+L2+L3) = 1
    CHECK((pairing(f, dp, DivisorClass::rational({1, 1, 1})) - QNum(lam.field(), Q(1))).is_zero());
}

TEST_CASE("big_nef_check") {
    auto m = compose_word(S, {1, 2, 3}).map;
    DivisorClass dp = eigendivisor(m, Direction::Plus), dm = eigendivisor(m, Direction::Minus);
    auto c = big_nef_check(dp + dm, dp, dm);
    CHECK(c.big_and_nef);
    CHECK(c.self_intersection.sign() > 0);
    CHECK((c.self_intersection - Q(2) * pairing(IntersectionForm::wehler(), dp, dm)).is_zero());
    CHECK_FALSE(big_nef_check(DivisorClass::rational({1, 0, 0}), dp, dm).big_and_nef);
    CHECK_FALSE(big_nef_check(dp, dp, dm).big_and_nef);
    CHECK_THROWS_WITH(eigendivisor(LatticeMap::identity(), Direction::Plus), "no Perron eigenvector");
}

TEST_CASE("periodic_curve_classes") {
    auto m = compose_word(S, {1, 2, 3}).map;
    CHECK(periodic_curve_classes(m, -2, 12, 0).orbits.empty());
    // C.C = 4(c1c2+c1c3+c2c3) is never -2
    CHECK(periodic_curve_classes(m, -2, 12, 20).orbits.empty());
    CHECK(periodic_curve_classes(LatticeMap::identity(), -2, 12, 20).orbits.empty());
    // identity: every -4 class in the box is a fixed orbit
    const int H = 6;
    int brute = 0;
    for (int a = -H; a <= H; ++a)
        for (int b = -H; b <= H; ++b)
            for (int c = -H; c <= H; ++c)
                if (a * b + a * c + b * c == -1) ++brute;
    auto id = periodic_curve_classes(LatticeMap::identity(), -4, 3, H);
    CHECK(static_cast<int>(id.orbits.size()) == brute);
    auto r = periodic_curve_classes(m, -4, 12, 12, IntersectionForm::wehler(), 2);
    for (auto& orb : r.orbits) {
        IVec w = m.apply(orb.back());
        CHECK(w == orb.front());
    }
}
