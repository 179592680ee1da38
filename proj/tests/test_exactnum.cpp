#include <doctest.h>

#include "heightlab/exactnum.hpp"

#include <cmath>
#include <random>

using namespace heightlab;

namespace {

QPoly rand_qpoly(std::mt19937_64& rng, int deg) {
    std::vector<Q> c(deg + 1);
    for (auto& x : c) x = Q(static_cast<long>(rng() % 41) - 20, static_cast<unsigned long>(rng() % 5 + 1));
    if (sgn(c.back()) == 0) c.back() = 1;
    return QPoly(c);
}

ZPoly rand_zpoly(std::mt19937_64& rng, int deg, int bits) {
    std::vector<Z> c(deg + 1);
    gmp_randclass gr(gmp_randinit_default);
    gr.seed(static_cast<unsigned long>(rng()));
    for (auto& x : c) {
        x = gr.get_z_bits(bits);
        if (rng() & 1) x = -x;
    }
    if (sgn(c.back()) == 0) c.back() = 1;
    return ZPoly(c);
}

const QPoly T{Q(0), Q(1)};

}  // namespace

TEST_CASE("ratfun_normalize cancels common factors") {
    auto r = ratfun_normalize(QPoly{Q(-1), Q(0), Q(1)}, QPoly{Q(-1), Q(1)});
    CHECK(r.num() == QPoly{Q(1), Q(1)});
    CHECK(r.den() == QPoly{Q(1)});
}

TEST_CASE("ratfun_normalize zero and scalar representatives") {
    auto z = ratfun_normalize(QPoly{}, QPoly::monomial(1, 3));
    CHECK(z.num().is_zero());
    CHECK(z.den() == QPoly{Q(1)});
    auto h = ratfun_normalize(QPoly{Q(0), Q(2)}, QPoly{Q(4)});
    CHECK(h.num() == QPoly{Q(0), Q(1, 2)});
    CHECK(h.den() == QPoly{Q(1)});
    CHECK_THROWS_WITH(ratfun_normalize(T, QPoly{}), "division by zero in function field");
}

TEST_CASE("refine isolates sqrt(3)") {
    AlgebraicReal a(QPoly{Q(-3), Q(0), Q(1)}, 1, 2);
    auto iv = refine(a, Q(1, 100));
    CHECK(iv.width() <= Q(1, 100));
    CHECK(iv.lo * iv.lo < 3);
    CHECK(iv.hi * iv.hi > 3);
    CHECK(iv.lo.get_d() <= 1.7320508075688772);
    CHECK(iv.hi.get_d() >= 1.7320508075688772);
}

TEST_CASE("refine of a rational root degenerates") {
    AlgebraicReal a(QPoly{Q(-5), Q(1)}, 0, 10);
    auto iv = refine(a, Q(1, 3));
    CHECK(iv.lo == 5);
    CHECK(iv.hi == 5);
}

TEST_CASE("refine x^2-14x+1 on (13,14)") {
    QPoly m{Q(1), Q(-14), Q(1)};
    AlgebraicReal a(m, 13, 14);
    auto iv = refine(a, Q(1, 1000000));
    CHECK(iv.width() <= Q(1, 1000000));
    CHECK(sgn(m.eval(iv.lo)) * sgn(m.eval(iv.hi)) < 0);
    CHECK(std::fabs(iv.lo.get_d() - 13.928203230275509) < 2e-6);
}

TEST_CASE("refine is nested and shrinks") {
    AlgebraicReal a(QPoly{Q(-2), Q(0), Q(0), Q(1)}, 1, 2);
    AlgebraicReal cur = a;
    for (int k = 1; k < 40; ++k) {
        AlgebraicReal next = cur.refine(Q(1, Z(1) << k));
        CHECK(next.lo() >= cur.lo());
        CHECK(next.hi() <= cur.hi());
        CHECK(next.interval().width() <= Q(1, Z(1) << k));
        cur = next;
    }
    CHECK(std::fabs(cur.to_double() - std::cbrt(2.0)) < 1e-12);
}

TEST_CASE("reduce_mod_p examples") {
    auto r = ratfun_normalize(QPoly{Q(0), Q(3), Q(1)}, QPoly{Q(2)});
    auto f = reduce_mod_p(r, 5);
    CHECK(f.num.degree() == 2);
    // (t^2+3t)*3 = 3t^2 + 4t over F_5
    CHECK(f.num.coeffs() == std::vector<uint64_t>{0, 4, 3});
    CHECK(f.den.coeffs() == std::vector<uint64_t>{1});
    CHECK_THROWS_WITH(reduce_mod_p(ratfun_normalize(QPoly{Q(1), Q(5)}, QPoly{Q(1)}), 5), "prime rejected");
    CHECK_THROWS_WITH(reduce_mod_p(ratfun_normalize(QPoly{Q(0), Q(1, 3)}, QPoly{Q(1)}), 3), "prime rejected");
}

TEST_CASE("ring axioms and degree additivity on random polynomials") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 50; ++it) {
        QPoly a = rand_qpoly(rng, rng() % 6), b = rand_qpoly(rng, rng() % 6), c = rand_qpoly(rng, rng() % 6);
        CHECK((a + b) * c == a * c + b * c);
        CHECK((a * b).degree() == a.degree() + b.degree());
        auto [q, r] = divmod(a * b + c, b);
        CHECK(q * b + r == a * b + c);
        CHECK(r.degree() < b.degree());
    }
}

TEST_CASE("gcd(a g, b g) is an associate of g gcd(a, b)") {
    std::mt19937_64 rng(12);
    for (int it = 0; it < 40; ++it) {
        QPoly a = rand_qpoly(rng, 1 + rng() % 4), b = rand_qpoly(rng, 1 + rng() % 4), g = rand_qpoly(rng, 1 + rng() % 3);
        CHECK(gcd(a * g, b * g) == (g * gcd(a, b)).monic());
    }
}

TEST_CASE("reduce_mod_p commutes with ring operations") {
    std::mt19937_64 rng(13);
    const uint64_t p = 1000000007ULL;
    for (int it = 0; it < 30; ++it) {
        QPoly a = rand_qpoly(rng, rng() % 5), b = rand_qpoly(rng, rng() % 5);
        CHECK(reduce(a * b, p) == reduce(a, p) * reduce(b, p));
        CHECK(reduce(a + b, p) == reduce(a, p) + reduce(b, p));
    }
}

TEST_CASE("Kronecker multiplication and exact division agree with schoolbook") {
    std::mt19937_64 rng(14);
    for (int it = 0; it < 8; ++it) {
        ZPoly a = rand_zpoly(rng, 30 + rng() % 90, 10 + rng() % 300), b = rand_zpoly(rng, 25 + rng() % 90, 5 + rng() % 200);
        ZPoly prod = a * b;
        // schoolbook oracle
        std::vector<Z> d(a.coeffs().size() + b.coeffs().size() - 1);
        for (std::size_t i = 0; i < a.coeffs().size(); ++i)
            for (std::size_t j = 0; j < b.coeffs().size(); ++j) d[i + j] += a.coeffs()[i] * b.coeffs()[j];
        CHECK(prod == ZPoly(d));
        CHECK(divexact(prod, b) == a);
        CHECK(divexact(prod, a) == b);
        ZPoly q;
        CHECK(try_divexact(prod, a, q));
        CHECK(q == b);
    }
}

TEST_CASE("try_divexact rejects non-divisors") {
    ZPoly a(std::vector<Z>{1, 0, 1}), b(std::vector<Z>{1, 1}), q;
    CHECK_FALSE(try_divexact(a, b, q));
}

TEST_CASE("primitive part and content") {
    ZPoly a(std::vector<Z>{6, -12, 18});
    CHECK(a.content() == 6);
    CHECK(a.primitive() == ZPoly(std::vector<Z>{1, -2, 3}));
    ZPoly b(std::vector<Z>{4, -8});
    CHECK(b.primitive() == ZPoly(std::vector<Z>{-1, 2}));
}

TEST_CASE("sign in Q(sqrt 5) and inverses") {
    QPoly m{Q(1), Q(-18), Q(1)};
    auto K = std::make_shared<const NumberField>(AlgebraicReal(m, 17, 18));
    QNum l = QNum::gen(K);
    QNum x = l - QNum(K, Q(9));  // 4 sqrt 5
    CHECK(x.sign() > 0);
    CHECK((x * x - QNum(K, Q(80))).is_zero());
    CHECK((l * l.inv() - QNum(K, Q(1))).is_zero());
    CHECK(std::fabs(l.to_double() - (9 + 4 * std::sqrt(5.0))) < 1e-12);
    QNum y = QNum(K, Q(161, 9)) - l;  // 17.888.. - 17.944..
    CHECK(y.sign() < 0);
}

TEST_CASE("real_roots and rational_roots") {
    QPoly p = QPoly{Q(1), Q(1)} * QPoly{Q(1), Q(-18), Q(1)};
    auto rr = real_roots(p);
    REQUIRE(rr.size() == 3);
    CHECK(rr[0].is_exact_point());
    CHECK(rr[0].lo() == -1);
    CHECK(std::fabs(rr[2].to_double() - 17.94427190999916) < 1e-12);
    CHECK(strip_rational_roots(p) == QPoly{Q(1), Q(-18), Q(1)});
}

TEST_CASE("complex roots with polishing") {
    // (t^2+1)(t-3/7)
    QPoly p = QPoly{Q(1), Q(0), Q(1)} * QPoly{Q(-3, 7), Q(1)};
    auto rs = complex_roots(p);
    REQUIRE(rs.size() == 3);
    int hits = 0;
    for (auto z : rs) {
        z = polish_root(p, z);
        if (std::abs(z - std::complex<double>(0, 1)) < 1e-14 || std::abs(z - std::complex<double>(0, -1)) < 1e-14 ||
            std::abs(z - 3.0 / 7.0) < 1e-15)
            ++hits;
    }
    CHECK(hits == 3);
}

TEST_CASE("poly_sqrt") {
    QPoly a{Q(1, 2), Q(3), Q(-2)};
    QPoly r;
    CHECK(poly_sqrt(a * a, r));
    CHECK(r * r == a * a);
    CHECK_FALSE(poly_sqrt(a, r));
}
