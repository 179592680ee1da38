#include <doctest.h>

#include "heightlab/heights.hpp"
#include "heightlab/ntt.hpp"
#include "heightlab/shadow.hpp"

#include <random>

using namespace heightlab;

namespace {

const SurfaceFamily& seed7() {
    static const SurfaceFamily fam = load_family(std::string(HEIGHTLAB_DATA) + "/families/seed7.json");
    return fam;
}

std::vector<uint64_t> mont_vec(const Mont& M, const std::vector<uint64_t>& v) {
    std::vector<uint64_t> r;
    for (auto x : v) r.push_back(M.to(x));
    return r;
}

}  // namespace

TEST_CASE("NTT round trip and coset evaluation") {
    auto primes = ntt_primes(2);
    REQUIRE(primes.size() == 2);
    for (auto p : primes) {
        CHECK(is_prime_u64(p));
        CHECK((p - 1) % (uint64_t(1) << kNttMaxLog) == 0);
        NttPrime P(p);
        const auto& M = P.mont();
        std::mt19937_64 rng(p);
        std::vector<uint64_t> a(16);
        for (auto& x : a) x = M.to(rng() % p);
        auto b = a;
        P.forward(b, 4);
        P.inverse(b, 4);
        CHECK(b == a);

        // values on s<w> agree with Horner evaluation
        std::vector<uint64_t> c = mont_vec(M, {3, 0, 5, 7, 1});
        uint64_t s = M.to(11);
        auto vals = P.evaluate_coset(c, s, 3);
        uint64_t w = P.root(3), x = s;
        for (int k = 0; k < 8; ++k) {
            uint64_t h = 0;
            for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j) h = M.add(M.mul(h, x), c[j]);
            CHECK(vals[k] == h);
            x = M.mul(x, w);
        }
        auto back = P.interpolate_coset(vals, s, 3);
        back.resize(c.size());
        CHECK(back == c);
    }
}

TEST_CASE("remainder and exact quotient over F_p") {
    uint64_t p = ntt_primes(1)[0];
    Mont M(p);
    // (t^2 + 2)(t^3 + 5t + 1) = t^5 + 7t^3 + t^2 + 10t + 2
    auto a = mont_vec(M, {2, 10, 1, 7, 0, 1});
    auto m = mont_vec(M, {2, 0, 1});
    auto q = shadow_divexact(a, m, M);
    CHECK(q == mont_vec(M, {1, 5, 0, 1}));
    auto r = shadow_rem(a, m, M);
    for (auto x : r) CHECK(x == 0);
    auto r2 = shadow_rem(mont_vec(M, {1, 0, 0, 1}), m, M);  // t^3 + 1 = t(t^2 + 2) - 2t + 1
    r2.resize(2);
    CHECK(r2 == mont_vec(M, {1, p - 2}));
}

TEST_CASE("shadow degrees equal exact degrees") {
    const auto& fam = seed7();
    for (uint64_t p : ntt_primes(2)) {
        for (const auto& s : fam.sections) {
            ShadowOrbit sh(fam, p);
            sh.load(s);
            MarkedSection cur = s;
            for (int n = 1; n <= 2; ++n) {
                sh.apply_word(fam.word);
                cur = automorphism_apply(fam, cur, 1);
                CHECK(sh.degrees() == cur.degrees());
            }
            // the inverse word walks back
            ShadowOrbit bw(fam, p);
            bw.load(s);
            bw.apply_word(fam.reversed_word());
            CHECK(bw.degrees() == automorphism_apply(fam, s, -1).degrees());
        }
    }
}

TEST_CASE("orbit switches to shadows past the cap") {
    const auto& fam = seed7();
    OrbitOptions opt;
    opt.degree_cap = 200;
    opt.use_cache = false;
    auto o = compute_orbit(fam, fam.sections[1], Direction::Plus, 4, opt);
    REQUIRE(o.records.size() == 5);
    CHECK(o.records[2].exact);
    CHECK_FALSE(o.records[3].exact);
    CHECK(o.records[3].degrees == Degrees{441, 1155, 3025});
    CHECK(o.primes.size() >= 2);
    for (auto& r : o.records) CHECK_FALSE(r.flagged);
    // ratio of the last two totals is close to lambda
    auto tot = [](const Degrees& d) { return double(d[0] + d[1] + d[2]); };
    double lam = make_height_context(fam).lambda;
    CHECK(tot(o.records[4].degrees) / tot(o.records[3].degrees) == doctest::Approx(lam).epsilon(0.02));
}
