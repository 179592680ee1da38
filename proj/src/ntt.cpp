#include "heightlab/ntt.hpp"

#include "heightlab/exactnum.hpp"

#include <stdexcept>

namespace heightlab {

Mont::Mont(uint64_t prime) : p(prime) {
    if (p % 2 == 0 || p >= (uint64_t(1) << 62)) throw std::invalid_argument("Montgomery modulus must be odd and < 2^62");
    uint64_t inv = p;  // Newton iteration for p^{-1} mod 2^64
    for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
    pinv = ~inv + 1;
    unsigned __int128 r = (static_cast<unsigned __int128>(1) << 64) % p;
    r2 = static_cast<uint64_t>((r * r) % p);
}

uint64_t Mont::pow(uint64_t a, uint64_t e) const {
    uint64_t r = one();
    while (e) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

std::vector<uint64_t> ntt_primes(std::size_t count) {
    std::vector<uint64_t> out;
    const uint64_t step = uint64_t(1) << kNttMaxLog;
    for (uint64_t c = ((uint64_t(1) << 62) - 1) / step; c > 0 && out.size() < count; --c) {
        uint64_t p = c * step + 1;
        if (is_prime_u64(p)) out.push_back(p);
    }
    return out;
}

NttPrime::NttPrime(uint64_t p) : m_(p) {
    // factor p - 1 = c * 2^k with c small enough for trial division
    uint64_t c = p - 1;
    std::vector<uint64_t> fac;
    while (c % 2 == 0) c /= 2;
    fac.push_back(2);
    for (uint64_t d = 3; d * d <= c; d += 2) {
        if (c % d) continue;
        fac.push_back(d);
        while (c % d == 0) c /= d;
    }
    if (c > 1) fac.push_back(c);
    for (uint64_t g = 2;; ++g) {
        bool ok = true;
        for (uint64_t q : fac)
            if (powmod(g, (p - 1) / q, p) == 1) {
                ok = false;
                break;
            }
        if (ok) {
            g_ = m_.to(g);
            break;
        }
    }
}

uint64_t NttPrime::root(int logn) const {
    if (logn > kNttMaxLog) throw std::length_error("transform length exceeds prime order");
    return m_.pow(g_, (m_.p - 1) >> logn);
}

void NttPrime::transform(std::vector<uint64_t>& a, int logn, bool inv) const {
    const std::size_t n = std::size_t(1) << logn;
    if (a.size() != n) throw std::length_error("transform length mismatch");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    std::vector<uint64_t> tw(n / 2 > 0 ? n / 2 : 1);
    for (int s = 1; s <= logn; ++s) {
        const std::size_t half = std::size_t(1) << (s - 1);
        uint64_t w = root(s);
        if (inv) w = m_.inv(w);
        tw[0] = m_.one();
        for (std::size_t k = 1; k < half; ++k) tw[k] = m_.mul(tw[k - 1], w);
        for (std::size_t blk = 0; blk < n; blk += 2 * half) {
            uint64_t* x = a.data() + blk;
            uint64_t* y = x + half;
            for (std::size_t k = 0; k < half; ++k) {
                uint64_t u = x[k], v = m_.mul(y[k], tw[k]);
                x[k] = m_.add(u, v);
                y[k] = m_.sub(u, v);
            }
        }
    }
    if (inv) {
        uint64_t ninv = m_.inv(m_.to(n % m_.p));
        for (auto& x : a) x = m_.mul(x, ninv);
    }
}

void NttPrime::forward(std::vector<uint64_t>& a, int logn) const { transform(a, logn, false); }
void NttPrime::inverse(std::vector<uint64_t>& a, int logn) const { transform(a, logn, true); }

std::vector<uint64_t> NttPrime::evaluate_coset(const std::vector<uint64_t>& c, uint64_t s, int logn) const {
    const std::size_t n = std::size_t(1) << logn;
    std::vector<uint64_t> a(n, 0);
    // c(s x) folded modulo x^n - 1
    uint64_t sp = m_.one();
    for (std::size_t j = 0; j < c.size(); ++j) {
        auto& slot = a[j & (n - 1)];
        slot = m_.add(slot, m_.mul(c[j], sp));
        sp = m_.mul(sp, s);
    }
    forward(a, logn);
    return a;
}

std::vector<uint64_t> NttPrime::interpolate_coset(std::vector<uint64_t> v, uint64_t s, int logn) const {
    inverse(v, logn);
    uint64_t si = m_.inv(s), sp = m_.one();
    for (auto& x : v) {
        x = m_.mul(x, sp);
        sp = m_.mul(sp, si);
    }
    return v;
}

}  // namespace heightlab
