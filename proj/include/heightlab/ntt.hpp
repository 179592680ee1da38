#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace heightlab {

// Montgomery arithmetic modulo an odd p < 2^62. Values in Montgomery form lie in [0, p).
struct Mont {
    uint64_t p = 0, pinv = 0, r2 = 0;

    Mont() = default;
    explicit Mont(uint64_t prime);

    uint64_t reduce(unsigned __int128 t) const {
        uint64_t m = static_cast<uint64_t>(t) * pinv;
        uint64_t r = static_cast<uint64_t>((t + static_cast<unsigned __int128>(m) * p) >> 64);
        return r >= p ? r - p : r;
    }
    uint64_t mul(uint64_t a, uint64_t b) const { return reduce(static_cast<unsigned __int128>(a) * b); }
    uint64_t add(uint64_t a, uint64_t b) const {
        uint64_t s = a + b;
        return s >= p ? s - p : s;
    }
    uint64_t sub(uint64_t a, uint64_t b) const { return a >= b ? a - b : a + p - b; }
    uint64_t to(uint64_t a) const { return mul(a % p, r2); }
    uint64_t from(uint64_t a) const { return reduce(a); }
    uint64_t pow(uint64_t a, uint64_t e) const;
    uint64_t inv(uint64_t a) const { return pow(a, p - 2); }
    uint64_t one() const { return to(1); }
};

// Primes c*2^26 + 1 below 2^62, largest first.
std::vector<uint64_t> ntt_primes(std::size_t count);

constexpr int kNttMaxLog = 26;

// Power-of-two transforms over one NTT prime. Arrays are in Montgomery form.
class NttPrime {
public:
    explicit NttPrime(uint64_t p);
    const Mont& mont() const { return m_; }
    uint64_t prime() const { return m_.p; }
    // primitive root of unity of order 2^logn (Montgomery form)
    uint64_t root(int logn) const;
    // a[k] <- sum_j a[j] w^{jk}, natural order in and out
    void forward(std::vector<uint64_t>& a, int logn) const;
    // inverse of forward, including the 1/n scale
    void inverse(std::vector<uint64_t>& a, int logn) const;
    // values of the polynomial c at s*w^k for k < 2^logn; c may be longer than 2^logn
    std::vector<uint64_t> evaluate_coset(const std::vector<uint64_t>& c, uint64_t s, int logn) const;
    // coefficients (length 2^logn) of the polynomial with the given values on s*<w>
    std::vector<uint64_t> interpolate_coset(std::vector<uint64_t> v, uint64_t s, int logn) const;

private:
    void transform(std::vector<uint64_t>& a, int logn, bool inv) const;
    Mont m_;
    uint64_t g_ = 0;  // generator of F_p^*, Montgomery form
};

}  // namespace heightlab
