#include "heightlab/exactnum.hpp"
#include "heightlab/ntt.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace heightlab {

// ---------------------------------------------------------------- QPoly

QPoly::QPoly(std::vector<Q> c) : c_(std::move(c)) {
    for (auto& x : c_) x.canonicalize();
    trim();
}

QPoly QPoly::constant(const Q& c) { return QPoly(std::vector<Q>{c}); }

QPoly QPoly::monomial(const Q& c, std::size_t k) {
    std::vector<Q> v(k + 1);
    v[k] = c;
    return QPoly(std::move(v));
}

void QPoly::trim() {
    while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
}

const Q& QPoly::lead() const {
    if (c_.empty()) throw MathError("leading coefficient of zero polynomial");
    return c_.back();
}

Q QPoly::eval(const Q& x) const {
    Q r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
    return r;
}

double QPoly::eval(double x) const {
    double r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + it->get_d();
    return r;
}

std::complex<double> QPoly::eval(std::complex<double> x) const {
    std::complex<double> r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + it->get_d();
    return r;
}

QPoly QPoly::derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Q> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<long>(i);
    return QPoly(std::move(d));
}

QPoly QPoly::monic() const {
    if (c_.empty()) return {};
    Q l = c_.back();
    std::vector<Q> d(c_);
    for (auto& x : d) x /= l;
    return QPoly(std::move(d));
}

std::string QPoly::str(char var) const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
        const Q& c = c_[i];
        if (sgn(c) == 0) continue;
        Q a = abs(c);
        if (first) {
            if (sgn(c) < 0) os << "-";
        } else {
            os << (sgn(c) < 0 ? " - " : " + ");
        }
        first = false;
        bool unit = (a == 1);
        if (i == 0 || !unit) {
            if (a.get_den() != 1 && i > 0)
                os << "(" << a.get_str() << ")";
            else
                os << a.get_str();
            if (i > 0) os << "*";
        }
        if (i >= 1) os << var;
        if (i >= 2) os << "^" << i;
    }
    return os.str();
}

QPoly QPoly::operator-() const {
    std::vector<Q> d(c_);
    for (auto& x : d) x = -x;
    QPoly r;
    r.c_ = std::move(d);
    return r;
}

QPoly operator+(const QPoly& a, const QPoly& b) {
    std::vector<Q> d(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < a.c_.size(); ++i) d[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) d[i] += b.c_[i];
    return QPoly(std::move(d));
}

QPoly operator-(const QPoly& a, const QPoly& b) { return a + (-b); }

QPoly operator*(const QPoly& a, const QPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Q> d(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) d[i + j] += a.c_[i] * b.c_[j];
    return QPoly(std::move(d));
}

QPoly operator*(const Q& s, const QPoly& a) {
    std::vector<Q> d(a.coeffs());
    for (auto& x : d) x *= s;
    return QPoly(std::move(d));
}

std::pair<QPoly, QPoly> divmod(const QPoly& a, const QPoly& b) {
    if (b.is_zero()) throw MathError("polynomial division by zero");
    if (a.degree() < b.degree()) return {QPoly{}, a};
    std::vector<Q> r(a.coeffs());
    std::vector<Q> q(a.degree() - b.degree() + 1);
    const int db = b.degree();
    const Q& lb = b.lead();
    for (int i = a.degree() - db; i >= 0; --i) {
        Q c = r[i + db] / lb;
        q[i] = c;
        if (sgn(c) == 0) continue;
        for (int j = 0; j <= db; ++j) r[i + j] -= c * b.coeffs()[j];
    }
    r.resize(db);
    return {QPoly(std::move(q)), QPoly(std::move(r))};
}

QPoly operator%(const QPoly& a, const QPoly& b) { return divmod(a, b).second; }

QPoly gcd(const QPoly& a, const QPoly& b) {
    if (a.is_zero()) return b.monic();
    if (b.is_zero()) return a.monic();
    auto scaled = [](const QPoly& p) {
        Z l = 1;
        for (auto& x : p.coeffs()) l = lcm(l, Z(x.get_den()));
        return ZPoly::from_q_scaled(p, l).primitive();
    };
    return pair_gcd(scaled(a), scaled(b), ZPoly()).to_q().monic();
}

ExtGcd extended_gcd(const QPoly& a, const QPoly& b) {
    QPoly r0 = a, r1 = b, s0 = QPoly::constant(1), s1, t0, t1 = QPoly::constant(1);
    while (!r1.is_zero()) {
        auto [q, r] = divmod(r0, r1);
        QPoly s2 = s0 - q * s1, t2 = t0 - q * t1;
        r0 = std::move(r1);
        r1 = std::move(r);
        s0 = std::move(s1);
        s1 = std::move(s2);
        t0 = std::move(t1);
        t1 = std::move(t2);
    }
    if (r0.is_zero()) return {r0, s0, t0};
    Q l = 1 / r0.lead();
    return {l * r0, l * s0, l * t0};
}

QPoly squarefree_part(const QPoly& a) {
    if (a.degree() <= 0) return a.monic();
    QPoly g = gcd(a, a.derivative());
    return divmod(a, g).first.monic();
}

static bool q_sqrt(const Q& v, Q& r) {
    if (sgn(v) < 0) return false;
    Z n = v.get_num(), d = v.get_den();
    if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return false;
    Z sn = sqrt(n), sd = sqrt(d);
    r = Q(sn, sd);
    r.canonicalize();
    return true;
}

bool poly_sqrt(const QPoly& a, QPoly& root) {
    if (a.is_zero()) {
        root = {};
        return true;
    }
    if (a.degree() % 2) return false;
    const int n = a.degree() / 2;
    Q l;
    if (!q_sqrt(a.lead(), l)) return false;
    // r = sum r_k t^k with r_n = l; fix the top n coefficients from a's top half
    std::vector<Q> r(n + 1);
    r[n] = l;
    for (int k = n - 1; k >= 0; --k) {
        // coefficient of t^{n+k} in r^2 is 2 r_n r_k + sum_{i+j=n+k, i,j in (k,n)} r_i r_j
        Q s = 0;
        for (int i = k + 1; i < n; ++i) {
            int j = n + k - i;
            if (j > k && j < n) s += r[i] * r[j];
        }
        r[k] = (a.coeff(n + k) - s) / (2 * l);
    }
    QPoly cand(r);
    if (cand * cand == a) {
        root = cand;
        return true;
    }
    return false;
}

// ---------------------------------------------------------------- ZPoly

ZPoly::ZPoly(std::vector<Z> c) : c_(std::move(c)) { trim(); }

ZPoly ZPoly::constant(const Z& c) { return ZPoly(std::vector<Z>{c}); }

void ZPoly::trim() {
    while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
}

const Z& ZPoly::lead() const {
    if (c_.empty()) throw MathError("leading coefficient of zero polynomial");
    return c_.back();
}

std::size_t ZPoly::max_bits() const {
    std::size_t b = 0;
    for (auto& x : c_) b = std::max(b, mpz_sizeinbase(x.get_mpz_t(), 2));
    return b;
}

Z ZPoly::content() const {
    Z g = 0;
    for (auto& x : c_) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
        if (g == 1) break;
    }
    return g;
}

ZPoly ZPoly::primitive() const {
    if (c_.empty()) return {};
    Z g = content();
    if (sgn(c_.back()) < 0) g = -g;
    if (g == 1) return *this;
    return divexact_scalar(*this, g);
}

uint64_t ZPoly::eval_mod(uint64_t x, uint64_t p) const {
    uint64_t r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
        r = mulmod(r, x, p);
        r += mod_of(*it, p);
        if (r >= p) r -= p;
    }
    return r;
}

Z ZPoly::eval_homog(const Z& num, const Z& den, int formal_degree) const {
    // sum c_i num^i den^(D-i)
    Z r = 0, dp = 1;
    const int D = formal_degree;
    for (int i = D; i >= 0; --i) {
        r = r * num + coeff(static_cast<std::size_t>(i)) * dp;
        dp *= den;
    }
    // r = sum_i c_i num^i den^(D-i) by construction of the Horner sweep
    return r;
}

QPoly ZPoly::to_q() const {
    std::vector<Q> v(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) v[i] = Q(c_[i]);
    return QPoly(std::move(v));
}

ZPoly ZPoly::from_q_scaled(const QPoly& a, const Z& scale) {
    std::vector<Z> v(a.coeffs().size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        Q x = a.coeffs()[i] * scale;
        if (x.get_den() != 1) throw MathError("scale does not clear denominators");
        v[i] = x.get_num();
    }
    return ZPoly(std::move(v));
}

std::string ZPoly::str(char var) const { return to_q().str(var); }

ZPoly ZPoly::operator-() const {
    ZPoly r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

ZPoly& ZPoly::operator+=(const ZPoly& b) {
    if (b.c_.size() > c_.size()) c_.resize(b.c_.size());
    for (std::size_t i = 0; i < b.c_.size(); ++i) c_[i] += b.c_[i];
    trim();
    return *this;
}

ZPoly operator+(const ZPoly& a, const ZPoly& b) {
    ZPoly r = a;
    r += b;
    return r;
}

ZPoly operator-(const ZPoly& a, const ZPoly& b) { return a + (-b); }

ZPoly operator*(const Z& s, const ZPoly& a) {
    if (sgn(s) == 0) return {};
    ZPoly r = a;
    for (auto& x : r.c_) x *= s;
    return r;
}

ZPoly divexact_scalar(const ZPoly& a, const Z& s) {
    std::vector<Z> v(a.coeffs().size());
    for (std::size_t i = 0; i < v.size(); ++i)
        mpz_divexact(v[i].get_mpz_t(), a.coeffs()[i].get_mpz_t(), s.get_mpz_t());
    return ZPoly(std::move(v));
}

namespace {

// Kronecker substitution with slots of w limbs, signed digits.
Z kron_pack(const std::vector<Z>& c, std::size_t w) {
    const std::size_t n = c.size();
    std::vector<mp_limb_t> pos(n * w, 0), neg(n * w, 0);
    bool any_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        int s = sgn(c[i]);
        if (s == 0) continue;
        std::size_t cnt = 0;
        auto& dst = s > 0 ? pos : neg;
        if (s < 0) any_neg = true;
        mpz_export(dst.data() + i * w, &cnt, -1, sizeof(mp_limb_t), 0, 0, c[i].get_mpz_t());
        assert(cnt <= w);
    }
    Z P, N;
    mpz_import(P.get_mpz_t(), pos.size(), -1, sizeof(mp_limb_t), 0, 0, pos.data());
    if (!any_neg) return P;
    mpz_import(N.get_mpz_t(), neg.size(), -1, sizeof(mp_limb_t), 0, 0, neg.data());
    return P - N;
}

// Inverse of kron_pack; returns false if a carry survives past the last slot.
bool kron_unpack(const Z& W, std::size_t w, std::size_t nslots, std::vector<Z>& out) {
    int sw = sgn(W);
    Z A = abs(W);
    std::size_t nl = mpz_size(A.get_mpz_t());
    std::vector<mp_limb_t> limbs(std::max(nl, nslots * w) + 1, 0);
    if (nl) {
        std::size_t cnt = 0;
        mpz_export(limbs.data(), &cnt, -1, sizeof(mp_limb_t), 0, 0, A.get_mpz_t());
    }
    if (nl > nslots * w + 1) return false;
    out.assign(nslots, Z(0));
    std::vector<mp_limb_t> chunk(w);
    mp_limb_t carry = 0;
    for (std::size_t j = 0; j < nslots; ++j) {
        std::copy(limbs.begin() + j * w, limbs.begin() + (j + 1) * w, chunk.begin());
        mp_limb_t c = carry;
        for (std::size_t l = 0; l < w && c; ++l) {
            chunk[l] += c;
            c = (chunk[l] == 0) ? 1 : 0;
        }
        bool overflow = c != 0;  // chunk wrapped to exactly 2^k: digit 0, carry 1
        bool top = (chunk[w - 1] >> (GMP_NUMB_BITS - 1)) & 1;
        if (overflow) {
            out[j] = 0;
            carry = 1;
            continue;
        }
        if (top) {
            // digit = chunk - 2^k, magnitude = two's complement
            for (auto& l : chunk) l = ~l;
            mp_limb_t cc = 1;
            for (std::size_t l = 0; l < w && cc; ++l) {
                chunk[l] += cc;
                cc = (chunk[l] == 0) ? 1 : 0;
            }
            mpz_import(out[j].get_mpz_t(), w, -1, sizeof(mp_limb_t), 0, 0, chunk.data());
            out[j] = -out[j];
            carry = 1;
        } else {
            mpz_import(out[j].get_mpz_t(), w, -1, sizeof(mp_limb_t), 0, 0, chunk.data());
            carry = 0;
        }
    }
    // remaining limbs must equal the carry
    bool ok = true;
    {
        std::size_t start = nslots * w;
        mp_limb_t c = carry;
        for (std::size_t l = start; l < limbs.size(); ++l) {
            mp_limb_t expect = c;
            if (limbs[l] != expect) ok = false;
            c = 0;
        }
        if (start >= limbs.size() && carry) ok = false;
    }
    if (sw < 0)
        for (auto& x : out) x = -x;
    return ok;
}

std::size_t limbs_for_bits(std::size_t bits) { return (bits + GMP_NUMB_BITS - 1) / GMP_NUMB_BITS; }

std::size_t ceil_log2(std::size_t n) {
    std::size_t b = 0;
    while ((std::size_t(1) << b) < n) ++b;
    return b;
}

}  // namespace

ZPoly operator*(const ZPoly& a, const ZPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    const std::size_t na = a.c_.size(), nb = b.c_.size();
    const std::size_t nr = na + nb - 1;
    if (std::min(na, nb) < 24) {
        std::vector<Z> d(nr);
        for (std::size_t i = 0; i < na; ++i) {
            if (sgn(a.c_[i]) == 0) continue;
            for (std::size_t j = 0; j < nb; ++j)
                mpz_addmul(d[i + j].get_mpz_t(), a.c_[i].get_mpz_t(), b.c_[j].get_mpz_t());
        }
        return ZPoly(std::move(d));
    }
    std::size_t bits = a.max_bits() + b.max_bits() + ceil_log2(std::min(na, nb)) + 2;
    std::size_t w = limbs_for_bits(bits);
    Z A = kron_pack(a.c_, w), B = kron_pack(b.c_, w);
    Z C = A * B;
    std::vector<Z> out;
    bool ok = kron_unpack(C, w, nr, out);
    if (!ok) throw MathError("kronecker unpack overflow");
    return ZPoly(std::move(out));
}

bool try_divexact(const ZPoly& a, const ZPoly& b, ZPoly& q) {
    if (b.is_zero()) throw MathError("polynomial division by zero");
    if (a.is_zero()) {
        q = {};
        return true;
    }
    if (a.degree() < b.degree()) return false;
    std::vector<Z> r(a.coeffs());
    const int db = b.degree();
    std::vector<Z> qq(a.degree() - db + 1);
    const Z& lb = b.lead();
    Z rem;
    for (int i = a.degree() - db; i >= 0; --i) {
        Z& top = r[i + db];
        if (sgn(top) == 0) continue;
        mpz_tdiv_qr(qq[i].get_mpz_t(), rem.get_mpz_t(), top.get_mpz_t(), lb.get_mpz_t());
        if (sgn(rem) != 0) return false;
        for (int j = 0; j <= db; ++j)
            mpz_submul(r[i + j].get_mpz_t(), qq[i].get_mpz_t(), b.coeffs()[j].get_mpz_t());
    }
    for (int j = 0; j < db; ++j)
        if (sgn(r[j]) != 0) return false;
    q = ZPoly(std::move(qq));
    return true;
}

ZPoly divexact(const ZPoly& a, const ZPoly& b) {
    if (b.is_zero()) throw MathError("polynomial division by zero");
    if (a.is_zero()) return {};
    if (b.degree() == 0) return divexact_scalar(a, b.lead());
    if (b.degree() < 24 || a.degree() - b.degree() < 24) {
        ZPoly q;
        if (!try_divexact(a, b, q)) throw MathError("inexact polynomial division");
        return q;
    }
    const std::size_t nq = a.degree() - b.degree() + 1;
    std::size_t bits = std::max(a.max_bits(), b.max_bits()) + ceil_log2(a.coeffs().size()) + 64;
    std::mt19937_64 rng(0x5eedULL + a.coeffs().size());
    for (int attempt = 0; attempt < 12; ++attempt, bits *= 2) {
        std::size_t w = limbs_for_bits(bits);
        Z A = kron_pack(a.coeffs(), w), B = kron_pack(b.coeffs(), w);
        Z Qv;
        mpz_divexact(Qv.get_mpz_t(), A.get_mpz_t(), B.get_mpz_t());
        std::vector<Z> out;
        if (!kron_unpack(Qv, w, nq, out)) continue;
        ZPoly q(std::move(out));
        bool ok = true;
        for (int k = 0; k < 2 && ok; ++k) {
            uint64_t p = (uint64_t(1) << 61) - 1;  // Mersenne prime
            uint64_t x = rng() % p;
            ok = mulmod(q.eval_mod(x, p), b.eval_mod(x, p), p) == a.eval_mod(x, p);
            p = 4179340454199820289ULL;
            x = rng() % p;
            ok = ok && mulmod(q.eval_mod(x, p), b.eval_mod(x, p), p) == a.eval_mod(x, p);
        }
        if (ok) return q;
        if (!mpz_divisible_p(A.get_mpz_t(), B.get_mpz_t())) throw MathError("inexact polynomial division");
    }
    throw MathError("exact division failed to converge");
}

// ---------------------------------------------------------------- F_p

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t p) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

uint64_t powmod(uint64_t a, uint64_t e, uint64_t p) {
    uint64_t r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mulmod(r, a, p);
        a = mulmod(a, a, p);
        e >>= 1;
    }
    return r;
}

uint64_t invmod(uint64_t a, uint64_t p) {
    a %= p;
    if (a == 0) throw MathError("inverse of zero mod p");
    return powmod(a, p - 2, p);
}

bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (uint64_t a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
        uint64_t x = powmod(a % n, d, n);
        if (a % n == 0 || x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                comp = false;
                break;
            }
        }
        if (comp) return false;
    }
    return true;
}

uint64_t mod_of(const Z& z, uint64_t p) {
    return mpz_fdiv_ui(z.get_mpz_t(), p);
}

uint64_t mod_of(const Q& q, uint64_t p) {
    uint64_t d = mod_of(Z(q.get_den()), p);
    if (d == 0) throw PrimeRejected();
    return mulmod(mod_of(Z(q.get_num()), p), invmod(d, p), p);
}

FpPoly::FpPoly(uint64_t p, std::vector<uint64_t> c) : p_(p), c_(std::move(c)) {
    for (auto& x : c_) x %= p_;
    trim();
}

void FpPoly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

uint64_t FpPoly::eval(uint64_t x) const {
    uint64_t r = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
        r = mulmod(r, x, p_) + *it;
        if (r >= p_) r -= p_;
    }
    return r;
}

FpPoly FpPoly::scaled(uint64_t s) const {
    std::vector<uint64_t> d(c_);
    for (auto& x : d) x = mulmod(x, s, p_);
    return FpPoly(p_, std::move(d));
}

FpPoly FpPoly::monic() const {
    if (c_.empty()) return *this;
    return scaled(invmod(c_.back(), p_));
}

FpPoly operator+(const FpPoly& a, const FpPoly& b) {
    const uint64_t p = a.p_ ? a.p_ : b.p_;
    std::vector<uint64_t> d(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        uint64_t x = i < a.c_.size() ? a.c_[i] : 0, y = i < b.c_.size() ? b.c_[i] : 0;
        uint64_t s = x + y;
        d[i] = s >= p ? s - p : s;
    }
    return FpPoly(p, std::move(d));
}

FpPoly operator-(const FpPoly& a, const FpPoly& b) {
    const uint64_t p = a.p_ ? a.p_ : b.p_;
    std::vector<uint64_t> d(std::max(a.c_.size(), b.c_.size()), 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        uint64_t x = i < a.c_.size() ? a.c_[i] : 0, y = i < b.c_.size() ? b.c_[i] : 0;
        d[i] = x >= y ? x - y : x + p - y;
    }
    return FpPoly(p, std::move(d));
}

FpPoly operator*(const FpPoly& a, const FpPoly& b) {
    const uint64_t p = a.p_ ? a.p_ : b.p_;
    if (a.is_zero() || b.is_zero()) return FpPoly(p, {});
    std::vector<unsigned __int128> acc(a.c_.size() + b.c_.size() - 1, 0);
    std::vector<uint64_t> d(acc.size());
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) {
            acc[i + j] += static_cast<unsigned __int128>(a.c_[i]) * b.c_[j];
            acc[i + j] %= p;
        }
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<uint64_t>(acc[i]);
    return FpPoly(p, std::move(d));
}

std::pair<FpPoly, FpPoly> divmod(const FpPoly& a, const FpPoly& b) {
    const uint64_t p = a.prime() ? a.prime() : b.prime();
    if (b.is_zero()) throw MathError("polynomial division by zero");
    if (a.degree() < b.degree()) return {FpPoly(p, {}), a};
    std::vector<uint64_t> r(a.coeffs());
    const int db = b.degree();
    std::vector<uint64_t> q(a.degree() - db + 1, 0);
    uint64_t il = invmod(b.lead(), p);
    for (int i = a.degree() - db; i >= 0; --i) {
        uint64_t c = mulmod(r[i + db], il, p);
        q[i] = c;
        if (!c) continue;
        for (int j = 0; j <= db; ++j) {
            uint64_t m = mulmod(c, b.coeffs()[j], p);
            r[i + j] = r[i + j] >= m ? r[i + j] - m : r[i + j] + p - m;
        }
    }
    r.resize(db);
    return {FpPoly(p, std::move(q)), FpPoly(p, std::move(r))};
}

FpPoly operator%(const FpPoly& a, const FpPoly& b) { return divmod(a, b).second; }

FpPoly gcd(const FpPoly& a, const FpPoly& b) {
    FpPoly x = a, y = b;
    while (!y.is_zero()) {
        FpPoly r = x % y;
        x = std::move(y);
        y = std::move(r);
    }
    return x.monic();
}

FpPoly reduce(const ZPoly& a, uint64_t p) {
    std::vector<uint64_t> d(a.coeffs().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = mod_of(a.coeffs()[i], p);
    return FpPoly(p, std::move(d));
}

FpPoly reduce(const QPoly& a, uint64_t p) {
    std::vector<uint64_t> d(a.coeffs().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = mod_of(a.coeffs()[i], p);
    return FpPoly(p, std::move(d));
}

// ---------------------------------------------------------------- RationalFunction

RationalFunction ratfun_normalize(const QPoly& num, const QPoly& den) {
    if (den.is_zero()) throw MathError("division by zero in function field");
    RationalFunction r;
    if (num.is_zero()) return r;
    QPoly g = gcd(num, den);
    QPoly n = divmod(num, g).first, d = divmod(den, g).first;
    Q l = d.lead();
    r.num_ = (1 / l) * n;
    r.den_ = d.monic();
    return r;
}

int RationalFunction::degree() const { return std::max(num_.degree(), den_.degree()); }

std::string RationalFunction::str() const {
    if (den_.degree() == 0) return num_.str();
    return "(" + num_.str() + ")/(" + den_.str() + ")";
}

RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    return ratfun_normalize(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
}
RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) {
    return ratfun_normalize(a.num() * b.den() - b.num() * a.den(), a.den() * b.den());
}
RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    return ratfun_normalize(a.num() * b.num(), a.den() * b.den());
}
RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
    return ratfun_normalize(a.num() * b.den(), a.den() * b.num());
}

FpRationalFunction reduce_mod_p(const RationalFunction& r, uint64_t p) {
    FpPoly n = reduce(r.num(), p), d = reduce(r.den(), p);
    if (n.degree() != r.num().degree() || d.degree() != r.den().degree()) throw PrimeRejected();
    uint64_t il = invmod(d.lead(), p);
    return {n.scaled(il), d.scaled(il)};
}

// ---------------------------------------------------------------- AlgebraicReal

namespace {

std::vector<QPoly> sturm_sequence(const QPoly& p) {
    std::vector<QPoly> s{p, p.derivative()};
    while (!s.back().is_zero()) {
        QPoly r = s[s.size() - 2] % s.back();
        if (r.is_zero()) break;
        s.push_back(-r);
    }
    if (s.back().is_zero()) s.pop_back();
    return s;
}

int variations(const std::vector<QPoly>& s, const Q& x) {
    int v = 0, last = 0;
    for (auto& f : s) {
        int sg = sgn(f.eval(x));
        if (sg == 0) continue;
        if (last && sg != last) ++v;
        last = sg;
    }
    return v;
}

Q cauchy_bound(const QPoly& p) {
    Q m = 0;
    for (int i = 0; i < p.degree(); ++i) m = std::max(m, Q(abs(p.coeffs()[i] / p.lead())));
    return m + 1;
}

}  // namespace

int sturm_count(const QPoly& p, const Q& a, const Q& b) {
    if (p.degree() <= 0) return 0;
    auto s = sturm_sequence(p);
    return variations(s, a) - variations(s, b);
}

AlgebraicReal::AlgebraicReal(QPoly minpoly, Q lo, Q hi) : m_(std::move(minpoly)), lo_(lo), hi_(hi) {
    if (m_.degree() < 1) throw MathError("algebraic number needs a nonconstant polynomial");
    if (lo_ > hi_) throw MathError("empty isolating interval");
    if (lo_ == hi_) {
        if (sgn(m_.eval(lo_)) != 0) throw MathError("degenerate interval is not a root");
        return;
    }
    if (m_.degree() == 1) {
        Q r = -m_.coeffs()[0] / m_.coeffs()[1];
        if (r <= lo_ || r >= hi_) throw MathError("interval does not contain the root");
        return;
    }
    if (sgn(m_.eval(lo_)) == 0 || sgn(m_.eval(hi_)) == 0 || sturm_count(m_, lo_, hi_) != 1)
        throw MathError("interval does not isolate exactly one root");
}

AlgebraicReal AlgebraicReal::rational(const Q& v) { return AlgebraicReal(QPoly{-v, Q(1)}, v, v); }

AlgebraicReal AlgebraicReal::refine(const Q& eps) const {
    if (m_.degree() == 1) {
        Q r = -m_.coeffs()[0] / m_.coeffs()[1];
        return AlgebraicReal(m_, r, r);
    }
    Q lo = lo_, hi = hi_;
    if (lo == hi) return *this;
    int slo = sgn(m_.eval(lo));
    while (hi - lo > eps) {
        Q mid = (lo + hi) / 2;
        int s = sgn(m_.eval(mid));
        if (s == 0) return AlgebraicReal(m_, mid, mid);
        if (s == slo)
            lo = mid;
        else
            hi = mid;
    }
    return AlgebraicReal(m_, lo, hi);
}

Interval refine(const AlgebraicReal& a, const Q& eps) { return a.refine(eps).interval(); }

double AlgebraicReal::to_double() const {
    Q scale = std::max(Q(1), Q(abs(lo_)));
    Q eps = scale / Q(Z(1) << 62);
    AlgebraicReal r = refine(eps);
    return Q((r.lo() + r.hi()) / 2).get_d();
}

int AlgebraicReal::sign_of(const QPoly& p) const {
    if (p.is_zero()) return 0;
    if (lo_ == hi_) return sgn(p.eval(lo_));
    QPoly g = gcd(p, m_);
    if (g.degree() >= 1) {
        // g | m, so g has a root in the interval iff it vanishes at this number
        if (sgn(g.eval(lo_)) * sgn(g.eval(hi_)) < 0 || sturm_count(g, lo_, hi_) > 0) return 0;
    }
    AlgebraicReal cur = *this;
    for (int it = 0; it < 4000; ++it) {
        if (cur.is_exact_point()) return sgn(p.eval(cur.lo()));
        if (sgn(p.eval(cur.lo())) != 0 && sturm_count(p, cur.lo(), cur.hi()) == 0) return sgn(p.eval(cur.lo()));
        cur = cur.refine(cur.interval().width() / 2);
    }
    throw MathError("sign determination did not terminate");
}

std::vector<Q> rational_roots(const QPoly& p) {
    std::vector<Q> out;
    if (p.is_zero()) return out;
    // clear denominators
    Z l = 1;
    for (auto& c : p.coeffs()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
    std::vector<Z> z(p.coeffs().size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = Q(p.coeffs()[i] * l).get_num();
    std::size_t low = 0;
    while (low < z.size() && sgn(z[low]) == 0) ++low;
    if (low > 0) out.push_back(0);
    if (low + 1 >= z.size()) return out;
    auto divisors = [](Z n) {
        n = abs(n);
        if (n > Z("1000000000000")) throw MathError("rational root search: coefficient too large");
        std::vector<Z> d;
        for (Z i = 1; i * i <= n; ++i)
            if (n % i == 0) {
                d.push_back(i);
                if (i * i != n) d.push_back(n / i);
            }
        return d;
    };
    auto dp = divisors(z[low]), dq = divisors(z.back());
    for (auto& a : dp)
        for (auto& b : dq)
            for (int s : {1, -1}) {
                Q r(Z(s * a), b);
                r.canonicalize();
                if (sgn(p.eval(r)) == 0 && std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
            }
    std::sort(out.begin(), out.end());
    return out;
}

QPoly strip_rational_roots(const QPoly& p) {
    QPoly q = p;
    for (auto& r : rational_roots(p)) {
        QPoly lin{-r, Q(1)};
        while (q.degree() >= 1 && (q % lin).is_zero()) q = divmod(q, lin).first;
    }
    return q.monic();
}

std::vector<AlgebraicReal> real_roots(const QPoly& p) {
    std::vector<AlgebraicReal> out;
    if (p.degree() < 1) return out;
    QPoly sf = squarefree_part(p);
    auto rats = rational_roots(sf);
    QPoly irr = sf;
    for (auto& r : rats) irr = divmod(irr, QPoly{-r, Q(1)}).first;
    for (auto& r : rats) out.push_back(AlgebraicReal::rational(r));
    if (irr.degree() >= 1) {
        irr = irr.monic();
        Q B = cauchy_bound(irr);
        std::vector<std::pair<Q, Q>> stack{{-B, B}};
        while (!stack.empty()) {
            auto [a, b] = stack.back();
            stack.pop_back();
            int c = sturm_count(irr, a, b);
            if (c == 0) continue;
            if (c == 1 && sgn(irr.eval(b)) != 0 && sgn(irr.eval(a)) != 0) {
                out.emplace_back(irr, a, b);
                continue;
            }
            Q m = (a + b) / 2;
            // irrational roots never hit a rational midpoint
            stack.push_back({a, m});
            stack.push_back({m, b});
        }
    }
    std::vector<std::pair<double, std::size_t>> key;
    for (std::size_t i = 0; i < out.size(); ++i) key.emplace_back(out[i].to_double(), i);
    std::sort(key.begin(), key.end());
    std::vector<AlgebraicReal> sorted;
    for (auto& k : key) sorted.push_back(out[k.second]);
    return sorted;
    return out;
}

// ---------------------------------------------------------------- NumberField

NumberField::NumberField(AlgebraicReal alpha) : alpha_(std::move(alpha)) {}

QNum::QNum(std::shared_ptr<const NumberField> K, const Q& v) : K_(std::move(K)), r_(QPoly::constant(v)) {
    if (!K_) K_ = rational_field();
}

QNum::QNum(std::shared_ptr<const NumberField> K, QPoly rep) : K_(std::move(K)) {
    if (!K_) K_ = rational_field();
    r_ = (rep.degree() >= K_->degree()) ? rep % K_->modulus() : std::move(rep);
}

std::shared_ptr<const NumberField> rational_field() {
    static const auto K = std::make_shared<const NumberField>(AlgebraicReal::rational(0));
    return K;
}

QNum QNum::gen(std::shared_ptr<const NumberField> K) {
    auto k = K;
    return QNum(std::move(k), QPoly{Q(0), Q(1)});
}

static std::shared_ptr<const NumberField> pick(const QNum& a, const QNum& b) {
    if (!a.field()) return b.field();
    if (!b.field()) return a.field();
    if (a.field() == b.field() || a.field()->modulus() == b.field()->modulus()) return a.field();
    // degree-1 fields only hold rationals and embed in any field
    if (a.field()->degree() <= 1 && a.rep().degree() <= 0) return b.field();
    if (b.field()->degree() <= 1 && b.rep().degree() <= 0) return a.field();
    throw MathError("mixing elements of different number fields");
}

QNum operator+(const QNum& a, const QNum& b) { return QNum(pick(a, b), a.r_ + b.r_); }
QNum operator-(const QNum& a, const QNum& b) { return QNum(pick(a, b), a.r_ - b.r_); }
QNum operator*(const QNum& a, const QNum& b) { return QNum(pick(a, b), a.r_ * b.r_); }
QNum operator*(const Q& s, const QNum& a) { return QNum(a.K_, s * a.r_); }
QNum QNum::operator-() const { return QNum(K_, -r_); }

QNum QNum::inv() const {
    if (r_.is_zero()) throw MathError("division by zero in number field");
    auto e = extended_gcd(r_, K_->modulus());
    if (e.g.degree() != 0) throw MathError("modulus is not irreducible");
    return QNum(K_, e.s);
}

int QNum::sign() const { return K_->generator().sign_of(r_); }

double QNum::to_double() const {
    if (r_.degree() <= 0) return r_.coeff(0).get_d();
    const auto& g = K_->generator();
    AlgebraicReal fine = g.refine(Q(1, Z(1) << 80));
    Q mid = (fine.lo() + fine.hi()) / 2;
    return r_.eval(mid).get_d();
}

std::string QNum::str() const {
    std::string s = r_.str('a');
    return s;
}

// ---------------------------------------------------------------- numeric roots

namespace {

long double to_ld(const Q& q) {
    long en, ed;
    double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
    double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
    return std::ldexp(static_cast<long double>(mn) / md, static_cast<int>(en - ed));
}

}  // namespace

std::vector<std::complex<double>> complex_roots(const QPoly& p) {
    using C = std::complex<long double>;
    std::vector<std::complex<double>> out;
    if (p.degree() < 1) return out;
    std::size_t low = 0;
    while (sgn(p.coeffs()[low]) == 0) {
        out.emplace_back(0.0, 0.0);
        ++low;
    }
    const int n = p.degree() - static_cast<int>(low);
    if (n == 0) return out;
    std::vector<long double> a(n + 1);
    for (int i = 0; i <= n; ++i) a[i] = to_ld(p.coeffs()[i + low]);
    const long double an = a[n];
    for (auto& x : a) x /= an;
    // Fujiwara-type radius for the starting circle
    long double R = 0;
    for (int i = 0; i < n; ++i) R = std::max(R, std::pow(std::fabs(a[i]), 1.0L / (n - i)));
    R = std::max(R, 1e-3L);
    std::vector<C> z(n);
    for (int k = 0; k < n; ++k) {
        long double th = 2 * M_PI * (k + 0.25L) / n + 0.4L;
        z[k] = std::polar(R, th);
    }
    auto evalpd = [&](C x, C& pv, C& dv) {
        pv = a[n];
        dv = 0;
        for (int i = n - 1; i >= 0; --i) {
            dv = dv * x + pv;
            pv = pv * x + a[i];
        }
    };
    for (int it = 0; it < 2000; ++it) {
        long double maxstep = 0;
        for (int k = 0; k < n; ++k) {
            C pv, dv;
            evalpd(z[k], pv, dv);
            if (std::abs(pv) == 0) continue;
            C ratio = pv / dv;
            C s = 0;
            for (int j = 0; j < n; ++j)
                if (j != k) s += 1.0L / (z[k] - z[j]);
            C w = ratio / (1.0L - ratio * s);
            z[k] -= w;
            maxstep = std::max(maxstep, std::abs(w) / std::max(1.0L, std::abs(z[k])));
        }
        if (maxstep < 1e-18L) break;
    }
    for (auto& x : z) out.emplace_back(static_cast<double>(x.real()), static_cast<double>(x.imag()));
    return out;
}

std::complex<double> polish_root(const QPoly& p, std::complex<double> z0, int bits) {
    if (p.degree() < 1) return z0;
    std::vector<mpf_class> c;
    c.reserve(p.coeffs().size());
    for (auto& q : p.coeffs()) c.emplace_back(q, bits);
    mpf_class xr(z0.real(), bits), xi(z0.imag(), bits);
    const int n = p.degree();
    for (int it = 0; it < 100; ++it) {
        mpf_class pr(c[n], bits), pi(0, bits), dr(0, bits), di(0, bits);
        mpf_class tr(0, bits), ti(0, bits);
        for (int i = n - 1; i >= 0; --i) {
            tr = dr * xr - di * xi + pr;
            ti = dr * xi + di * xr + pi;
            dr = tr;
            di = ti;
            tr = pr * xr - pi * xi + c[i];
            ti = pr * xi + pi * xr;
            pr = tr;
            pi = ti;
        }
        mpf_class den = dr * dr + di * di;
        if (den == 0) break;
        mpf_class sr = (pr * dr + pi * di) / den;
        mpf_class si = (pi * dr - pr * di) / den;
        xr -= sr;
        xi -= si;
        mpf_class mag = abs(xr) + abs(xi) + 1;
        if (abs(sr) + abs(si) < mag * mpf_class(std::ldexp(1.0, -(bits - 16)), bits)) break;
    }
    return {xr.get_d(), xi.get_d()};
}

namespace {

struct MpC {
    mpf_class re, im;
};

MpC mpc_mul(const MpC& a, const MpC& b, int bits) {
    MpC r{mpf_class(0, bits), mpf_class(0, bits)};
    r.re = a.re * b.re - a.im * b.im;
    r.im = a.re * b.im + a.im * b.re;
    return r;
}

MpC mpc_div(const MpC& a, const MpC& b, int bits) {
    mpf_class den(b.re * b.re + b.im * b.im, bits);
    MpC r{mpf_class(0, bits), mpf_class(0, bits)};
    r.re = (a.re * b.re + a.im * b.im) / den;
    r.im = (a.im * b.re - a.re * b.im) / den;
    return r;
}

}  // namespace

std::vector<std::complex<double>> refine_roots(const QPoly& p, const std::vector<std::complex<double>>& start,
                                               int bits) {
    const int n = p.degree();
    if (n < 1 || static_cast<int>(start.size()) != n) return start;
    std::vector<mpf_class> c;
    for (auto& q : p.coeffs()) c.emplace_back(q, bits);
    std::vector<MpC> z;
    for (auto& s : start) z.push_back({mpf_class(s.real(), bits), mpf_class(s.imag(), bits)});
    // spread coincident starts so the Aberth sums stay finite
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < k; ++j)
            if (z[k].re == z[j].re && z[k].im == z[j].im) z[k].im += mpf_class(1e-9 * (k + 1), bits);
    mpf_class tol(std::ldexp(1.0, -(bits - 24)), bits);
    for (int it = 0; it < 500; ++it) {
        bool moved = false;
        for (int k = 0; k < n; ++k) {
            MpC pv{mpf_class(c[n], bits), mpf_class(0, bits)}, dv{mpf_class(0, bits), mpf_class(0, bits)};
            for (int i = n - 1; i >= 0; --i) {
                MpC t = mpc_mul(dv, z[k], bits);
                dv.re = t.re + pv.re;
                dv.im = t.im + pv.im;
                t = mpc_mul(pv, z[k], bits);
                pv.re = t.re + c[i];
                pv.im = t.im;
            }
            if (sgn(pv.re) == 0 && sgn(pv.im) == 0) continue;
            MpC ratio = mpc_div(pv, dv, bits);
            MpC sum{mpf_class(0, bits), mpf_class(0, bits)};
            for (int j = 0; j < n; ++j) {
                if (j == k) continue;
                MpC d{mpf_class(z[k].re - z[j].re, bits), mpf_class(z[k].im - z[j].im, bits)};
                MpC one{mpf_class(1, bits), mpf_class(0, bits)};
                MpC inv = mpc_div(one, d, bits);
                sum.re += inv.re;
                sum.im += inv.im;
            }
            MpC rs = mpc_mul(ratio, sum, bits);
            MpC den{mpf_class(1 - rs.re, bits), mpf_class(-rs.im, bits)};
            MpC w = mpc_div(ratio, den, bits);
            z[k].re -= w.re;
            z[k].im -= w.im;
            mpf_class mag = abs(z[k].re) + abs(z[k].im) + 1;
            if (abs(w.re) + abs(w.im) > tol * mag) moved = true;
        }
        if (!moved) break;
    }
    std::vector<std::complex<double>> out;
    for (auto& x : z) out.emplace_back(x.re.get_d(), x.im.get_d());
    return out;
}

// ---------------------------------------------------------------- modular gcd

FpPoly delta_gcd(FpPoly a, FpPoly b, const FpPoly& delta) {
    const uint64_t p = delta.prime() ? delta.prime() : a.prime();
    if (delta.is_zero()) return gcd(a, b);
    FpPoly g(p, {1});
    for (int guard = 0; guard < 4096; ++guard) {
        if (a.is_zero() && b.is_zero()) break;
        FpPoly h = a.is_zero() ? delta : gcd(delta, a % delta);
        if (h.degree() > 0 && !b.is_zero()) h = gcd(h, b % h);
        if (h.degree() <= 0) break;
        g = g * h;
        if (!a.is_zero()) a = divmod(a, h).first;
        if (!b.is_zero()) b = divmod(b, h).first;
    }
    return g.monic();
}

namespace {

// r/m -> n/d with |n|, |d| < sqrt(m/2)
bool rational_reconstruct(const Z& r, const Z& m, Q& out) {
    Z bound;
    mpz_sqrt(bound.get_mpz_t(), Z(m / 2).get_mpz_t());
    Z r0 = m, r1 = r, s0 = 0, s1 = 1;
    while (r1 > bound) {
        Z q = r0 / r1;
        Z t = r0 - q * r1;
        r0 = r1;
        r1 = t;
        t = s0 - q * s1;
        s0 = s1;
        s1 = t;
    }
    if (abs(s1) > bound || s1 == 0) return false;
    if (gcd(r1, s1) != 1) return false;
    out = Q(r1, s1);
    out.canonicalize();
    return true;
}

}  // namespace

ZPoly pair_gcd(const ZPoly& a, const ZPoly& b, const ZPoly& delta) {
    if (a.is_zero()) return b.is_zero() ? ZPoly::constant(1) : b.primitive();
    if (b.is_zero()) return a.primitive();
    if (a.degree() == 0 || b.degree() == 0) return ZPoly::constant(1);
    static const std::vector<uint64_t> primes = ntt_primes(96);
    int best = -1;
    std::vector<std::pair<uint64_t, FpPoly>> images;
    QPoly last;
    for (uint64_t p : primes) {
        if (mod_of(a.lead(), p) == 0 || mod_of(b.lead(), p) == 0) continue;
        FpPoly dp = reduce(delta, p);
        if (!delta.is_zero() && dp.is_zero()) continue;
        FpPoly g = delta_gcd(reduce(a, p), reduce(b, p), dp);
        if (g.degree() == 0) return ZPoly::constant(1);
        if (best >= 0 && g.degree() > best) continue;
        if (g.degree() < best || best < 0) {
            images.clear();
            best = g.degree();
            last = QPoly();
        }
        images.emplace_back(p, g);
        // CRT of the monic images
        Z M = 1;
        std::vector<Z> res(best + 1, 0);
        for (auto& [q, img] : images) {
            Z Mq = M * Z(static_cast<unsigned long>(q));
            Z qz(static_cast<unsigned long>(q));
            Z inv;
            Z Mmod = M % qz;
            mpz_invert(inv.get_mpz_t(), Mmod.get_mpz_t(), qz.get_mpz_t());
            for (int d = 0; d <= best; ++d) {
                Z r = res[d] % qz;
                Z diff = (Z(static_cast<unsigned long>(img.coeffs()[d])) - r) % qz;
                if (diff < 0) diff += qz;
                Z t = (diff * inv) % qz;
                res[d] += M * t;
            }
            M = Mq;
        }
        std::vector<Q> qc(best + 1);
        bool ok = true;
        for (int d = 0; d <= best && ok; ++d) ok = rational_reconstruct(res[d], M, qc[d]);
        if (!ok) continue;
        QPoly cand(qc);
        if (!(cand == last)) {
            last = cand;
            continue;
        }
        Z l = 1;
        for (auto& x : cand.coeffs()) l = lcm(l, Z(x.get_den()));
        ZPoly gz = ZPoly::from_q_scaled(cand, l).primitive();
        ZPoly qa, qb;
        if (try_divexact(a, gz, qa) && try_divexact(b, gz, qb)) return gz;
    }
    throw MathError("modular gcd did not stabilize");
}

}  // namespace heightlab
