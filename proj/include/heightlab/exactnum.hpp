#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace heightlab {

using Z = mpz_class;
using Q = mpq_class;

struct MathError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense polynomial over Q, lowest degree first, no trailing zeros.
class QPoly {
public:
    QPoly() = default;
    explicit QPoly(std::vector<Q> c);
    QPoly(std::initializer_list<Q> c) : QPoly(std::vector<Q>(c)) {}
    static QPoly constant(const Q& c);
    static QPoly monomial(const Q& c, std::size_t k);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Q>& coeffs() const { return c_; }
    Q coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Q(0); }
    const Q& lead() const;

    Q eval(const Q& x) const;
    double eval(double x) const;
    std::complex<double> eval(std::complex<double> x) const;
    QPoly derivative() const;
    QPoly monic() const;
    std::string str(char var = 't') const;

    QPoly operator-() const;
    friend QPoly operator+(const QPoly& a, const QPoly& b);
    friend QPoly operator-(const QPoly& a, const QPoly& b);
    friend QPoly operator*(const QPoly& a, const QPoly& b);
    friend QPoly operator*(const Q& s, const QPoly& a);
    friend bool operator==(const QPoly& a, const QPoly& b) { return a.c_ == b.c_; }

private:
    void trim();
    std::vector<Q> c_;
};

std::pair<QPoly, QPoly> divmod(const QPoly& a, const QPoly& b);
QPoly operator%(const QPoly& a, const QPoly& b);
// Monic gcd; gcd(0,0) = 0.
QPoly gcd(const QPoly& a, const QPoly& b);
// Returns (g, s, t) with s*a + t*b = g monic.
struct ExtGcd {
    QPoly g, s, t;
};
ExtGcd extended_gcd(const QPoly& a, const QPoly& b);
QPoly squarefree_part(const QPoly& a);
// Exact square root if a is a square in Q[t].
bool poly_sqrt(const QPoly& a, QPoly& root);

// Dense polynomial over Z; used for exact section arithmetic.
class ZPoly {
public:
    ZPoly() = default;
    explicit ZPoly(std::vector<Z> c);
    static ZPoly constant(const Z& c);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Z>& coeffs() const { return c_; }
    std::vector<Z>& mut() { return c_; }
    Z coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Z(0); }
    const Z& lead() const;
    void trim();

    std::size_t max_bits() const;
    Z content() const;
    ZPoly primitive() const;
    uint64_t eval_mod(uint64_t x, uint64_t p) const;
    // value * den^deg at t = num/den
    Z eval_homog(const Z& num, const Z& den, int formal_degree) const;
    QPoly to_q() const;
    static ZPoly from_q_scaled(const QPoly& a, const Z& scale);
    std::string str(char var = 't') const;

    ZPoly operator-() const;
    friend ZPoly operator+(const ZPoly& a, const ZPoly& b);
    friend ZPoly operator-(const ZPoly& a, const ZPoly& b);
    friend ZPoly operator*(const ZPoly& a, const ZPoly& b);
    friend ZPoly operator*(const Z& s, const ZPoly& a);
    friend bool operator==(const ZPoly& a, const ZPoly& b) { return a.c_ == b.c_; }
    ZPoly& operator+=(const ZPoly& b);

private:
    std::vector<Z> c_;
};

ZPoly divexact_scalar(const ZPoly& a, const Z& s);
// a / b where b | a is known; Kronecker substitution for large inputs.
ZPoly divexact(const ZPoly& a, const ZPoly& b);
// Schoolbook division; false if b does not divide a in Z[t].
bool try_divexact(const ZPoly& a, const ZPoly& b, ZPoly& q);

// ---- prime fields ----

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t p);
uint64_t powmod(uint64_t a, uint64_t e, uint64_t p);
uint64_t invmod(uint64_t a, uint64_t p);
bool is_prime_u64(uint64_t n);
uint64_t mod_of(const Z& z, uint64_t p);
uint64_t mod_of(const Q& q, uint64_t p);  // throws MathError if p | den

class FpPoly {
public:
    FpPoly() = default;
    FpPoly(uint64_t p, std::vector<uint64_t> c);
    uint64_t prime() const { return p_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<uint64_t>& coeffs() const { return c_; }
    std::vector<uint64_t>& mut() { return c_; }
    uint64_t lead() const { return c_.back(); }
    void trim();
    uint64_t eval(uint64_t x) const;
    FpPoly monic() const;
    FpPoly scaled(uint64_t s) const;

    friend FpPoly operator+(const FpPoly& a, const FpPoly& b);
    friend FpPoly operator-(const FpPoly& a, const FpPoly& b);
    friend FpPoly operator*(const FpPoly& a, const FpPoly& b);
    friend bool operator==(const FpPoly& a, const FpPoly& b) { return a.p_ == b.p_ && a.c_ == b.c_; }

private:
    uint64_t p_ = 0;
    std::vector<uint64_t> c_;
};

std::pair<FpPoly, FpPoly> divmod(const FpPoly& a, const FpPoly& b);
FpPoly operator%(const FpPoly& a, const FpPoly& b);
FpPoly gcd(const FpPoly& a, const FpPoly& b);
FpPoly reduce(const ZPoly& a, uint64_t p);
FpPoly reduce(const QPoly& a, uint64_t p);  // throws MathError on a bad denominator

// ---- rational functions ----

struct PrimeRejected : MathError {
    PrimeRejected() : MathError("prime rejected") {}
};

class RationalFunction {
public:
    RationalFunction() : num_(), den_(QPoly::constant(1)) {}
    const QPoly& num() const { return num_; }
    const QPoly& den() const { return den_; }
    int degree() const;
    std::string str() const;
    friend RationalFunction ratfun_normalize(const QPoly& num, const QPoly& den);
    friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

private:
    QPoly num_, den_;
};

RationalFunction ratfun_normalize(const QPoly& num, const QPoly& den);
RationalFunction operator+(const RationalFunction& a, const RationalFunction& b);
RationalFunction operator-(const RationalFunction& a, const RationalFunction& b);
RationalFunction operator*(const RationalFunction& a, const RationalFunction& b);
RationalFunction operator/(const RationalFunction& a, const RationalFunction& b);

struct FpRationalFunction {
    FpPoly num, den;
};
FpRationalFunction reduce_mod_p(const RationalFunction& r, uint64_t p);

// ---- real algebraic numbers ----

struct Interval {
    Q lo, hi;
    Q width() const { return hi - lo; }
};

// Root of a squarefree polynomial isolated in (lo, hi), or exactly lo == hi.
class AlgebraicReal {
public:
    AlgebraicReal(QPoly minpoly, Q lo, Q hi);
    static AlgebraicReal rational(const Q& v);

    const QPoly& minimal_polynomial() const { return m_; }
    const Q& lo() const { return lo_; }
    const Q& hi() const { return hi_; }
    Interval interval() const { return {lo_, hi_}; }
    bool is_exact_point() const { return lo_ == hi_; }

    AlgebraicReal refine(const Q& eps) const;
    double to_double() const;
    // sign of p evaluated at this number
    int sign_of(const QPoly& p) const;

private:
    QPoly m_;
    Q lo_, hi_;
};

Interval refine(const AlgebraicReal& a, const Q& eps);
int sturm_count(const QPoly& p, const Q& a, const Q& b);  // roots in (a, b]
std::vector<AlgebraicReal> real_roots(const QPoly& p);   // increasing order
std::vector<Q> rational_roots(const QPoly& p);
// Removes rational linear factors; for degree <= 3 the rest is irreducible.
QPoly strip_rational_roots(const QPoly& p);

// Q(alpha) for an irreducible minimal polynomial with a fixed real embedding.
class NumberField {
public:
    explicit NumberField(AlgebraicReal alpha);
    const QPoly& modulus() const { return alpha_.minimal_polynomial(); }
    const AlgebraicReal& generator() const { return alpha_; }
    int degree() const { return modulus().degree(); }

private:
    AlgebraicReal alpha_;
};

// Q itself, as the field Q[x]/(x).
std::shared_ptr<const NumberField> rational_field();

class QNum {
public:
    QNum() = default;
    QNum(std::shared_ptr<const NumberField> K, const Q& v);
    QNum(std::shared_ptr<const NumberField> K, QPoly rep);
    static QNum gen(std::shared_ptr<const NumberField> K);

    const QPoly& rep() const { return r_; }
    const std::shared_ptr<const NumberField>& field() const { return K_; }
    bool is_zero() const { return r_.is_zero(); }
    int sign() const;
    double to_double() const;
    QNum inv() const;
    std::string str() const;

    friend QNum operator+(const QNum& a, const QNum& b);
    friend QNum operator-(const QNum& a, const QNum& b);
    friend QNum operator*(const QNum& a, const QNum& b);
    friend QNum operator/(const QNum& a, const QNum& b) { return a * b.inv(); }
    friend QNum operator*(const Q& s, const QNum& a);
    QNum operator-() const;
    friend bool operator==(const QNum& a, const QNum& b) { return (a - b).is_zero(); }

private:
    std::shared_ptr<const NumberField> K_;
    QPoly r_;
};

// gcd over Q of a and b (primitive integer polynomial), assuming it divides delta^infinity.
// delta = 0 gives the plain gcd.
ZPoly pair_gcd(const ZPoly& a, const ZPoly& b, const ZPoly& delta);
// Same restriction over F_p: the largest common factor of a and b dividing a power of delta.
FpPoly delta_gcd(FpPoly a, FpPoly b, const FpPoly& delta);

// ---- numeric helpers ----

// All complex roots (with multiplicity) by Aberth iteration.
std::vector<std::complex<double>> complex_roots(const QPoly& p);
// Newton polish against exact coefficients in GMP floating point.
std::complex<double> polish_root(const QPoly& p, std::complex<double> z, int bits = 256);
// Simultaneous Aberth refinement of all roots of a squarefree p in GMP floating point.
std::vector<std::complex<double>> refine_roots(const QPoly& p, const std::vector<std::complex<double>>& start,
                                               int bits = 512);

}  // namespace heightlab
