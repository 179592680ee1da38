#include "heightlab/shadow.hpp"

#include <algorithm>
#include <stdexcept>

namespace heightlab {

namespace {

void trim(std::vector<uint64_t>& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

long deg(const std::vector<uint64_t>& a) { return static_cast<long>(a.size()) - 1; }

FpPoly to_fp(const std::vector<uint64_t>& a, const Mont& M) {
    std::vector<uint64_t> c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = M.from(a[i]);
    return FpPoly(M.p, std::move(c));
}

std::vector<uint64_t> from_fp(const FpPoly& a, const Mont& M) {
    std::vector<uint64_t> c(a.coeffs().size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = M.to(a.coeffs()[i]);
    return c;
}

std::vector<uint64_t> reduce_mont(const ZPoly& z, const Mont& M) {
    std::vector<uint64_t> c(z.coeffs().size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = M.to(mod_of(z.coeffs()[i], M.p));
    trim(c);
    return c;
}

int ceil_log2(long n) {
    int k = 0;
    while ((1L << k) < n) ++k;
    return k;
}

}  // namespace

std::vector<uint64_t> shadow_rem(const std::vector<uint64_t>& a, const std::vector<uint64_t>& m, const Mont& M) {
    const long dm = deg(m);
    if (dm <= 0) return {};
    if (deg(a) < dm) return a;
    // Horner sweep: r <- r*t + a_j mod m, r kept with dm coefficients
    std::vector<uint64_t> r(dm, 0);
    for (long j = deg(a); j >= 0; --j) {
        uint64_t top = r[dm - 1];
        for (long k = dm - 1; k > 0; --k) r[k] = M.sub(r[k - 1], M.mul(top, m[k]));
        r[0] = M.sub(a[j], M.mul(top, m[0]));
    }
    trim(r);
    return r;
}

std::vector<uint64_t> shadow_divexact(const std::vector<uint64_t>& a, const std::vector<uint64_t>& m, const Mont& M) {
    const long dm = deg(m), da = deg(a);
    if (da < dm) return {};
    std::vector<uint64_t> r(a);
    std::vector<uint64_t> q(da - dm + 1);
    for (long i = da - dm; i >= 0; --i) {
        uint64_t c = r[i + dm];
        q[i] = c;
        if (c == 0) continue;
        for (long k = 0; k < dm; ++k) r[i + k] = M.sub(r[i + k], M.mul(c, m[k]));
    }
    for (long k = 0; k < dm; ++k)
        if (r[k] != 0) throw MathError("shadow division is not exact");
    return q;
}

ShadowOrbit::ShadowOrbit(const SurfaceFamily& fam, uint64_t prime) : fam_(fam), ntt_(prime) {
    const Mont& M = ntt_.mont();
    e_ = fam.tdeg();
    for (int k = 0; k < 27; ++k) {
        coef_[k] = reduce_mont(fam.coeffs[k], M);
        if (deg(coef_[k]) != fam.coeffs[k].degree()) throw PrimeRejected();
    }
    for (int i = 0; i < 3; ++i) {
        const ZPoly& d = cached_delta(fam, i);
        if (d.is_zero()) continue;
        FpPoly dp = reduce(d, prime);
        if (dp.is_zero()) throw PrimeRejected();
        delta_[i] = from_fp(dp.monic(), M);
    }
}

void ShadowOrbit::load(const MarkedSection& s) {
    const Mont& M = ntt_.mont();
    for (int i = 0; i < 3; ++i) {
        p_[i] = reduce_mont(s.c[i].p, M);
        q_[i] = reduce_mont(s.c[i].q, M);
        if (deg(p_[i]) != s.c[i].p.degree() || deg(q_[i]) != s.c[i].q.degree()) throw PrimeRejected();
    }
}

Degrees ShadowOrbit::degrees() const {
    Degrees d;
    for (int i = 0; i < 3; ++i) d[i] = std::max<long>(std::max(deg(p_[i]), deg(q_[i])), 0);
    return d;
}

void ShadowOrbit::apply(int i1) {
    const Mont& M = ntt_.mont();
    const int i = i1 - 1, j = std::min((i + 1) % 3, (i + 2) % 3), k = 3 - i - j;
    const Degrees d = degrees();
    const long bound = std::max<long>(e_ + 2 * d[j] + 2 * d[k] - d[i], 0);
    const int logm = std::max(ceil_log2(bound + 1), 1);
    if (logm > kNttMaxLog) throw std::length_error("shadow degree exceeds transform size");
    const std::size_t n = std::size_t(1) << logm;

    int emap[3][3][3];  // [ei][ej][ek] -> coefficient index
    for (int ei = 0; ei < 3; ++ei)
        for (int ej = 0; ej < 3; ++ej)
            for (int ek = 0; ek < 3; ++ek) {
                int ex[3];
                ex[i] = ei;
                ex[j] = ej;
                ex[k] = ek;
                emap[ei][ej][ek] = SurfaceFamily::index(ex[0], ex[1], ex[2]);
            }

    std::vector<uint64_t> X0, X1;
    for (uint64_t shift = 3;; shift += 2) {
        if (shift > 41) throw MathError("no admissible coset for shadow evaluation");
        const uint64_t s = M.to(shift);
        X0 = ntt_.evaluate_coset(p_[i], s, logm);
        X1 = ntt_.evaluate_coset(q_[i], s, logm);
        std::vector<uint64_t> Y0 = ntt_.evaluate_coset(p_[j], s, logm);
        std::vector<uint64_t> Y1 = ntt_.evaluate_coset(q_[j], s, logm);
        std::vector<uint64_t> W0 = ntt_.evaluate_coset(p_[k], s, logm);
        std::vector<uint64_t> W1 = ntt_.evaluate_coset(q_[k], s, logm);
        const uint64_t w = ntt_.root(logm);
        uint64_t t = s;
        bool bad = false;
        uint64_t cv[27];
        for (std::size_t m = 0; m < n; ++m, t = M.mul(t, w)) {
            for (int c = 0; c < 27; ++c) {
                const auto& cc = coef_[c];
                uint64_t v = 0;
                for (long r = deg(cc); r >= 0; --r) v = M.add(M.mul(v, t), cc[r]);
                cv[c] = v;
            }
            const uint64_t y0 = Y0[m], y1 = Y1[m], z0 = W0[m], z1 = W1[m];
            const uint64_t ym[3] = {M.mul(y1, y1), M.mul(y0, y1), M.mul(y0, y0)};
            const uint64_t zm[3] = {M.mul(z1, z1), M.mul(z0, z1), M.mul(z0, z0)};
            uint64_t qv[3] = {0, 0, 0};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    uint64_t yz = M.mul(ym[a], zm[b]);
                    for (int ei = 0; ei < 3; ++ei) {
                        uint64_t c = cv[emap[ei][a][b]];
                        if (c) qv[ei] = M.add(qv[ei], M.mul(c, yz));
                    }
                }
            const uint64_t A = qv[2], B = qv[1], C = qv[0];
            const uint64_t x0 = X0[m], x1 = X1[m];
            uint64_t cn, an, den;
            if (x0 != 0 && x1 != 0) {
                cn = M.mul(C, x1);
                an = M.mul(A, x0);
                den = M.mul(x0, x1);
            } else if (x0 == 0 && x1 != 0) {
                cn = M.sub(0, B);
                an = A;
                den = x1;
            } else if (x1 == 0 && x0 != 0) {
                cn = C;
                an = M.sub(0, B);
                den = x0;
            } else {
                bad = true;
                break;
            }
            X0[m] = cn;
            X1[m] = an;
            Y0[m] = den;
        }
        if (bad) continue;
        // batched inversion of the denominators in Y0
        const std::size_t blk = 4096;
        std::vector<uint64_t> pre(blk);
        for (std::size_t b0 = 0; b0 < n; b0 += blk) {
            const std::size_t len = std::min(blk, n - b0);
            uint64_t acc = M.one();
            for (std::size_t r = 0; r < len; ++r) {
                pre[r] = acc;
                acc = M.mul(acc, Y0[b0 + r]);
            }
            uint64_t inv = M.inv(acc);
            for (std::size_t r = len; r-- > 0;) {
                uint64_t di = M.mul(inv, pre[r]);
                inv = M.mul(inv, Y0[b0 + r]);
                X0[b0 + r] = M.mul(X0[b0 + r], di);
                X1[b0 + r] = M.mul(X1[b0 + r], di);
            }
        }
        Y0.clear();
        Y0.shrink_to_fit();
        Y1.clear();
        Y1.shrink_to_fit();
        W0.clear();
        W0.shrink_to_fit();
        W1.clear();
        W1.shrink_to_fit();
        X0 = ntt_.interpolate_coset(std::move(X0), s, logm);
        X1 = ntt_.interpolate_coset(std::move(X1), s, logm);
        break;
    }
    trim(X0);
    trim(X1);
    if (deg(X0) > bound || deg(X1) > bound) throw MathError("shadow interpolation exceeded the degree bound");
    if (X0.empty() && X1.empty()) throw DegenerateSection();
    // remove the common factor supported on Delta_i
    const auto& D = delta_[i];
    if (!D.empty() && deg(D) > 0 && deg(X0) > 0 && deg(X1) > 0) {
        for (int guard = 0; guard < 4096; ++guard) {
            FpPoly h = gcd(to_fp(D, M), to_fp(shadow_rem(X0, D, M), M));
            if (h.degree() <= 0) break;
            auto hm = from_fp(h.monic(), M);
            h = gcd(h, to_fp(shadow_rem(X1, hm, M), M));
            if (h.degree() <= 0) break;
            hm = from_fp(h.monic(), M);
            X0 = shadow_divexact(X0, hm, M);
            X1 = shadow_divexact(X1, hm, M);
            if (deg(X0) <= 0 || deg(X1) <= 0) break;
        }
    } else if (deg(X0) > 0 && deg(X1) > 0 && (D.empty() || deg(D) <= 0)) {
        if (cached_delta(fam_, i).is_zero()) throw MathError("delta vanishes identically; shadow gcd unavailable");
    }
    p_[i] = std::move(X0);
    q_[i] = std::move(X1);
}

}  // namespace heightlab
