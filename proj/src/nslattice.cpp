#include "heightlab/nslattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace heightlab {

IntersectionForm IntersectionForm::wehler() {
    IntersectionForm f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) f.gram[i][j] = (i == j) ? 0 : 2;
    return f;
}

bool IntersectionForm::symmetric() const {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (gram[i][j] != gram[j][i]) return false;
    return true;
}

static Z det3(const IMat& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

Z IntersectionForm::det() const { return det3(gram); }

static QPoly charpoly3(const IMat& a) {
    Z tr = a[0][0] + a[1][1] + a[2][2];
    Z c1 = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) + (a[0][0] * a[2][2] - a[0][2] * a[2][0]) +
           (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
    return QPoly{Q(-det3(a)), Q(c1), Q(-tr), Q(1)};
}

std::pair<int, int> IntersectionForm::signature() const {
    // real-rooted characteristic polynomial: Descartes' rule is exact
    QPoly p = charpoly3(gram);
    auto changes = [](const QPoly& q) {
        int v = 0, last = 0;
        for (auto& c : q.coeffs()) {
            int s = sgn(c);
            if (!s) continue;
            if (last && s != last) ++v;
            last = s;
        }
        return v;
    };
    std::vector<Q> neg(p.coeffs());
    for (std::size_t i = 1; i < neg.size(); i += 2) neg[i] = -neg[i];
    return {changes(p), changes(QPoly(neg))};
}

Z IntersectionForm::pair(const IVec& a, const IVec& b) const {
    Z s = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += a[i] * gram[i][j] * b[j];
    return s;
}

LatticeMap LatticeMap::identity() {
    LatticeMap m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m.matrix[i][j] = (i == j) ? 1 : 0;
    return m;
}

LatticeMap LatticeMap::operator*(const LatticeMap& o) const {
    LatticeMap r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Z s = 0;
            for (int k = 0; k < 3; ++k) s += matrix[i][k] * o.matrix[k][j];
            r.matrix[i][j] = s;
        }
    return r;
}

IVec LatticeMap::apply(const IVec& v) const {
    IVec r;
    for (int i = 0; i < 3; ++i) r[i] = matrix[i][0] * v[0] + matrix[i][1] * v[1] + matrix[i][2] * v[2];
    return r;
}

Z LatticeMap::det() const { return det3(matrix); }

LatticeMap LatticeMap::inverse() const {
    Z d = det();
    if (d != 1 && d != -1) throw MathError("lattice map is not unimodular");
    const auto& a = matrix;
    LatticeMap r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
            r.matrix[i][j] = (a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]) * d;
        }
    return r;
}

bool LatticeMap::is_isometry(const IntersectionForm& f) const {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Z s = 0;
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) s += matrix[k][i] * f.gram[k][l] * matrix[l][j];
            if (s != f.gram[i][j]) return false;
        }
    return true;
}

LatticeMap wehler_involution(int i) {
    if (i < 1 || i > 3) throw MathError("involution index must be 1, 2 or 3");
    LatticeMap m = LatticeMap::identity();
    const int k = i - 1;
    for (int r = 0; r < 3; ++r) m.matrix[r][k] = (r == k) ? -1 : 2;
    return m;
}

std::vector<LatticeMap> wehler_involutions() {
    return {wehler_involution(1), wehler_involution(2), wehler_involution(3)};
}

ComposedMap compose_word(const std::vector<LatticeMap>& involutions, const std::vector<int>& word) {
    ComposedMap out{LatticeMap::identity(), false};
    if (word.empty()) {
        out.identity_warning = true;
        return out;
    }
    for (int w : word) {
        if (w < 1 || w > static_cast<int>(involutions.size())) throw MathError("word index out of range");
        out.map = out.map * involutions[w - 1];
    }
    out.identity_warning = out.map == LatticeMap::identity();
    return out;
}

QPoly charpoly(const LatticeMap& m) { return charpoly3(m.matrix); }

AlgebraicReal dynamical_degree(const LatticeMap& m) {
    auto roots = real_roots(charpoly(m));
    if (roots.empty()) throw MathError("characteristic polynomial has no real root");
    return roots.back();
}

bool is_hyperbolic(const LatticeMap& m) {
    AlgebraicReal l = dynamical_degree(m);
    return l.lo() >= 1 && !(l.is_exact_point() && l.lo() == 1);
}

SpectralReport spectrum(const LatticeMap& m) {
    SpectralReport r;
    r.charpoly = charpoly(m);
    r.lambda = dynamical_degree(m);
    QPoly rest = r.charpoly;
    for (auto& q : rational_roots(r.charpoly)) {
        QPoly lin{-q, Q(1)};
        while (rest.degree() >= 1 && (rest % lin).is_zero()) {
            r.factors.push_back(lin);
            rest = divmod(rest, lin).first;
        }
    }
    if (rest.degree() >= 1) {
        rest = rest.monic();
        r.factors.push_back(rest);
        if (!r.lambda.is_exact_point()) r.salem_factor = rest;
    }
    // numeric roots of everything but the Perron pair
    const double lam = r.lambda.to_double();
    std::vector<std::complex<double>> all;
    for (auto& f : r.factors) {
        if (f.degree() == 1) {
            all.emplace_back(Q(-f.coeffs()[0]).get_d(), 0.0);
            continue;
        }
        QPoly sf = squarefree_part(f);
        for (auto z : complex_roots(f)) all.push_back(polish_root(sf, z));
    }
    bool hyper = r.salem_factor.has_value();
    bool took_l = false, took_inv = false;
    for (auto z : all) {
        if (hyper && !took_l && std::abs(z - lam) < 1e-9 * lam) {
            took_l = true;
            continue;
        }
        if (hyper && !took_inv && std::abs(z - 1.0 / lam) < 1e-9) {
            took_inv = true;
            continue;
        }
        r.other_roots.push_back(z);
        r.max_unit_deviation = std::max(r.max_unit_deviation, std::fabs(std::abs(z) - 1.0));
    }
    return r;
}

DivisorClass DivisorClass::rational(const IVec& v) {
    DivisorClass d;
    for (int i = 0; i < 3; ++i) d.coeffs[i] = QNum(rational_field(), Q(v[i]));
    return d;
}

std::array<double, 3> DivisorClass::approx() const {
    return {coeffs[0].to_double(), coeffs[1].to_double(), coeffs[2].to_double()};
}

DivisorClass DivisorClass::operator+(const DivisorClass& o) const {
    DivisorClass d;
    for (int i = 0; i < 3; ++i) d.coeffs[i] = coeffs[i] + o.coeffs[i];
    d.role = (role == DivisorRole::Plus && o.role == DivisorRole::Minus) ? DivisorRole::Sum : DivisorRole::Generic;
    return d;
}

QNum pairing(const IntersectionForm& f, const DivisorClass& a, const DivisorClass& b) {
    QNum s = Q(0) * a.coeffs[0];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (sgn(f.gram[i][j]) == 0) continue;
            s = s + Q(f.gram[i][j]) * (a.coeffs[i] * b.coeffs[j]);
        }
    return s;
}

QNum degree_pairing(const DivisorClass& d, const std::array<long long, 3>& degrees) {
    QNum s = Q(0) * d.coeffs[0];
    for (int i = 0; i < 3; ++i) s = s + Q(Z(static_cast<long>(degrees[i]))) * d.coeffs[i];
    return s;
}

DivisorClass eigendivisor(const LatticeMap& m, Direction dir, const IntersectionForm& f) {
    LatticeMap a = (dir == Direction::Plus) ? m : m.inverse();
    if (!is_hyperbolic(a)) throw MathError("no Perron eigenvector");
    AlgebraicReal lam = dynamical_degree(a);
    auto K = std::make_shared<const NumberField>(lam);
    QNum L = QNum::gen(K);
    std::array<std::array<QNum, 3>, 3> A;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            A[i][j] = QNum(K, Q(a.matrix[i][j]));
            if (i == j) A[i][j] = A[i][j] - L;
        }
    auto cross = [&](int r, int s) {
        std::array<QNum, 3> v{A[r][1] * A[s][2] - A[r][2] * A[s][1], A[r][2] * A[s][0] - A[r][0] * A[s][2],
                              A[r][0] * A[s][1] - A[r][1] * A[s][0]};
        return v;
    };
    std::array<QNum, 3> v;
    bool found = false;
    for (auto [r, s] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
        v = cross(r, s);
        if (!(v[0].is_zero() && v[1].is_zero() && v[2].is_zero())) {
            found = true;
            break;
        }
    }
    if (!found) throw MathError("no Perron eigenvector");
    // normalize D.(L1+L2+L3) = 1
    QNum s(K, Q(0));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s = s + Q(f.gram[i][j]) * v[i];
    if (s.is_zero()) throw MathError("eigendivisor pairs to zero with L1+L2+L3");
    QNum si = s.inv();
    DivisorClass d;
    for (int i = 0; i < 3; ++i) d.coeffs[i] = v[i] * si;
    d.role = (dir == Direction::Plus) ? DivisorRole::Plus : DivisorRole::Minus;
    return d;
}

BigNefCertificate big_nef_check(const DivisorClass& d, const DivisorClass& dplus, const DivisorClass& dminus,
                                const IntersectionForm& f) {
    BigNefCertificate c;
    c.self_intersection = pairing(f, d, d);
    c.with_plus = pairing(f, d, dplus);
    c.with_minus = pairing(f, d, dminus);
    bool ok = c.self_intersection.sign() > 0 && c.with_plus.sign() >= 0 && c.with_minus.sign() >= 0;
    for (int i = 0; i < 3; ++i) {
        IVec e{0, 0, 0};
        e[i] = 1;
        c.with_hyperplanes[i] = pairing(f, d, DivisorClass::rational(e));
        ok = ok && c.with_hyperplanes[i].sign() >= 0;
    }
    c.big_and_nef = ok;
    c.assumption = "nefness certified against the test set {L1, L2, L3, D+, D-} only";
    return c;
}

PeriodicClasses periodic_curve_classes(const LatticeMap& m, long selfint, int order_bound, int height_bound,
                                       const IntersectionForm& f, int threads) {
    PeriodicClasses out;
    if (height_bound <= 0 || order_bound <= 0) return out;
    long long g[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g[i][j] = f.gram[i][j].get_si();
    const long H = height_bound;
    std::map<IVec, std::vector<IVec>> found;
    std::mutex mu;
    auto work = [&](long c0_begin, long c0_end) {
        std::map<IVec, std::vector<IVec>> local;
        for (long c0 = c0_begin; c0 < c0_end; ++c0)
            for (long c1 = -H; c1 <= H; ++c1)
                for (long c2 = -H; c2 <= H; ++c2) {
                    long long c[3] = {c0, c1, c2};
                    long long s = 0;
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) s += c[i] * g[i][j] * c[j];
                    if (s != selfint) continue;
                    IVec v{Z(c0), Z(c1), Z(c2)};
                    std::vector<IVec> orbit{v};
                    IVec w = v;
                    bool periodic = false;
                    for (int k = 1; k <= order_bound; ++k) {
                        w = m.apply(w);
                        if (w == v) {
                            periodic = true;
                            break;
                        }
                        orbit.push_back(w);
                    }
                    if (!periodic) continue;
                    auto it = std::min_element(orbit.begin(), orbit.end());
                    std::rotate(orbit.begin(), it, orbit.end());
                    local.emplace(orbit.front(), orbit);
                }
        std::lock_guard<std::mutex> lk(mu);
        found.merge(local);
    };
    threads = std::max(1, threads);
    const long span = 2 * H + 1;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        long b = -H + span * t / threads, e = -H + span * (t + 1) / threads;
        if (threads == 1)
            work(b, e);
        else
            pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
    for (auto& [k, orb] : found) out.orbits.push_back(orb);
    return out;
}

LatticeData lattice_data(const std::vector<int>& word) {
    LatticeData d;
    d.word = word;
    auto c = compose_word(wehler_involutions(), word);
    d.map = c.map;
    d.spec = spectrum(d.map);
    if (!is_hyperbolic(d.map)) throw MathError("word is not hyperbolic (lambda = 1)");
    d.lambda = d.spec.lambda.to_double();
    d.dplus = eigendivisor(d.map, Direction::Plus);
    d.dminus = eigendivisor(d.map, Direction::Minus);
    return d;
}

}  // namespace heightlab
