#include "heightlab/wehler.hpp"

#include "heightlab/ntt.hpp"
#include "heightlab/polyparse.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace heightlab {

using json = nlohmann::json;

// ---------------------------------------------------------------- pairs and sections

ZPair normalize_pair(ZPoly p, ZPoly q) {
    if (p.is_zero() && q.is_zero()) throw DegenerateSection();
    Z g = gcd(p.content(), q.content());
    const Z& lead = q.is_zero() ? p.lead() : q.lead();
    if (sgn(lead) < 0) g = -g;
    if (g != 1) {
        p = divexact_scalar(p, g);
        q = divexact_scalar(q, g);
    }
    return {std::move(p), std::move(q)};
}

Degrees MarkedSection::degrees() const { return {c[0].degree(), c[1].degree(), c[2].degree()}; }

std::array<std::pair<QPoly, QPoly>, 3> MarkedSection::rational() const {
    std::array<std::pair<QPoly, QPoly>, 3> out;
    for (int i = 0; i < 3; ++i) {
        const ZPair& pr = c[i];
        Q l = pr.q.is_zero() ? Q(pr.p.lead()) : Q(pr.q.lead());
        Q inv = 1 / l;
        out[i] = {inv * pr.p.to_q(), inv * pr.q.to_q()};
    }
    return out;
}

std::string MarkedSection::str() const {
    std::ostringstream os;
    for (int i = 0; i < 3; ++i) os << (i ? " " : "") << "[" << c[i].p.str() << " : " << c[i].q.str() << "]";
    return os.str();
}

std::string MarkedSection::canonical() const {
    std::ostringstream os;
    for (int i = 0; i < 3; ++i) {
        for (const ZPoly* z : {&c[i].p, &c[i].q}) {
            os << '(';
            for (auto& x : z->coeffs()) os << x.get_str(16) << ',';
            os << ')';
        }
    }
    return os.str();
}

MarkedSection MarkedSection::constant(const std::array<std::array<long, 2>, 3>& pts) {
    MarkedSection s;
    for (int i = 0; i < 3; ++i) {
        Z a = pts[i][0], b = pts[i][1];
        Z g = gcd(a, b);
        if (g == 0) throw ValidationError("constant section with a [0:0] coordinate");
        s.c[i] = normalize_pair(ZPoly::constant(a / g), ZPoly::constant(b / g));
    }
    return s;
}

MarkedSection MarkedSection::from_rational(const std::array<std::pair<QPoly, QPoly>, 3>& pairs) {
    MarkedSection s;
    for (int i = 0; i < 3; ++i) {
        QPoly p = pairs[i].first, q = pairs[i].second;
        if (p.is_zero() && q.is_zero()) throw ValidationError("section coordinate " + std::to_string(i) + " is [0:0]");
        QPoly g = gcd(p, q);
        if (g.degree() > 0) {
            p = divmod(p, g).first;
            q = divmod(q, g).first;
        }
        Z l = 1;
        for (const QPoly* r : {&p, &q})
            for (auto& x : r->coeffs()) l = lcm(l, Z(x.get_den()));
        s.c[i] = normalize_pair(ZPoly::from_q_scaled(p, l), ZPoly::from_q_scaled(q, l));
    }
    return s;
}

// ---------------------------------------------------------------- excluded parameters

void ExcludedParams::add(const Q& t) {
    std::lock_guard<std::mutex> lk(mu_);
    if (std::find(exact_.begin(), exact_.end(), t) == exact_.end()) exact_.push_back(t);
}

void ExcludedParams::add_root(std::complex<double> t) {
    std::lock_guard<std::mutex> lk(mu_);
    roots_.push_back(t);
}

std::vector<Q> ExcludedParams::rational() const {
    std::lock_guard<std::mutex> lk(mu_);
    return exact_;
}

std::vector<std::complex<double>> ExcludedParams::roots() const {
    std::lock_guard<std::mutex> lk(mu_);
    return roots_;
}

// ---------------------------------------------------------------- families

struct DeltaCache {
    std::once_flag once[3];
    ZPoly delta[3];
};

int SurfaceFamily::tdeg() const {
    int e = 0;
    for (auto& c : coeffs) e = std::max(e, c.degree());
    return e;
}

std::string SurfaceFamily::canonical() const {
    std::ostringstream os;
    for (int k = 0; k < 27; ++k) {
        os << k << ':';
        for (auto& x : coeffs[k].coeffs()) os << x.get_str(16) << ',';
        os << ';';
    }
    os << "w:";
    for (int w : word) os << w << ',';
    return os.str();
}

SurfaceFamily make_family(const std::array<QPoly, 27>& coeffs, std::vector<int> word,
                          std::vector<MarkedSection> sections, std::string name) {
    SurfaceFamily fam;
    Z l = 1;
    for (auto& c : coeffs)
        for (auto& x : c.coeffs()) l = lcm(l, Z(x.get_den()));
    Z g = 0;
    for (int k = 0; k < 27; ++k) {
        fam.coeffs[k] = ZPoly::from_q_scaled(coeffs[k], l);
        g = gcd(g, fam.coeffs[k].content());
    }
    if (g > 1)
        for (auto& c : fam.coeffs) c = divexact_scalar(c, g);
    fam.word = std::move(word);
    fam.sections = std::move(sections);
    fam.name = std::move(name);
    fam.delta_cache = std::make_shared<DeltaCache>();
    return fam;
}

namespace {

QPoly parse_field(const std::string& text, const std::string& where) {
    try {
        return parse_poly(text);
    } catch (const ParseError& e) {
        throw ValidationError(where + ": " + e.what());
    }
}

std::string poly_json(const QPoly& p) { return p.str('t'); }

}  // namespace

SurfaceFamily parse_family(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("family file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_object())
        throw ValidationError("family file needs a \"coeffs\" object");
    std::array<QPoly, 27> coeffs;
    for (auto& [key, val] : j["coeffs"].items()) {
        if (key.size() != 3 || std::any_of(key.begin(), key.end(), [](char ch) { return ch < '0' || ch > '2'; }))
            throw ValidationError("coefficient key \"" + key + "\" is not a digit triple in {0,1,2}");
        std::string text = val.is_string() ? val.get<std::string>() : val.dump();
        coeffs[SurfaceFamily::index(key[0] - '0', key[1] - '0', key[2] - '0')] =
            parse_field(text, "coeffs[\"" + key + "\"]");
    }
    std::vector<int> word;
    if (!j.contains("word") || !j["word"].is_array()) throw ValidationError("family file needs a \"word\" array");
    for (auto& w : j["word"]) {
        if (!w.is_number_integer()) throw ValidationError("word entries must be integers");
        word.push_back(w.get<int>());
    }
    std::vector<MarkedSection> sections;
    if (j.contains("sections")) {
        int k = 0;
        for (auto& s : j["sections"]) {
            if (!s.is_array() || s.size() != 3) throw ValidationError("section " + std::to_string(k) + " needs three pairs");
            std::array<std::pair<QPoly, QPoly>, 3> pr;
            for (int i = 0; i < 3; ++i) {
                if (!s[i].is_array() || s[i].size() != 2)
                    throw ValidationError("section " + std::to_string(k) + " coordinate " + std::to_string(i) +
                                          " is not a pair");
                auto txt = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
                std::string where = "section " + std::to_string(k) + " coordinate " + std::to_string(i);
                pr[i] = {parse_field(txt(s[i][0]), where), parse_field(txt(s[i][1]), where)};
            }
            sections.push_back(MarkedSection::from_rational(pr));
            ++k;
        }
    }
    return make_family(coeffs, std::move(word), std::move(sections), j.value("name", std::string()));
}

SurfaceFamily load_family(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open family file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_family(ss.str());
}

std::string family_to_json(const SurfaceFamily& fam) {
    json j;
    if (!fam.name.empty()) j["name"] = fam.name;
    json c = json::object();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int cc = 0; cc < 3; ++cc) {
                const ZPoly& p = fam.coeffs[SurfaceFamily::index(a, b, cc)];
                if (p.is_zero()) continue;
                std::string key{char('0' + a), char('0' + b), char('0' + cc)};
                c[key] = poly_json(p.to_q());
            }
    j["coeffs"] = c;
    j["word"] = fam.word;
    json secs = json::array();
    for (auto& s : fam.sections) {
        json one = json::array();
        for (int i = 0; i < 3; ++i) one.push_back({poly_json(s.c[i].p.to_q()), poly_json(s.c[i].q.to_q())});
        secs.push_back(one);
    }
    j["sections"] = secs;
    return j.dump(2);
}

// ---------------------------------------------------------------- the form along a section

namespace {

// y0^e y1^(2-e) for e = 0, 1, 2
std::array<ZPoly, 3> monomials(const ZPair& pr) {
    return {pr.q * pr.q, pr.p * pr.q, pr.p * pr.p};
}

int coord_index(int i, int ei, int j, int ej, int ek) {
    int e[3];
    e[i] = ei;
    e[j] = ej;
    e[3 - i - j] = ek;
    return SurfaceFamily::index(e[0], e[1], e[2]);
}

}  // namespace

std::array<ZPoly, 3> coordinate_quadratic(const SurfaceFamily& fam, int i, const MarkedSection& s) {
    const int j = (i + 1) % 3 < (i + 2) % 3 ? (i + 1) % 3 : (i + 2) % 3;
    const int k = 3 - i - j;
    auto Y = monomials(s.c[j]), W = monomials(s.c[k]);
    std::array<std::array<ZPoly, 3>, 3> YW;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) YW[a][b] = Y[a] * W[b];
    std::array<ZPoly, 3> out;  // A (u0^2), B (u0 u1), C (u1^2)
    for (int ei = 0; ei < 3; ++ei) {
        ZPoly acc;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const ZPoly& c = fam.coeffs[coord_index(i, ei, j, a, b)];
                if (c.is_zero() || YW[a][b].is_zero()) continue;
                acc += c * YW[a][b];
            }
        out[2 - ei] = std::move(acc);
    }
    return out;
}

ZPoly evaluate_form(const SurfaceFamily& fam, const MarkedSection& s) {
    auto abc = coordinate_quadratic(fam, 0, s);
    auto X = monomials(s.c[0]);
    return abc[0] * X[2] + abc[1] * X[1] + abc[2] * X[0];
}

bool on_surface(const SurfaceFamily& fam, const MarkedSection& s) { return evaluate_form(fam, s).is_zero(); }

void validate_family(const SurfaceFamily& fam, bool require_hyperbolic) {
    if (std::all_of(fam.coeffs.begin(), fam.coeffs.end(), [](const ZPoly& c) { return c.is_zero(); }))
        throw ValidationError("form is identically zero");
    if (fam.word.empty()) throw ValidationError("word is empty");
    for (int w : fam.word)
        if (w < 1 || w > 3) throw ValidationError("word index " + std::to_string(w) + " out of range 1..3");
    if (require_hyperbolic && !is_hyperbolic(compose_word(wehler_involutions(), fam.word).map))
        throw ValidationError("word is not hyperbolic");
    for (std::size_t k = 0; k < fam.sections.size(); ++k)
        if (!on_surface(fam, fam.sections[k])) throw ValidationError("section " + std::to_string(k) + " not on surface");
}

// ---------------------------------------------------------------- Delta_i

namespace {

Z bareiss_det(std::vector<std::vector<Z>> m) {
    const int n = static_cast<int>(m.size());
    Z prev = 1;
    int sign = 1;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        while (piv < n && sgn(m[piv][c]) == 0) ++piv;
        if (piv == n) return 0;
        if (piv != c) {
            std::swap(m[piv], m[c]);
            sign = -sign;
        }
        for (int r = c + 1; r < n; ++r) {
            for (int k = c + 1; k < n; ++k) {
                Z v = m[r][k] * m[c][c] - m[r][c] * m[c][k];
                mpz_divexact(m[r][k].get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
            }
            m[r][c] = 0;
        }
        prev = m[c][c];
    }
    return sign > 0 ? m[n - 1][n - 1] : Z(-m[n - 1][n - 1]);
}

// Resultant of binary forms given by coefficients of the first variable's powers, highest first.
Z form_resultant(const std::vector<Z>& f, const std::vector<Z>& g) {
    const int m = static_cast<int>(f.size()) - 1, n = static_cast<int>(g.size()) - 1;
    std::vector<std::vector<Z>> s(m + n, std::vector<Z>(m + n));
    for (int r = 0; r < n; ++r)
        for (int k = 0; k <= m; ++k) s[r][r + k] = f[k];
    for (int r = 0; r < m; ++r)
        for (int k = 0; k <= n; ++k) s[n + r][r + k] = g[k];
    return bareiss_det(std::move(s));
}

// Newton interpolation through (x_k, v_k); result has integer coefficients by construction.
ZPoly interpolate_integer(const std::vector<long>& xs, const std::vector<Z>& vs) {
    const std::size_t n = xs.size();
    std::vector<Q> dd(vs.begin(), vs.end());
    for (std::size_t lvl = 1; lvl < n; ++lvl)
        for (std::size_t k = n - 1; k >= lvl; --k) {
            dd[k] = (dd[k] - dd[k - 1]) / Q(xs[k] - xs[k - lvl]);
            if (k == lvl) break;
        }
    QPoly r = QPoly::constant(dd[n - 1]);
    for (std::size_t k = n - 1; k-- > 0;) r = r * QPoly{Q(-xs[k]), Q(1)} + QPoly::constant(dd[k]);
    for (auto& c : r.coeffs())
        if (c.get_den() != 1) throw MathError("interpolated resultant is not integral");
    return ZPoly::from_q_scaled(r, 1);
}

}  // namespace

ZPoly coordinate_delta(const SurfaceFamily& fam, int i) {
    const int j = std::min((i + 1) % 3, (i + 2) % 3);
    const int e = std::max(fam.tdeg(), 0);
    const long npts = 64L * e + 1;
    static const long rs[][2] = {{3, 5}, {7, -2}, {-4, 11}, {13, 6}};
    for (auto& [r, s] : rs) {
        std::vector<long> ts;
        std::vector<Z> vals;
        for (long m = 0; m < npts; ++m) {
            long t = m - npts / 2;
            // coefficient values at t, grouped as form[ei][ej][ek]
            Z c[3][3][3];
            for (int ei = 0; ei < 3; ++ei)
                for (int ej = 0; ej < 3; ++ej)
                    for (int ek = 0; ek < 3; ++ek)
                        c[ei][ej][ek] = fam.coeffs[coord_index(i, ei, j, ej, ek)].eval_homog(Z(t), Z(1), e);
            auto res_y = [&](int fa, int fb, int fc, long mult) {
                // Res_y(form fa, form fb + mult * form fc) as a polynomial in zz, formal degree 8
                std::vector<long> zs;
                std::vector<Z> zv;
                for (long zz = 0; zz <= 8; ++zz) {
                    std::vector<Z> f(3), g(3);
                    for (int ej = 0; ej < 3; ++ej) {
                        Z a = 0, b = 0, zp = 1;
                        for (int ek = 0; ek < 3; ++ek) {
                            a += c[fa][ej][ek] * zp;
                            b += (c[fb][ej][ek] + mult * c[fc][ej][ek]) * zp;
                            zp *= zz;
                        }
                        f[2 - ej] = a;
                        g[2 - ej] = b;
                    }
                    zs.push_back(zz);
                    zv.push_back(form_resultant(f, g));
                }
                return interpolate_integer(zs, zv);
            };
            // ei = 2 is A, 1 is B, 0 is C
            ZPoly r1 = res_y(2, 1, 0, r), r2 = res_y(1, 0, 2, s);
            std::vector<Z> f(9), g(9);
            for (int d = 0; d <= 8; ++d) {
                f[8 - d] = r1.coeff(d);
                g[8 - d] = r2.coeff(d);
            }
            ts.push_back(t);
            vals.push_back(form_resultant(f, g));
        }
        ZPoly d = interpolate_integer(ts, vals);
        if (!d.is_zero()) return d.primitive();
    }
    return {};
}

const ZPoly& cached_delta(const SurfaceFamily& fam, int i) {
    if (!fam.delta_cache) throw MathError("family has no delta cache");
    DeltaCache& dc = *fam.delta_cache;
    std::call_once(dc.once[i], [&] { dc.delta[i] = coordinate_delta(fam, i); });
    return dc.delta[i];
}

// ---------------------------------------------------------------- involutions

long involution_degree_bound(const SurfaceFamily& fam, int i, const Degrees& d) {
    const int k = i - 1;
    long b = fam.tdeg() + 2 * d[(k + 1) % 3] + 2 * d[(k + 2) % 3] - d[k];
    return std::max(b, 0L);
}

InvolutionResult involution_apply(const SurfaceFamily& fam, int i, const MarkedSection& s) {
    if (i < 1 || i > 3) throw std::invalid_argument("involution index must be 1, 2 or 3");
    const int k = i - 1;
    auto [A, B, C] = coordinate_quadratic(fam, k, s);
    if (A.is_zero() && B.is_zero() && C.is_zero()) throw DegenerateSection();
    const ZPoly& x0 = s.c[k].p;
    const ZPoly& x1 = s.c[k].q;
    ZPoly cn, an;
    // product form C/x0, A/x1; sum form when a component vanishes identically
    if (!x0.is_zero())
        cn = divexact(C, x0);
    else
        cn = divexact(-B, x1);
    if (!x1.is_zero())
        an = divexact(A, x1);
    else
        an = divexact(-B, x0);
    if (cn.is_zero() && an.is_zero()) throw DegenerateSection();
    ZPoly g = pair_gcd(cn, an, cached_delta(fam, k));
    if (g.degree() > 0) {
        cn = divexact(cn, g);
        an = divexact(an, g);
    }
    InvolutionResult r{s, false};
    r.section.c[k] = normalize_pair(std::move(cn), std::move(an));
    r.fixed = (r.section.c[k] == s.c[k]);
    return r;
}

MarkedSection automorphism_apply(const SurfaceFamily& fam, const MarkedSection& s, int power, long degree_cap) {
    std::vector<int> w = power >= 0 ? fam.word : fam.reversed_word();
    MarkedSection cur = s;
    int step = 0;
    for (int n = 0; n < std::abs(power); ++n)
        for (int i : w) {
            ++step;
            if (involution_degree_bound(fam, i, cur.degrees()) > degree_cap) throw DegreeCapExceeded(step);
            cur = involution_apply(fam, i, cur).section;
        }
    return cur;
}

QNum section_degree(const Degrees& deg, const DivisorClass& d) { return degree_pairing(d, deg); }
QNum section_degree(const MarkedSection& s, const DivisorClass& d) { return degree_pairing(d, s.degrees()); }

// ---------------------------------------------------------------- smoothness probe

SmoothnessReport smoke_smoothness(const SurfaceFamily& fam, int samples, uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("samples must be at least 1");
    using cd = std::complex<double>;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> num(-20, 20), den(1, 7);
    std::normal_distribution<double> nd(0.0, 1.0);
    SmoothnessReport rep;
    for (int sidx = 0; sidx < samples; ++sidx) {
        Q t(num(rng), den(rng));
        t.canonicalize();
        double td = t.get_d();
        double c[27];
        for (int m = 0; m < 27; ++m) c[m] = fam.coeffs[m].to_q().eval(td);
        SmoothnessSample smp{t, 0, 0};
        const int probes = 64;
        for (int pr = 0; pr < probes; ++pr) {
            cd y(nd(rng), nd(rng)), z(nd(rng), nd(rng));
            cd q[3] = {0, 0, 0};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    for (int cc = 0; cc < 3; ++cc)
                        q[a] += c[SurfaceFamily::index(a, b, cc)] * std::pow(y, b) * std::pow(z, cc);
            if (std::abs(q[2]) < 1e-12) continue;
            cd disc = std::sqrt(q[1] * q[1] - 4.0 * q[2] * q[0]);
            for (cd x : {(-q[1] + disc) / (2.0 * q[2]), (-q[1] - disc) / (2.0 * q[2])}) {
                cd fx = 0, fy = 0, fz = 0;
                double size = 0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int cc = 0; cc < 3; ++cc) {
                            double cv = c[SurfaceFamily::index(a, b, cc)];
                            if (cv == 0) continue;
                            cd xa = std::pow(x, a), yb = std::pow(y, b), zc = std::pow(z, cc);
                            size += std::abs(cv * xa * yb * zc);
                            if (a) fx += cv * double(a) * std::pow(x, a - 1) * yb * zc;
                            if (b) fy += cv * double(b) * xa * std::pow(y, b - 1) * zc;
                            if (cc) fz += cv * double(cc) * xa * yb * std::pow(z, cc - 1);
                        }
                if (size == 0) continue;
                double g = std::max({std::abs(fx) * (1 + std::abs(x)), std::abs(fy) * (1 + std::abs(y)),
                                     std::abs(fz) * (1 + std::abs(z))});
                ++smp.probes;
                if (g < 1e-6 * size) ++smp.singular;
            }
        }
        if (smp.probes > 0 && 2 * smp.singular >= smp.probes) {
            rep.flagged.push_back(t);
            fam.excluded->add(t);
        }
        rep.samples.push_back(smp);
    }
    return rep;
}

// ---------------------------------------------------------------- section search

std::vector<MarkedSection> find_sections(const SurfaceFamily& fam, int height_bound, std::size_t max_found) {
    std::vector<std::array<long, 2>> pts;
    for (long b = 1; b <= height_bound; ++b)
        for (long a = -height_bound; a <= height_bound; ++a)
            if (std::gcd(std::abs(a), b) == 1) pts.push_back({a, b});
    pts.push_back({1, 0});
    std::vector<MarkedSection> out;
    std::set<std::string> seen;
    auto push = [&](MarkedSection s) {
        if (!on_surface(fam, s)) return;
        if (seen.insert(s.canonical()).second) out.push_back(std::move(s));
    };
    for (int i = 0; i < 3 && out.size() < max_found; ++i) {
        const int j = std::min((i + 1) % 3, (i + 2) % 3), k = 3 - i - j;
        for (auto& pj : pts)
            for (auto& pk : pts) {
                if (out.size() >= max_found) return out;
                std::array<std::array<long, 2>, 3> base;
                base[i] = {0, 1};
                base[j] = pj;
                base[k] = pk;
                MarkedSection s = MarkedSection::constant(base);
                auto [A, B, C] = coordinate_quadratic(fam, i, s);
                if (A.is_zero() && B.is_zero() && C.is_zero()) continue;
                std::vector<std::pair<QPoly, QPoly>> roots;
                QPoly a = A.to_q(), b = B.to_q(), c = C.to_q();
                if (a.is_zero()) {
                    roots.push_back({QPoly::constant(1), QPoly()});
                    if (!b.is_zero()) roots.push_back({-c, b});
                } else {
                    QPoly r;
                    if (!poly_sqrt(b * b - Q(4) * (a * c), r)) continue;
                    roots.push_back({-b + r, Q(2) * a});
                    roots.push_back({-b - r, Q(2) * a});
                }
                for (auto& [p, q] : roots) {
                    auto rat = s.rational();
                    rat[i] = {p, q};
                    push(MarkedSection::from_rational(rat));
                }
            }
    }
    return out;
}

// ---------------------------------------------------------------- rational fibers

FiberPoint specialize(const MarkedSection& s, const Q& t) {
    FiberPoint pt;
    Z num = t.get_num(), den = t.get_den();
    for (int i = 0; i < 3; ++i) {
        int d = static_cast<int>(s.c[i].degree());
        Z a = s.c[i].p.eval_homog(num, den, d), b = s.c[i].q.eval_homog(num, den, d);
        Z g = gcd(a, b);
        if (g == 0) throw DegenerateSection();
        a /= g;
        b /= g;
        if (sgn(b) < 0 || (sgn(b) == 0 && sgn(a) < 0)) {
            a = -a;
            b = -b;
        }
        pt[i] = {a, b};
    }
    return pt;
}

FiberPoint fiber_apply_exact(const SurfaceFamily& fam, const Q& t, const FiberPoint& start, int power) {
    const int e = fam.tdeg();
    Z cv[27];
    for (int m = 0; m < 27; ++m) cv[m] = fam.coeffs[m].eval_homog(t.get_num(), t.get_den(), e);
    std::vector<int> w = power >= 0 ? fam.word : fam.reversed_word();
    FiberPoint pt = start;
    for (int n = 0; n < std::abs(power); ++n)
        for (int i1 : w) {
            const int i = i1 - 1, j = std::min((i + 1) % 3, (i + 2) % 3), k = 3 - i - j;
            auto mono = [](const std::array<Z, 2>& pr) {
                return std::array<Z, 3>{pr[1] * pr[1], pr[0] * pr[1], pr[0] * pr[0]};
            };
            auto Y = mono(pt[j]), W = mono(pt[k]);
            Z q[3];
            for (int ei = 0; ei < 3; ++ei)
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) q[ei] += cv[coord_index(i, ei, j, a, b)] * Y[a] * W[b];
            const Z &A = q[2], &B = q[1], &C = q[0];
            const Z &x0 = pt[i][0], &x1 = pt[i][1];
            if (A == 0 && B == 0 && C == 0) {
                fam.excluded->add(t);
                throw DegenerateSection();
            }
            Z cn, an;
            auto exact = [&](const Z& num, const Z& d, Z& out) {
                if (!mpz_divisible_p(num.get_mpz_t(), d.get_mpz_t())) throw ValidationError("point not on fiber");
                mpz_divexact(out.get_mpz_t(), num.get_mpz_t(), d.get_mpz_t());
            };
            if (x0 != 0)
                exact(C, x0, cn);
            else
                exact(Z(-B), x1, cn);
            if (x1 != 0)
                exact(A, x1, an);
            else
                exact(Z(-B), x0, an);
            Z g = gcd(cn, an);
            if (g == 0) {
                fam.excluded->add(t);
                throw DegenerateSection();
            }
            cn /= g;
            an /= g;
            if (sgn(an) < 0 || (sgn(an) == 0 && sgn(cn) < 0)) {
                cn = -cn;
                an = -an;
            }
            pt[i] = {cn, an};
        }
    return pt;
}

}  // namespace heightlab

namespace heightlab {

namespace {

// Basis of the right kernel of an integer matrix, as primitive integer vectors.
std::vector<std::vector<Z>> integer_kernel(const std::vector<std::vector<Z>>& rows, int ncols) {
    std::vector<std::vector<Q>> m;
    for (auto& r : rows) m.emplace_back(r.begin(), r.end());
    std::vector<int> pivcol;
    int prow = 0;
    for (int c = 0; c < ncols && prow < static_cast<int>(m.size()); ++c) {
        int piv = prow;
        while (piv < static_cast<int>(m.size()) && sgn(m[piv][c]) == 0) ++piv;
        if (piv == static_cast<int>(m.size())) continue;
        std::swap(m[piv], m[prow]);
        Q inv = 1 / m[prow][c];
        for (auto& x : m[prow]) x *= inv;
        for (int r = 0; r < static_cast<int>(m.size()); ++r) {
            if (r == prow || sgn(m[r][c]) == 0) continue;
            Q f = m[r][c];
            for (int k = 0; k < ncols; ++k) m[r][k] -= f * m[prow][k];
        }
        pivcol.push_back(c);
        ++prow;
    }
    std::vector<std::vector<Z>> basis;
    for (int free = 0; free < ncols; ++free) {
        if (std::find(pivcol.begin(), pivcol.end(), free) != pivcol.end()) continue;
        std::vector<Q> v(ncols, 0);
        v[free] = 1;
        for (std::size_t r = 0; r < pivcol.size(); ++r) v[pivcol[r]] = -m[r][free];
        Z l = 1;
        for (auto& x : v) l = lcm(l, Z(x.get_den()));
        std::vector<Z> zv(ncols);
        Z g = 0;
        for (int k = 0; k < ncols; ++k) {
            Q s = v[k] * l;
            zv[k] = s.get_num();
            g = gcd(g, zv[k]);
        }
        for (auto& x : zv) x /= g;
        basis.push_back(std::move(zv));
    }
    return basis;
}

using Pt = std::array<std::array<long, 2>, 3>;

Z monomial_value(const Pt& pt, int a, int b, int c) {
    const int e[3] = {a, b, c};
    Z v = 1;
    for (int j = 0; j < 3; ++j) {
        Z x0 = pt[j][0], x1 = pt[j][1], r;
        mpz_pow_ui(r.get_mpz_t(), x0.get_mpz_t(), e[j]);
        v *= r;
        mpz_pow_ui(r.get_mpz_t(), x1.get_mpz_t(), 2 - e[j]);
        v *= r;
    }
    return v;
}

// derivative of the monomial in the first component of coordinate i
Z monomial_d0(const Pt& pt, int a, int b, int c, int i) {
    const int e[3] = {a, b, c};
    if (e[i] == 0) return 0;
    Z v = e[i];
    for (int j = 0; j < 3; ++j) {
        Z x0 = pt[j][0], x1 = pt[j][1], r;
        mpz_pow_ui(r.get_mpz_t(), x0.get_mpz_t(), e[j] - (j == i ? 1 : 0));
        v *= r;
        mpz_pow_ui(r.get_mpz_t(), x1.get_mpz_t(), 2 - e[j]);
        v *= r;
    }
    return v;
}

}  // namespace

SurfaceFamily generate_family(uint64_t seed, bool periodic_pair, int random_sections, int tdeg,
                              std::vector<int> word) {
    std::mt19937_64 rng(seed);
    auto uni = [&](long lo, long hi) { return lo + static_cast<long>(rng() % static_cast<uint64_t>(hi - lo + 1)); };
    std::vector<std::vector<Z>> rows;
    std::vector<Pt> points;
    auto row = [&](auto&& fn) {
        std::vector<Z> r(27);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c) r[SurfaceFamily::index(a, b, c)] = fn(a, b, c);
        rows.push_back(std::move(r));
    };
    if (periodic_pair) {
        std::array<long, 2> xs{uni(1, 4), uni(1, 4)}, ys{uni(-4, -1), uni(1, 4)};
        std::array<long, 2> z1{uni(1, 5), uni(1, 5)}, z2{uni(-5, -1), uni(1, 5)};
        for (const Pt& pt : {Pt{xs, ys, z1}, Pt{xs, ys, z2}}) {
            row([&](int a, int b, int c) { return monomial_value(pt, a, b, c); });
            row([&](int a, int b, int c) { return monomial_d0(pt, a, b, c, 0); });
            row([&](int a, int b, int c) { return monomial_d0(pt, a, b, c, 1); });
        }
        points.push_back(Pt{xs, ys, z1});
    }
    for (int k = 0; k < random_sections; ++k) {
        Pt pt;
        for (auto& pr : pt) {
            long a = uni(-3, 3);
            pr = {a == 0 ? 1 : a, uni(1, 4)};
        }
        row([&](int a, int b, int c) { return monomial_value(pt, a, b, c); });
        points.push_back(pt);
    }
    auto basis = integer_kernel(rows, 27);
    if (basis.empty()) throw MathError("no form satisfies the imposed conditions");
    std::array<QPoly, 27> coeffs;
    std::array<std::vector<Q>, 27> cv;
    for (auto& v : cv) v.assign(tdeg + 1, 0);
    for (int k = 0; k <= tdeg; ++k) {
        std::vector<Z> v(27, 0);
        for (auto& b : basis) {
            long m = uni(1, 3) * ((rng() & 1) ? 1 : -1);
            for (int c = 0; c < 27; ++c) v[c] += m * b[c];
        }
        Z g = 0;
        for (auto& x : v) g = gcd(g, x);
        for (int c = 0; c < 27; ++c) cv[c][k] = g == 0 ? Q(0) : Q(v[c] / g);
    }
    for (int c = 0; c < 27; ++c) coeffs[c] = QPoly(cv[c]);
    std::vector<MarkedSection> secs;
    for (auto& pt : points) secs.push_back(MarkedSection::constant(pt));
    return make_family(coeffs, std::move(word), std::move(secs), "generated-" + std::to_string(seed));
}

}  // namespace heightlab
