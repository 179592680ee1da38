#include "heightlab/greenfield.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace heightlab {

namespace {

constexpr double kUnstable = 1e-10;
constexpr double kSimpleRoot = 1e-3;  // |dQ/dw| relative to the coefficients

double maxnorm(const CPair& p) { return std::max(std::abs(p[0]), std::abs(p[1])); }

CPair unit(const CPair& p, double* log_scale = nullptr) {
    double m = maxnorm(p);
    if (!(m > 0) || !std::isfinite(m)) throw UnstableSpecialization();
    if (log_scale) *log_scale = std::log(m);
    return {p[0] / m, p[1] / m};
}

int coord_index(int i, int ei, int j, int ej, int ek) {
    int e[3];
    e[i] = ei;
    e[j] = ej;
    e[3 - i - j] = ek;
    return SurfaceFamily::index(e[0], e[1], e[2]);
}

Cx eval_z(const ZPoly& p, Cx t) {
    Cx r = 0;
    for (int k = p.degree(); k >= 0; --k) r = r * t + p.coeffs()[k].get_d();
    return r;
}

// Coefficient values of F at t.
struct FormAt {
    std::array<Cx, 27> c;
    double scale = 0;
    FormAt(const SurfaceFamily& fam, Cx t) {
        for (int m = 0; m < 27; ++m) {
            c[m] = eval_z(fam.coeffs[m], t);
            scale += std::abs(c[m]);
        }
    }
    // (A, B, C) of the quadratic in coordinate i along p
    std::array<Cx, 3> quadratic(int i, const ComplexFiberPoint& p) const {
        const int j = std::min((i + 1) % 3, (i + 2) % 3), k = 3 - i - j;
        auto mono = [](const CPair& u) { return std::array<Cx, 3>{u[1] * u[1], u[0] * u[1], u[0] * u[0]}; };
        auto Y = mono(p.c[j]), W = mono(p.c[k]);
        std::array<Cx, 3> out{};
        for (int ei = 0; ei < 3; ++ei) {
            Cx acc = 0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) acc += c[coord_index(i, ei, j, a, b)] * Y[a] * W[b];
            out[2 - ei] = acc;
        }
        return out;
    }
};

// Involution i (0-based) on a unit-normalized point; returns log of the lifted max-norm.
double swap_coordinate(const FormAt& F, int i, ComplexFiberPoint& p) {
    auto [A, B, C] = F.quadratic(i, p);
    const Cx x0 = p.c[i][0], x1 = p.c[i][1];
    Cx cn, an;
    if (std::abs(x0) >= std::abs(x1)) {
        cn = C / x0;
        an = -(B * x0 + C * x1) / (x0 * x0);
    } else {
        cn = -(A * x0 + B * x1) / (x1 * x1);
        an = A / x1;
    }
    double big = std::max({std::abs(A), std::abs(B), std::abs(C)});
    if (!(std::max(std::abs(cn), std::abs(an)) >= kUnstable * big) || big == 0) throw UnstableSpecialization();
    double ls = 0;
    CPair u = unit({cn, an}, &ls);
    // one Newton step on the root in the dominant chart; skipped near a double root, where it would
    // move the point by the square root of the coefficient error while the Vieta image is still accurate
    if (std::abs(u[0]) >= std::abs(u[1])) {
        Cx w = u[1] / u[0];
        Cx g = A + B * w + C * w * w, dg = B + 2.0 * C * w;
        if (std::abs(dg) > kSimpleRoot * big) w -= g / dg;
        u = {1.0, w};
    } else {
        Cx w = u[0] / u[1];
        Cx g = A * w * w + B * w + C, dg = 2.0 * A * w + B;
        if (std::abs(dg) > kSimpleRoot * big) w -= g / dg;
        u = {w, 1.0};
    }
    p.c[i] = unit(u);
    return ls;
}

const std::vector<int>& word_for(const SurfaceFamily& fam, Direction dir, std::vector<int>& storage) {
    if (dir == Direction::Plus) return fam.word;
    storage = fam.reversed_word();
    return storage;
}

// Applies f^{+-1} with log-scale bookkeeping; l holds the log-scales of the input lift.
void lifted_apply(const FormAt& F, const std::vector<int>& w, ComplexFiberPoint& p, std::array<double, 3>& l) {
    for (int i1 : w) {
        const int i = i1 - 1, j = (i + 1) % 3, k = (i + 2) % 3;
        double ls = swap_coordinate(F, i, p);
        l[i] = -l[i] + 2 * l[j] + 2 * l[k] + ls;
    }
}

double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Evaluates a pair at t; for |t| > 1 both entries are divided by t^deg to stay finite.
CPair eval_pair(const ZPair& pr, Cx t, double& log_shift) {
    const long d = pr.degree();
    if (std::abs(t) <= 1) {
        log_shift = 0;
        return {eval_z(pr.p, t), eval_z(pr.q, t)};
    }
    Cx inv = 1.0 / t;
    // Horner on c_d + c_{d-1}/t + ... + c_0/t^d
    auto rev = [&](const ZPoly& q) {
        Cx r = 0;
        for (long k = 0; k <= d; ++k) r = r * inv + q.coeff(static_cast<std::size_t>(d - k)).get_d();
        return r;
    };
    log_shift = static_cast<double>(d) * std::log(std::abs(t));
    return {rev(pr.p), rev(pr.q)};
}

template <class F>
void parallel_for(int n, int threads, F&& body) {
    if (threads <= 1 || n < 2) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    threads = std::min(threads, n);
    std::vector<std::future<void>> fs;
    for (int w = 0; w < threads; ++w)
        fs.push_back(std::async(std::launch::async, [&, w] {
            for (int i = w; i < n; i += threads) body(i);
        }));
    for (auto& f : fs) f.get();
}

}  // namespace

double pairwise_sum(const double* x, std::size_t n) {
    if (n == 0) return 0;
    if (n <= 8) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

ComplexFiberPoint normalized(ComplexFiberPoint p) {
    for (auto& c : p.c) c = unit(c);
    return p;
}

ComplexFiberPoint specialize(const MarkedSection& s, Cx t) {
    ComplexFiberPoint p;
    p.t = t;
    for (int i = 0; i < 3; ++i) {
        double sh = 0;
        p.c[i] = unit(eval_pair(s.c[i], t, sh));
    }
    return p;
}

ComplexFiberPoint to_complex(const FiberPoint& pt, Cx t) {
    ComplexFiberPoint p;
    p.t = t;
    for (int i = 0; i < 3; ++i) {
        long e0 = 0, e1 = 0;
        double m0 = mpz_get_d_2exp(&e0, pt[i][0].get_mpz_t());
        double m1 = mpz_get_d_2exp(&e1, pt[i][1].get_mpz_t());
        long e = std::max(sgn(pt[i][0]) ? e0 : LONG_MIN, sgn(pt[i][1]) ? e1 : LONG_MIN);
        if (e == LONG_MIN) throw UnstableSpecialization();
        p.c[i] = unit({std::ldexp(m0, static_cast<int>(std::max(e0 - e, -2000L))),
                       std::ldexp(m1, static_cast<int>(std::max(e1 - e, -2000L)))});
    }
    return p;
}

double fiber_residual(const SurfaceFamily& fam, const ComplexFiberPoint& p) {
    FormAt F(fam, p.t);
    auto q = F.quadratic(0, p);
    const Cx x0 = p.c[0][0], x1 = p.c[0][1];
    Cx v = q[0] * x0 * x0 + q[1] * x0 * x1 + q[2] * x1 * x1;
    return F.scale > 0 ? std::abs(v) / F.scale : std::abs(v);
}

double chordal_distance(const ComplexFiberPoint& a, const ComplexFiberPoint& b) {
    double d = 0;
    for (int i = 0; i < 3; ++i) {
        const CPair &u = a.c[i], &v = b.c[i];
        double nu = std::hypot(std::abs(u[0]), std::abs(u[1])), nv = std::hypot(std::abs(v[0]), std::abs(v[1]));
        d = std::max(d, std::abs(u[0] * v[1] - u[1] * v[0]) / (nu * nv));
    }
    return d;
}

LiftedStep lifted_step(const SurfaceFamily& fam, const ComplexFiberPoint& p, Direction dir) {
    FormAt F(fam, p.t);
    std::vector<int> st;
    LiftedStep r{normalized(p), {0, 0, 0}};
    lifted_apply(F, word_for(fam, dir, st), r.point, r.log_scale);
    return r;
}

ComplexFiberPoint fiber_map(const SurfaceFamily& fam, const ComplexFiberPoint& p, int power) {
    FormAt F(fam, p.t);
    std::vector<int> st;
    const auto& w = word_for(fam, power >= 0 ? Direction::Plus : Direction::Minus, st);
    ComplexFiberPoint q = normalized(p);
    std::array<double, 3> l{};
    for (int n = 0; n < std::abs(power); ++n) lifted_apply(F, w, q, l);
    return q;
}

GreenContext make_green_context(const HeightContext& ctx) {
    GreenContext g;
    g.lambda = ctx.lambda;
    g.dplus = ctx.lat.dplus.approx();
    g.dminus = ctx.lat.dminus.approx();
    return g;
}

double v0(const SurfaceFamily& fam, const GreenContext& g, const ComplexFiberPoint& p, Direction dir) {
    auto st = lifted_step(fam, p, dir);
    return dot(g.d(dir), st.log_scale) / g.lambda;
}

PotentialSample green_potential(const SurfaceFamily& fam, const GreenContext& g, const ComplexFiberPoint& p,
                                Direction dir, int depth) {
    PotentialSample s;
    s.point = p;
    FormAt F(fam, p.t);
    std::vector<int> st;
    const auto& w = word_for(fam, dir, st);
    const auto& D = g.d(dir);
    ComplexFiberPoint q;
    try {
        q = normalized(p);
        double weight = 1, acc = 0;
        for (int j = 0; j < depth; ++j) {
            std::array<double, 3> l{};
            lifted_apply(F, w, q, l);
            double inc = weight * dot(D, l) / g.lambda;
            s.increments.push_back(inc);
            acc += inc;
            s.u.push_back(acc);
            weight /= g.lambda;
        }
    } catch (const UnstableSpecialization&) {
        s.dropped = true;
    }
    s.n = static_cast<int>(s.u.size());
    s.fitted_ratio = fit_decay_ratio(s.increments, 3);
    return s;
}

double invariance_residual(const SurfaceFamily& fam, const GreenContext& g, const ComplexFiberPoint& p,
                           Direction dir, int depth) {
    auto a = green_potential(fam, g, p, dir, depth);
    ComplexFiberPoint fp = fiber_map(fam, p, dir == Direction::Plus ? 1 : -1);
    auto b = green_potential(fam, g, fp, dir, depth);
    if (a.dropped || b.dropped || a.u.empty() || b.u.empty()) throw UnstableSpecialization();
    return std::abs(a.u.back() - a.increments.front() - b.u.back() / g.lambda);
}

std::vector<Cx> excluded_roots(const SurfaceFamily& fam) {
    if (auto known = fam.excluded->roots(); !known.empty()) return known;
    // per factor, so Aberth works at moderate degree; common roots are merged afterwards
    std::vector<Cx> roots;
    for (int i = 0; i < 3; ++i) {
        const ZPoly& d = cached_delta(fam, i);
        if (d.degree() <= 0) continue;
        QPoly sf = squarefree_part(d.to_q());
        for (Cx w : refine_roots(sf, complex_roots(sf))) {
            if (std::none_of(roots.begin(), roots.end(),
                             [&](Cx k) { return std::abs(k - w) <= 1e-9 * (1 + std::abs(w)); }))
                roots.push_back(w);
        }
    }
    std::sort(roots.begin(), roots.end(), [](Cx a, Cx b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : std::arg(a) < std::arg(b);
    });
    auto known = fam.excluded->roots();
    for (Cx z : roots)
        if (std::none_of(known.begin(), known.end(), [&](Cx k) { return std::abs(k - z) <= 1e-12 * (1 + std::abs(z)); }))
            fam.excluded->add_root(z);
    return roots;
}

PhiValue section_potential(const SurfaceFamily& fam, const GreenContext& g, const MarkedSection& s, Cx t,
                           Direction dir, int depth) {
    PhiValue out;
    FormAt F(fam, t);
    std::vector<int> st;
    const auto& w = word_for(fam, dir, st);
    const auto& D = g.d(dir);
    ComplexFiberPoint q;
    q.t = t;
    std::array<double, 3> l{};
    try {
        for (int i = 0; i < 3; ++i) {
            double sh = 0, ls = 0;
            q.c[i] = unit(eval_pair(s.c[i], t, sh), &ls);
            l[i] = sh + ls;
        }
        double phi = dot(D, l), weight = 1, last = 0, prev = 0;
        for (int j = 0; j < depth; ++j) {
            std::array<double, 3> m{};
            lifted_apply(F, w, q, m);
            weight /= g.lambda;
            double inc = weight * dot(D, m);
            phi += inc;
            prev = last;
            last = inc;
        }
        out.phi = phi;
        out.tail = g.lambda / (g.lambda - 1) * std::max(std::abs(last), std::abs(prev)) / g.lambda;
    } catch (const UnstableSpecialization&) {
        out.dropped = true;
    }
    return out;
}

std::vector<ProfilePoint> potential_profile(const SurfaceFamily& fam, const GreenContext& g, const MarkedSection& s,
                                            Direction dir, double radius, int grid, int depth, int threads) {
    std::vector<ProfilePoint> out(static_cast<std::size_t>(grid));
    const double two_pi = 2 * std::acos(-1.0);
    parallel_for(grid, threads, [&](int k) {
        Cx t = std::polar(radius, two_pi * (k + 0.5) / grid);
        out[k] = {t, section_potential(fam, g, s, t, dir, depth)};
    });
    return out;
}

std::string profile_csv(const std::vector<ProfilePoint>& profile) {
    std::ostringstream os;
    os << std::setprecision(17) << "t_re,t_im,phi,tail\n";
    for (auto& p : profile) {
        os << p.t.real() << "," << p.t.imag() << ",";
        if (p.value.dropped)
            os << ",\n";
        else
            os << p.value.phi << "," << p.value.tail << "\n";
    }
    return os.str();
}

namespace {

struct CircleMean {
    double mean = 0, half_mean = 0, tail = 0;
    int dropped = 0;
};

// Circle average of Phi around c with midpoint nodes; the even-indexed subgrid gives the grid/2 rule.
CircleMean circle_mean(const SurfaceFamily& fam, const GreenContext& g, const MarkedSection& s, Direction dir, Cx c,
                       double r, int grid, int depth, int threads) {
    std::vector<double> v(grid), tails(grid);
    std::vector<char> ok(grid);
    const double two_pi = 2 * std::acos(-1.0);
    parallel_for(grid, threads, [&](int k) {
        Cx t = c + std::polar(r, two_pi * (k + 0.5) / grid);
        auto pv = section_potential(fam, g, s, t, dir, depth);
        ok[k] = !pv.dropped;
        v[k] = pv.dropped ? 0 : pv.phi;
        tails[k] = pv.tail;
    });
    CircleMean m;
    std::vector<double> all, even;
    for (int k = 0; k < grid; ++k) {
        if (!ok[k]) {
            ++m.dropped;
            continue;
        }
        all.push_back(v[k]);
        if (k % 2 == 0) even.push_back(v[k]);
        m.tail = std::max(m.tail, tails[k]);
    }
    if (all.empty()) throw UnstableSpecialization();
    m.mean = pairwise_sum(all.data(), all.size()) / static_cast<double>(all.size());
    m.half_mean = even.empty() ? m.mean : pairwise_sum(even.data(), even.size()) / static_cast<double>(even.size());
    return m;
}

struct Slope {
    double value = 0, quadrature = 0, tail = 0;
    int dropped = 0;
};

Slope jensen_slope(const SurfaceFamily& fam, const GreenContext& g, const MarkedSection& s, Direction dir, Cx c,
                   double r1, double r2, int grid, int depth, int threads) {
    auto a = circle_mean(fam, g, s, dir, c, r1, grid, depth, threads);
    auto b = circle_mean(fam, g, s, dir, c, r2, grid, depth, threads);
    double L = std::log(r2 / r1);
    Slope sl;
    sl.value = (b.mean - a.mean) / L;
    sl.quadrature = std::abs((b.half_mean - a.half_mean) / L - sl.value);
    sl.tail = (a.tail + b.tail) / L;
    sl.dropped = a.dropped + b.dropped;
    return sl;
}

// Keeps the circle |t| = r at least `gap` (relative) away from every root.
double clear_radius(double r, const std::vector<Cx>& roots, double gap = 1e-3) {
    for (int it = 0; it < 64; ++it) {
        bool hit = false;
        for (Cx z : roots)
            if (std::abs(std::abs(z) - r) < gap * r) hit = true;
        if (!hit) return r;
        r *= 1.0 + 4 * gap;
    }
    return r;
}

DegenerationFit degeneration_fit(const SurfaceFamily& fam, const GreenContext& g, const MarkedSection& s,
                                 Direction dir, Cx t0, double reach, int depth) {
    DegenerationFit fit;
    fit.t0 = t0;
    std::vector<double> xs, ys;
    const double two_pi = 2 * std::acos(-1.0);
    for (int e = 1; e <= 8; ++e) {
        double eps = reach * std::pow(10.0, -0.75 * (e - 1));
        for (int d = 0; d < 8; ++d) {
            Cx t = t0 + std::polar(eps, two_pi * (d + 0.25) / 8);
            auto pv = section_potential(fam, g, s, t, dir, depth);
            auto base = section_potential(fam, g, s, t, dir, 0);
            if (pv.dropped || base.dropped) continue;
            xs.push_back(std::max(0.0, -std::log(eps)));
            ys.push_back(std::abs(pv.phi - base.phi));
        }
    }
    fit.samples = static_cast<int>(xs.size());
    if (xs.size() < 3) return fit;
    // least-squares slope, then the smallest intercept making the line an upper envelope
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    fit.c1 = sxx > 0 ? std::max(0.0, sxy / sxx) : 0;
    double res = 0;
    fit.c2 = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < xs.size(); ++k) {
        fit.c2 = std::max(fit.c2, ys[k] - fit.c1 * xs[k]);
        double r = ys[k] - my - (sxx > 0 ? sxy / sxx : 0) * (xs[k] - mx);
        res += r * r;
    }
    if (sxx > 0 && xs.size() > 2) fit.slope_error = std::sqrt(res / (xs.size() - 2) / sxx);
    return fit;
}

}  // namespace

MassReport mass_vs_height(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s, Direction dir,
                          const MassOptions& opt) {
    auto h = canonical_height(fam, ctx, s, dir, std::max(opt.height_n, 2), opt.orbit);
    return mass_vs_height(fam, ctx, s, dir, opt, h);
}

MassReport mass_vs_height(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s, Direction dir,
                          const MassOptions& opt, const HeightEstimate& hhat) {
    if (!(opt.r1 > 0 && opt.r2 > opt.r1)) throw std::invalid_argument("radii must satisfy 0 < r1 < r2");
    if (opt.grid < 8) throw std::invalid_argument("grid must be at least 8");
    if (opt.depth < 1) throw std::invalid_argument("depth must be positive");
    const GreenContext g = make_green_context(ctx);
    MassReport rep;
    rep.dir = dir;
    rep.grid = opt.grid;
    rep.depth = opt.depth;
    rep.hhat = hhat;

    const auto roots = excluded_roots(fam);
    rep.r1 = clear_radius(opt.r1, roots);
    rep.r2 = clear_radius(std::max(opt.r2, rep.r1 * 1.5), roots);
    const double L = std::log(rep.r2 / rep.r1);

    auto main = jensen_slope(fam, g, s, dir, 0, rep.r1, rep.r2, opt.grid, opt.depth, opt.threads);
    rep.raw_slope = main.value;
    rep.dropped = main.dropped;

    // Point masses at excluded parameters: Jensen slopes on small circles, radii tied to the local separation.
    const int agrid = std::max(32, opt.grid / 8);
    double atom_sum = 0, atom_err = 0;
    for (std::size_t a = 0; a < roots.size(); ++a) {
        Cx z = roots[a];
        double w;
        if (std::abs(z) <= rep.r1)
            w = 1;
        else if (std::abs(z) < rep.r2)
            w = std::log(rep.r2 / std::abs(z)) / L;
        else
            continue;
        double sep = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < roots.size(); ++b)
            if (b != a) sep = std::min(sep, std::abs(roots[b] - z));
        double rho2 = std::min(1e-3 * std::max(1.0, std::abs(z)), 0.3 * sep), rho1 = rho2 / 100;
        AtomMass am{z, 0, 0, w};
        try {
            auto sl = jensen_slope(fam, g, s, dir, z, rho1, rho2, agrid, opt.depth, opt.threads);
            auto alt = jensen_slope(fam, g, s, dir, z, rho1 / 10, rho2 / 10, agrid, opt.depth, opt.threads);
            am.mass = sl.value;
            am.uncertainty = std::abs(sl.value - alt.value) + sl.quadrature + sl.tail;
        } catch (const UnstableSpecialization&) {
            am.uncertainty = std::numeric_limits<double>::infinity();
        }
        atom_sum += w * am.mass;
        atom_err += w * am.uncertainty;
        rep.atoms.push_back(am);
    }

    rep.estimate = main.value - atom_sum;
    rep.tail = main.tail;
    rep.quadrature = main.quadrature;
    rep.atom_error = atom_err;
    rep.uncertainty = rep.tail + rep.quadrature + rep.atom_error;

    // Psi_r window: slope on (r2, r2^2); ddc log max(|t|, R) is the normalized circle measure.
    {
        const double q1 = rep.r2, q2 = clear_radius(rep.r2 * rep.r2, roots);
        auto ps = jensen_slope(fam, g, s, dir, 0, q1, q2, opt.grid, opt.depth, opt.threads);
        const double Lq = std::log(q2 / q1);
        double asum = 0, aerr = 0;
        for (std::size_t a = 0; a < roots.size(); ++a) {
            double az = std::abs(roots[a]);
            double w = az <= q1 ? 1 : (az < q2 ? std::log(q2 / az) / Lq : 0);
            if (w == 0) continue;
            auto it = std::find_if(rep.atoms.begin(), rep.atoms.end(), [&](const AtomMass& m) { return m.t == roots[a]; });
            if (it == rep.atoms.end()) continue;
            asum += w * it->mass;
            aerr += w * it->uncertainty;
        }
        rep.psi_estimate = ps.value - asum;
        rep.psi_uncertainty = ps.tail + ps.quadrature + aerr;
        rep.dropped += ps.dropped;
    }
    rep.estimators_agree =
        std::abs(rep.estimate - rep.psi_estimate) <= rep.uncertainty + rep.psi_uncertainty + 1e-9;

    // Degeneration profile toward the excluded parameters carrying the largest atoms.
    {
        std::vector<std::size_t> idx(rep.atoms.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return std::abs(rep.atoms[a].mass) > std::abs(rep.atoms[b].mass); });
        for (std::size_t k = 0; k < std::min<std::size_t>(2, idx.size()); ++k) {
            Cx z = rep.atoms[idx[k]].t;
            double sep = std::numeric_limits<double>::infinity();
            for (Cx o : roots)
                if (o != z) sep = std::min(sep, std::abs(o - z));
            rep.degeneration.push_back(degeneration_fit(fam, g, s, dir, z, std::min(0.1, 0.3 * sep), opt.depth));
        }
    }

    const double h = hhat.value;
    if (std::abs(h) > 1e-9) rep.ratio = rep.estimate / h;
    std::ostringstream why;
    const double scale = std::max({std::abs(rep.estimate), std::abs(h), 1e-6});
    if (rep.tail > 0.1 * scale) {
        rep.inconclusive = true;
        why << "depth tail bound " << rep.tail << " exceeds 10% of the estimate; increase --depth. ";
    }
    if (rep.ratio && (*rep.ratio < 0.8 || *rep.ratio > 1.2)) {
        rep.inconclusive = true;
        why << "mass/height ratio " << *rep.ratio << " outside [0.8, 1.2] (tail " << rep.tail << ", quadrature "
            << rep.quadrature << ", atoms " << rep.atom_error << "). ";
    }
    if (!rep.ratio && std::abs(rep.estimate) >= 0.05) {
        rep.inconclusive = true;
        why << "height is zero but mass estimate " << rep.estimate << " is not small. ";
    }
    if (roots.empty() && cached_delta(fam, 0).is_zero())
        why << "no degenerate-parameter data (Delta vanishes identically); atoms not subtracted. ";
    rep.diagnosis = why.str();
    if (!rep.diagnosis.empty() && rep.diagnosis.back() == ' ') rep.diagnosis.pop_back();
    return rep;
}

std::string mass_csv(const std::vector<MassReport>& reports) {
    std::ostringstream os;
    os << std::setprecision(17) << "direction,r1,r2,estimate,hhat,ratio,uncertainty,psi_estimate,inconclusive\n";
    for (auto& r : reports) {
        os << (r.dir == Direction::Plus ? "+" : "-") << "," << r.r1 << "," << r.r2 << "," << r.estimate << ","
           << r.hhat.value << ",";
        if (r.ratio) os << *r.ratio;
        os << "," << r.uncertainty << "," << r.psi_estimate << "," << (r.inconclusive ? 1 : 0) << "\n";
    }
    return os.str();
}

}  // namespace heightlab
