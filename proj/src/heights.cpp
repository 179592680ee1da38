#include "heightlab/heights.hpp"

#include "heightlab/report.hpp"
#include "heightlab/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace heightlab {

namespace {

std::string orbit_key(const SurfaceFamily& fam, const MarkedSection& s, Direction dir, int n) {
    std::ostringstream os;
    os << "orbit|" << fam.canonical() << '|' << s.canonical() << '|' << (dir == Direction::Plus ? '+' : '-') << '|'
       << n;
    return os.str();
}

std::string encode(const OrbitRecord& r) {
    std::ostringstream os;
    os << r.degrees[0] << ' ' << r.degrees[1] << ' ' << r.degrees[2] << ' ' << r.exact << ' ' << r.flagged;
    return os.str();
}

bool decode(const std::string& v, OrbitRecord& r) {
    std::istringstream is(v);
    return static_cast<bool>(is >> r.degrees[0] >> r.degrees[1] >> r.degrees[2] >> r.exact >> r.flagged);
}

// Degrees of f^(steps) from a loaded shadow; one entry per word application.
std::vector<Degrees> run_shadow(const SurfaceFamily& fam, uint64_t p, const MarkedSection& start,
                                const std::vector<int>& word, int steps) {
    ShadowOrbit sh(fam, p);
    sh.load(start);
    std::vector<Degrees> out;
    for (int m = 0; m < steps; ++m) {
        sh.apply_word(word);
        out.push_back(sh.degrees());
    }
    return out;
}

}  // namespace

Orbit compute_orbit(const SurfaceFamily& fam, const MarkedSection& s, Direction dir, int max_n,
                    const OrbitOptions& opt) {
    const std::vector<int> word = dir == Direction::Plus ? fam.word : fam.reversed_word();
    const int sign = dir == Direction::Plus ? 1 : -1;
    Orbit o;
    o.records.push_back({0, s.degrees(), true, false});
    if (opt.keep_sections) o.exact_sections.push_back(s);
    MarkedSection cur = s;
    int n = 0;
    while (n < max_n) {
        Degrees d = cur.degrees();
        bool fits = true;
        for (int i : word) {
            long b = involution_degree_bound(fam, i, d);
            if (b > opt.degree_cap) {
                fits = false;
                break;
            }
            d[i - 1] = b;
        }
        if (!fits) break;
        try {
            for (int i : word) cur = involution_apply(fam, i, cur).section;
        } catch (const DegenerateSection& e) {
            o.partial = true;
            o.degenerate = true;
            o.note = std::string(e.what()) + " at n = " + std::to_string(sign * (n + 1));
            return o;
        }
        ++n;
        o.records.push_back({sign * n, cur.degrees(), true, false});
        if (opt.keep_sections) o.exact_sections.push_back(cur);
    }
    if (n == max_n) return o;

    DegreeCache cache = opt.use_cache ? DegreeCache::from_env() : DegreeCache();
    if (cache.enabled()) {
        std::vector<OrbitRecord> hit;
        for (int m = n + 1; m <= max_n; ++m) {
            auto v = cache.get(orbit_key(fam, s, dir, m));
            OrbitRecord r;
            if (!v || !decode(*v, r)) break;
            r.n = sign * m;
            hit.push_back(r);
        }
        if (static_cast<int>(hit.size()) == max_n - n) {
            o.records.insert(o.records.end(), hit.begin(), hit.end());
            o.note = "shadow degrees from cache";
            return o;
        }
    }

    const int steps = max_n - n;
    const int need = std::max(opt.primes, 1);
    std::vector<std::vector<Degrees>> runs;
    auto candidates = ntt_primes(need + 16);
    std::size_t next = 0;
    std::string failure;
    while (static_cast<int>(runs.size()) < need && next < candidates.size()) {
        const int batch = std::max(1, std::min(opt.threads, need - static_cast<int>(runs.size())));
        std::vector<std::pair<uint64_t, std::future<std::vector<Degrees>>>> jobs;
        for (int b = 0; b < batch && next < candidates.size(); ++b, ++next) {
            uint64_t p = candidates[next];
            jobs.emplace_back(p, std::async(batch > 1 ? std::launch::async : std::launch::deferred, run_shadow,
                                            std::cref(fam), p, std::cref(cur), std::cref(word), steps));
        }
        for (auto& [p, f] : jobs) {
            try {
                runs.push_back(f.get());
                o.primes.push_back(p);
            } catch (const PrimeRejected&) {
            } catch (const DegenerateSection& e) {
                failure = e.what();
                o.degenerate = true;
            } catch (const std::exception& e) {
                failure = e.what();
            }
        }
        if (!failure.empty()) break;
    }
    if (runs.empty() || !failure.empty()) {
        o.partial = true;
        o.note = failure.empty() ? "no admissible prime for shadows" : failure;
        return o;
    }
    for (int m = 0; m < steps; ++m) {
        OrbitRecord r{sign * (n + m + 1), runs[0][m], false, false};
        for (auto& run : runs)
            for (int c = 0; c < 3; ++c) {
                if (run[m][c] != r.degrees[c]) r.flagged = true;
                r.degrees[c] = std::max(r.degrees[c], run[m][c]);
            }
        o.records.push_back(r);
        cache.put(orbit_key(fam, s, dir, n + m + 1), encode(r));
    }
    return o;
}

std::optional<int> detect_period(const SurfaceFamily& fam, const MarkedSection& s, int max_period, long degree_cap) {
    MarkedSection cur = s;
    for (int m = 1; m <= max_period; ++m) {
        try {
            cur = automorphism_apply(fam, cur, 1, degree_cap);
        } catch (const MathError&) {
            return std::nullopt;
        }
        if (cur == s) return m;
    }
    return std::nullopt;
}

HeightContext make_height_context(const SurfaceFamily& fam) {
    HeightContext ctx;
    ctx.lat = lattice_data(fam.word);
    ctx.total = ctx.lat.dplus + ctx.lat.dminus;
    ctx.lambda = ctx.lat.lambda;
    return ctx;
}

QNum naive_height(const HeightContext& ctx, const Degrees& d, HeightDirection dir) {
    switch (dir) {
        case HeightDirection::Plus:
            return degree_pairing(ctx.lat.dplus, d);
        case HeightDirection::Minus:
            return degree_pairing(ctx.lat.dminus, d);
        default:
            return degree_pairing(ctx.total, d);
    }
}

QNum naive_height(const HeightContext& ctx, const MarkedSection& s, HeightDirection dir) {
    return naive_height(ctx, s.degrees(), dir);
}

double fit_decay_ratio(const std::vector<double>& x, int start) {
    std::vector<std::pair<double, double>> pts;
    for (int n = std::max(start, 0); n < static_cast<int>(x.size()); ++n)
        if (x[n] != 0 && std::isfinite(x[n])) pts.emplace_back(n, std::log(std::fabs(x[n])));
    if (pts.size() < 2) return 0;
    std::vector<double> slopes;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b)
            slopes.push_back((pts[b].second - pts[a].second) / (pts[b].first - pts[a].first));
    std::sort(slopes.begin(), slopes.end());
    const std::size_t m = slopes.size();
    double med = m % 2 ? slopes[m / 2] : 0.5 * (slopes[m / 2 - 1] + slopes[m / 2]);
    return std::exp(med);
}

HeightEstimate estimate_from_orbit(const HeightContext& ctx, Direction dir, const Orbit& orbit) {
    const DivisorClass& D = dir == Direction::Plus ? ctx.lat.dplus : ctx.lat.dminus;
    HeightEstimate est;
    est.partial = orbit.partial;
    est.note = orbit.note;
    const auto& K = D.coeffs[0].field();
    QNum lam_inv = QNum::gen(K).inv();
    QNum scale(K, Q(1));
    std::vector<double> h;
    for (auto& r : orbit.records) {
        QNum v = degree_pairing(D, r.degrees) * scale;
        h.push_back(v.to_double());
        est.sequence.emplace_back(r.n, h.back());
        est.degrees.push_back(r.degrees);
        est.flagged.push_back(r.flagged);
        scale = scale * lam_inv;
    }
    const int N = static_cast<int>(h.size()) - 1;
    est.n_used = N;
    est.value = h.back();
    std::vector<double> inc;
    for (int k = 0; k < N; ++k) inc.push_back(h[k + 1] - h[k]);
    const double cf = ctx.lambda / (ctx.lambda - 1);
    double tail = 0;
    for (int k = std::max(0, N - 2); k < N; ++k) tail = std::max(tail, std::fabs(inc[k]));
    est.error_bound = N > 0 ? cf * tail : std::numeric_limits<double>::infinity();
    est.fitted_ratio = fit_decay_ratio(inc, 1);
    if (est.value < 0) {
        est.error_bound += -est.value;
        est.value = 0;
    }
    return est;
}

HeightEstimate canonical_height(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s,
                                Direction dir, int max_n, const OrbitOptions& opt) {
    if (max_n < 2) throw std::invalid_argument("max_n must be at least 2");
    OrbitOptions o = opt;
    o.keep_sections = true;
    Orbit orbit = compute_orbit(fam, s, dir, max_n, o);
    HeightEstimate est = estimate_from_orbit(ctx, dir, orbit);
    for (std::size_t m = 1; m < orbit.exact_sections.size(); ++m)
        if (orbit.exact_sections[m] == s) {
            est.period = static_cast<int>(m);
            est.value = 0;
            est.error_bound = 0;
            est.certified = true;
            break;
        }
    return est;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Periodic:
            return "periodic";
        case Verdict::StableNonperiodicFlagged:
            return "stable_nonperiodic_flagged";
        case Verdict::Unstable:
            return "unstable";
        default:
            return "undetermined";
    }
}

std::string StabilityVerdict::str() const {
    if (tag == Verdict::Periodic) return "periodic(" + std::to_string(period) + ")";
    return verdict_name(tag);
}

StabilityVerdict classify(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s, double gap_eps,
                          int max_n, int max_period, const OrbitOptions& opt) {
    if (!(gap_eps > 0)) throw std::invalid_argument("gap_eps must be positive");
    OrbitOptions o = opt;
    o.keep_sections = true;
    Orbit fwd = compute_orbit(fam, s, Direction::Plus, max_n, o);
    Orbit bwd = compute_orbit(fam, s, Direction::Minus, max_n, o);
    return classify_orbits(fam, ctx, s, fwd, bwd, gap_eps, max_n, max_period, o.degree_cap);
}

StabilityVerdict classify_orbits(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s,
                                 const Orbit& fwd, const Orbit& bwd, double gap_eps, int max_n, int max_period,
                                 long degree_cap) {
    if (!(gap_eps > 0)) throw std::invalid_argument("gap_eps must be positive");
    StabilityVerdict v;
    v.gap_eps = gap_eps;
    for (auto& r : fwd.records) v.forward.push_back(r.degrees);
    for (auto& r : bwd.records) v.backward.push_back(r.degrees);

    // (a) exact cycles
    std::optional<int> period;
    for (std::size_t m = 1; m < fwd.exact_sections.size() && static_cast<int>(m) <= max_period; ++m)
        if (fwd.exact_sections[m] == s) {
            period = static_cast<int>(m);
            break;
        }
    const bool all_exact = static_cast<int>(fwd.exact_sections.size()) == max_n + 1;
    HeightEstimate hp = estimate_from_orbit(ctx, Direction::Plus, fwd);
    HeightEstimate hm = estimate_from_orbit(ctx, Direction::Minus, bwd);
    // same gap test as the unstable verdict; a cycle would have height 0
    const bool positive = hp.value + hm.value - hp.error_bound - hm.error_bound > gap_eps;
    if (!period && all_exact && max_period > max_n && !positive) {
        // continue exactly from the last iterate already computed
        MarkedSection cur = fwd.exact_sections.back();
        for (int m = max_n + 1; m <= max_period; ++m) {
            try {
                cur = automorphism_apply(fam, cur, 1, degree_cap);
            } catch (const MathError&) {
                break;
            }
            if (cur == s) {
                period = m;
                break;
            }
        }
    }

    // (b) degree ceiling
    auto hD = [&](const Degrees& d) { return naive_height(ctx, d, HeightDirection::Total).to_double(); };
    v.naive = hD(s.degrees());
    double excess = 0;
    for (auto* seq : {&v.forward, &v.backward})
        for (std::size_t n = 0; n < seq->size() && 2 * static_cast<int>(n) <= max_n; ++n)
            excess = std::max(excess, hD((*seq)[n]) - v.naive);
    v.c_f = excess + ctx.lambda / (ctx.lambda - 1);
    v.ceiling = v.naive + v.c_f;
    auto bounded = [&](const std::vector<Degrees>& seq, bool partial) {
        if (partial || static_cast<int>(seq.size()) != max_n + 1) return false;
        for (auto& d : seq)
            if (hD(d) > v.ceiling + 1e-12) return false;
        return true;
    };
    v.forward_bounded = bounded(v.forward, fwd.partial);
    v.backward_bounded = bounded(v.backward, bwd.partial);

    if (period) {
        v.tag = Verdict::Periodic;
        v.period = *period;
        v.hhat = 0;
        v.hhat_error = 0;
        return v;
    }
    v.hhat = hp.value + hm.value;
    v.hhat_error = hp.error_bound + hm.error_bound;
    if (v.forward_bounded && v.backward_bounded) {
        v.tag = Verdict::StableNonperiodicFlagged;
        v.note = "bounded degrees without a cycle of length <= " + std::to_string(max_period) +
                 "; periodic unless isotrivial or inside B+ (check periodic-classes)";
        if (naive_height(ctx, s, HeightDirection::Total).is_zero())
            v.note += "; B+ candidate: degree triple pairs to zero against D";
        return v;
    }
    if (v.hhat - v.hhat_error > gap_eps) {
        v.tag = Verdict::Unstable;
    } else {
        v.tag = Verdict::Undetermined;
        if (fwd.partial || bwd.partial) v.note = fwd.partial ? fwd.note : bwd.note;
    }
    return v;
}

ArithmeticDegree arithmetic_degree_from_orbit(const Orbit& orbit) {
    ArithmeticDegree a;
    a.partial = orbit.partial;
    for (auto& r : orbit.records) a.h_ample.push_back(1.0 + r.degrees[0] + r.degrees[1] + r.degrees[2]);
    const int N = static_cast<int>(a.h_ample.size()) - 1;
    if (N < 1) return a;
    a.lower = std::numeric_limits<double>::infinity();
    a.upper = 0;
    for (int n = std::max(1, N - 2); n <= N; ++n) {
        double r = std::pow(a.h_ample[n], 1.0 / n);
        a.lower = std::min(a.lower, r);
        a.upper = std::max(a.upper, r);
    }
    a.point = a.h_ample[N] / a.h_ample[N - 1];
    return a;
}

ArithmeticDegree arithmetic_degree(const SurfaceFamily& fam, const MarkedSection& s, int max_n,
                                   const OrbitOptions& opt) {
    OrbitOptions o = opt;
    o.keep_sections = true;
    Orbit orbit = compute_orbit(fam, s, Direction::Plus, max_n, o);
    for (std::size_t m = 1; m < orbit.exact_sections.size(); ++m)
        if (orbit.exact_sections[m] == s) {
            ArithmeticDegree a = arithmetic_degree_from_orbit(orbit);
            a.lower = a.upper = a.point = 1;
            a.exact = true;
            return a;
        }
    return arithmetic_degree_from_orbit(orbit);
}

}  // namespace heightlab
