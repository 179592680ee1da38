#include "heightlab/cli.hpp"

#include "heightlab/greenfield.hpp"
#include "heightlab/heights.hpp"
#include "heightlab/nslattice.hpp"
#include "heightlab/polyparse.hpp"
#include "heightlab/report.hpp"
#include "heightlab/wehler.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

namespace heightlab {

using nlohmann::json;

namespace {

const std::vector<std::pair<Command, std::string>> kCommands = {
    {Command::Lambda, "lambda"},       {Command::Eigendivisors, "eigendivisors"},
    {Command::PeriodicClasses, "periodic-classes"}, {Command::Iterate, "iterate"},
    {Command::Height, "height"},       {Command::Classify, "classify"},
    {Command::Alpha, "alpha"},         {Command::Green, "green"},
    {Command::MassCheck, "mass-check"},
};

struct Degenerate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool ends_with(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

json exact_num(const QNum& v) { return {{"value", v.to_double()}, {"tag", "exact"}, {"algebraic", v.str()}}; }
json exact_real(double v) { return {{"value", v}, {"tag", "exact"}}; }

json algebraic(const AlgebraicReal& a) {
    AlgebraicReal r = a.is_exact_point() ? a : a.refine(Q("1/1000000000000000000000000000000"));
    json j = measured(r.to_double(), Q(r.hi() - r.lo()).get_d());
    j["minimal_polynomial"] = r.minimal_polynomial().str('x');
    j["interval"] = {r.lo().get_str(), r.hi().get_str()};
    return j;
}

json divisor_json(const DivisorClass& d) {
    json c = json::array();
    for (auto& x : d.coeffs) c.push_back(exact_num(x));
    return c;
}

json degrees_json(const OrbitRecord& r, std::size_t primes) {
    json j = {{"n", r.n}, {"value", {r.degrees[0], r.degrees[1], r.degrees[2]}}};
    if (r.exact) {
        j["tag"] = "exact";
    } else {
        j["uncertainty"] = 0;
        j["source"] = "mod-p";
        j["primes"] = primes;
        j["flagged"] = r.flagged;
    }
    return j;
}

void check_config(const RunConfig& c) {
    if (c.family_path.empty()) throw ValidationError("--family is required");
    if (c.max_n < 1 || c.max_period < 1 || c.depth < 1 || c.grid < 8 || c.primes < 1 || c.threads < 1)
        throw ValidationError("bounds must be positive (grid >= 8)");
    if (!(c.gap_eps > 0)) throw ValidationError("--gap-eps must be positive");
    if (!(c.r1 > 0 && c.r2 > c.r1)) throw ValidationError("--radii must satisfy 0 < r1 < r2");
}

OrbitOptions orbit_options(const RunConfig& c) {
    OrbitOptions o;
    o.primes = std::max(c.primes, 2);
    o.threads = c.threads;
    o.keep_sections = true;
    return o;
}

const std::vector<MarkedSection>& sections_of(const SurfaceFamily& fam) {
    if (fam.sections.empty()) throw ValidationError("family has no sections");
    return fam.sections;
}

json header(const RunConfig& c, const SurfaceFamily& fam) {
    return {{"command", command_name(c.command)},
            {"family", fam.name.empty() ? c.family_path : fam.name},
            {"family_hash", hex64(fnv1a64(fam.canonical()))},
            {"word", fam.word},
            {"seed", c.seed}};
}

// spread of consecutive increment ratios around the fitted ratio
double ratio_spread(const HeightEstimate& h) {
    double s = 0;
    for (std::size_t k = 2; k + 1 < h.sequence.size(); ++k) {
        double a = h.sequence[k].second - h.sequence[k - 1].second;
        double b = h.sequence[k + 1].second - h.sequence[k].second;
        if (a != 0) s = std::max(s, std::abs(b / a - h.fitted_ratio));
    }
    return s;
}

json height_json(const HeightEstimate& h, const Orbit& orbit, const HeightContext& ctx) {
    json seq = json::array();
    for (std::size_t k = 0; k < h.sequence.size(); ++k) {
        const auto& rec = orbit.records[k];
        json e = {{"n", h.sequence[k].first}, {"value", h.sequence[k].second}};
        if (rec.exact) {
            e["tag"] = "exact";
        } else {
            e["uncertainty"] = 0;
            e["source"] = "mod-p";
        }
        seq.push_back(e);
    }
    json j = measured(h.value, h.error_bound);
    j["certified"] = h.certified;
    j["partial"] = h.partial;
    j["n_used"] = h.n_used;
    j["sequence"] = seq;
    j["decay_ratio"] = measured(h.fitted_ratio, ratio_spread(h));
    j["decay_reference"] = exact_real(1 / ctx.lambda);
    if (h.period) j["period"] = *h.period;
    if (!h.note.empty()) j["note"] = h.note;
    return j;
}

json verdict_json(const StabilityVerdict& v) {
    json j = {{"tag", verdict_name(v.tag)},
              {"gap_eps", exact_real(v.gap_eps)},
              {"naive_height", exact_real(v.naive)},
              {"c_f", exact_real(v.c_f)},
              {"ceiling", exact_real(v.ceiling)},
              {"forward_bounded", v.forward_bounded},
              {"backward_bounded", v.backward_bounded},
              {"hhat", measured(v.hhat, v.hhat_error)}};
    if (v.tag == Verdict::Periodic) j["period"] = v.period;
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

json alpha_json(const ArithmeticDegree& a, double lambda) {
    json h = json::array();
    for (double x : a.h_ample) h.push_back(static_cast<long long>(x));  // 1 + total degree, an integer
    auto m = [&](double v) {
        return a.exact ? exact_real(v) : measured(v, std::max(std::abs(v - a.lower), std::abs(a.upper - v)));
    };
    return {{"lower", m(a.lower)},
            {"upper", m(a.upper)},
            {"point", m(a.point)},
            {"lambda", exact_real(lambda)},
            {"exact", a.exact},
            {"partial", a.partial},
            {"h_ample", exact(h)}};
}

struct SectionOrbits {
    Orbit fwd, bwd;
};

SectionOrbits orbits_for(const SurfaceFamily& fam, const MarkedSection& s, const RunConfig& c, bool backward = true) {
    auto o = orbit_options(c);
    SectionOrbits r{compute_orbit(fam, s, Direction::Plus, c.max_n, o), {}};
    if (backward) r.bwd = compute_orbit(fam, s, Direction::Minus, c.max_n, o);
    if (r.fwd.degenerate || r.bwd.degenerate)
        throw Degenerate(r.fwd.degenerate ? r.fwd.note : r.bwd.note);
    return r;
}

// ------------------------------------------------------------------ commands

struct Out {
    json j;
    std::string csv;  // when the command has a CSV form
    bool inconclusive = false;
};

Out cmd_lambda(const SurfaceFamily& fam) {
    auto invs = wehler_involutions();
    auto comp = compose_word(invs, fam.word);
    auto spec = spectrum(comp.map);
    auto inv = spectrum(comp.map.inverse());
    Out o;
    o.j["charpoly"] = exact(spec.charpoly.str('x'));
    json f = json::array();
    for (auto& p : spec.factors) f.push_back(p.str('x'));
    o.j["factors"] = exact(f);
    o.j["salem_factor"] = spec.salem_factor ? exact(spec.salem_factor->str('x')) : json(nullptr);
    o.j["hyperbolic"] = is_hyperbolic(comp.map);
    o.j["identity_warning"] = comp.identity_warning;
    o.j["lambda_plus"] = algebraic(spec.lambda);
    o.j["lambda_minus"] = algebraic(inv.lambda);
    o.j["lambda_equal_exactly"] = spec.lambda.minimal_polynomial() == inv.lambda.minimal_polynomial() &&
                                  !(spec.lambda.hi() < inv.lambda.lo() || inv.lambda.hi() < spec.lambda.lo());
    json roots = json::array();
    for (auto z : spec.other_roots) roots.push_back(measured(std::abs(z), 1e-12));
    o.j["other_root_moduli"] = roots;
    o.j["max_unit_deviation"] = measured(spec.max_unit_deviation, 1e-12);
    return o;
}

Out cmd_eigendivisors(const SurfaceFamily& fam) {
    auto lat = lattice_data(fam.word);
    auto f = IntersectionForm::wehler();
    DivisorClass d = lat.dplus + lat.dminus;
    auto cert = big_nef_check(d, lat.dplus, lat.dminus, f);
    Out o;
    o.j["lambda"] = algebraic(lat.spec.lambda);
    o.j["d_plus"] = divisor_json(lat.dplus);
    o.j["d_minus"] = divisor_json(lat.dminus);
    o.j["d"] = divisor_json(d);
    o.j["d_plus_squared"] = exact_num(pairing(f, lat.dplus, lat.dplus));
    o.j["d_minus_squared"] = exact_num(pairing(f, lat.dminus, lat.dminus));
    o.j["d_plus_d_minus"] = exact_num(pairing(f, lat.dplus, lat.dminus));
    json hyp = json::array();
    for (auto& x : cert.with_hyperplanes) hyp.push_back(exact_num(x));
    o.j["certificate"] = {{"big_and_nef", cert.big_and_nef},
                          {"self_intersection", exact_num(cert.self_intersection)},
                          {"with_plus", exact_num(cert.with_plus)},
                          {"with_minus", exact_num(cert.with_minus)},
                          {"with_hyperplanes", hyp},
                          {"assumption", cert.assumption}};
    return o;
}

Out cmd_periodic_classes(const SurfaceFamily& fam, const RunConfig& c) {
    auto comp = compose_word(wehler_involutions(), fam.word);
    auto pc = periodic_curve_classes(comp.map, -2, c.max_period, c.max_n, IntersectionForm::wehler(), c.threads);
    Out o;
    json orbits = json::array();
    for (auto& orb : pc.orbits) {
        json cl = json::array();
        for (auto& v : orb) cl.push_back({v[0].get_si(), v[1].get_si(), v[2].get_si()});
        orbits.push_back(exact(cl));
    }
    o.j["selfint"] = -2;
    o.j["order_bound"] = c.max_period;
    o.j["height_bound"] = c.max_n;
    o.j["orbits"] = orbits;
    o.j["label"] = pc.label;
    return o;
}

Out cmd_iterate(const SurfaceFamily& fam, const RunConfig& c) {
    Out o;
    json secs = json::array();
    for (std::size_t k = 0; k < sections_of(fam).size(); ++k) {
        auto ob = orbits_for(fam, fam.sections[k], c);
        json fw = json::array(), bw = json::array();
        for (auto& r : ob.fwd.records) fw.push_back(degrees_json(r, ob.fwd.primes.size()));
        for (auto& r : ob.bwd.records) bw.push_back(degrees_json(r, ob.bwd.primes.size()));
        json e = {{"index", k}, {"section", fam.sections[k].str()}, {"forward", fw}, {"backward", bw}};
        if (ob.fwd.partial || ob.bwd.partial) {
            e["partial"] = true;
            e["note"] = ob.fwd.partial ? ob.fwd.note : ob.bwd.note;
            o.inconclusive = true;
        }
        secs.push_back(e);
    }
    o.j["sections"] = secs;
    return o;
}

Out cmd_height_like(const SurfaceFamily& fam, const RunConfig& c) {
    auto ctx = make_height_context(fam);
    Out o;
    json secs = json::array();
    for (std::size_t k = 0; k < sections_of(fam).size(); ++k) {
        const auto& s = fam.sections[k];
        auto ob = orbits_for(fam, s, c, c.command != Command::Alpha);
        json e = {{"index", k}, {"section", s.str()}};
        StabilityVerdict v;
        if (c.command != Command::Alpha) {
            v = classify_orbits(fam, ctx, s, ob.fwd, ob.bwd, c.gap_eps, c.max_n, c.max_period);
            e["verdict"] = verdict_json(v);
            if (v.tag == Verdict::Undetermined) o.inconclusive = true;
        }
        if (c.command == Command::Height) {
            auto hp = estimate_from_orbit(ctx, Direction::Plus, ob.fwd);
            auto hm = estimate_from_orbit(ctx, Direction::Minus, ob.bwd);
            if (v.tag == Verdict::Periodic) {
                for (auto* h : {&hp, &hm}) {
                    h->value = 0;
                    h->error_bound = 0;
                    h->certified = true;
                    h->period = v.period;
                }
            }
            e["h_plus"] = height_json(hp, ob.fwd, ctx);
            e["h_minus"] = height_json(hm, ob.bwd, ctx);
            e["h_total"] = measured(hp.value + hm.value, hp.error_bound + hm.error_bound);
            e["error_bound"] = measured(hp.error_bound + hm.error_bound, 0);
            e["naive"] = {{"plus", exact_num(naive_height(ctx, s, HeightDirection::Plus))},
                          {"minus", exact_num(naive_height(ctx, s, HeightDirection::Minus))},
                          {"total", exact_num(naive_height(ctx, s, HeightDirection::Total))}};
            if (hp.partial || hm.partial) o.inconclusive = true;
        }
        if (c.command == Command::Height || c.command == Command::Alpha) {
            auto a = arithmetic_degree_from_orbit(ob.fwd);
            bool periodic = v.tag == Verdict::Periodic;
            if (c.command == Command::Alpha)
                for (std::size_t m = 1; m < ob.fwd.exact_sections.size() && !periodic; ++m)
                    periodic = ob.fwd.exact_sections[m] == s;
            if (periodic) {
                a.lower = a.upper = a.point = 1;
                a.exact = true;
            }
            e["alpha"] = alpha_json(a, ctx.lambda);
            if (a.partial) o.inconclusive = true;
        }
        secs.push_back(e);
    }
    o.j["lambda"] = exact_real(ctx.lambda);
    o.j["sections"] = secs;
    return o;
}

Out cmd_green(const SurfaceFamily& fam, const RunConfig& c) {
    auto ctx = make_height_context(fam);
    auto g = make_green_context(ctx);
    const auto& secs = sections_of(fam);
    Out o;
    // sampled fiber points: random parameters in |t| < 2 on random sections, moved once by f
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> U(-1, 1);
    const int want = 100;
    json pts = json::array();
    int n = 0, ratio_ok = 0, inv_ok = 0, dropped = 0;
    for (int k = 0; k < 4 * want && n < want; ++k) {
        Cx t(2 * U(rng), 2 * U(rng));
        std::size_t si = rng() % secs.size();
        if (std::abs(t) > 2) continue;
        try {
            auto p = fiber_map(fam, specialize(secs[si], t), 1);
            auto ps = green_potential(fam, g, p, Direction::Plus, c.depth);
            if (ps.dropped) throw UnstableSpecialization();
            double res = invariance_residual(fam, g, p, Direction::Plus, c.depth);
            ++n;
            bool rok = std::abs(ps.fitted_ratio * g.lambda - 1) <= 0.1;
            ratio_ok += rok;
            inv_ok += res < 1e-3;
            double tail = ps.increments.empty() ? 0 : std::abs(ps.increments.back()) / (g.lambda - 1);
            pts.push_back({{"t", exact({t.real(), t.imag()})},
                           {"section", si},
                           {"u", measured(ps.u.empty() ? 0 : ps.u.back(), tail)},
                           {"decay_ratio", exact_real(ps.fitted_ratio)},
                           {"invariance_residual", exact_real(res)}});
        } catch (const UnstableSpecialization&) {
            ++dropped;
        }
    }
    double fr = n ? double(ratio_ok) / n : 0, fi = n ? double(inv_ok) / n : 0;
    o.j["depth"] = c.depth;
    o.j["samples"] = n;
    o.j["dropped"] = dropped;
    o.j["fraction_ratio_within_10pct"] = exact_real(fr);
    o.j["fraction_invariance_below_1e-3"] = exact_real(fi);
    o.j["decay_reference"] = exact_real(1 / g.lambda);
    o.j["points"] = pts;
    o.inconclusive = fr < 0.9 || fi < 0.95;

    std::ostringstream csv;
    csv << std::setprecision(17) << "section,t_re,t_im,phi,tail\n";
    json profiles = json::array();
    for (std::size_t si = 0; si < secs.size(); ++si) {
        auto prof = potential_profile(fam, g, secs[si], Direction::Plus, c.r1, c.grid, c.depth, c.threads);
        json vals = json::array();
        for (auto& p : prof) {
            csv << si << "," << p.t.real() << "," << p.t.imag() << ",";
            if (p.value.dropped) {
                csv << ",\n";
                vals.push_back(nullptr);
            } else {
                csv << p.value.phi << "," << p.value.tail << "\n";
                vals.push_back(measured(p.value.phi, p.value.tail));
            }
        }
        profiles.push_back({{"section", si}, {"radius", exact_real(c.r1)}, {"phi", vals}});
    }
    o.j["profiles"] = profiles;
    o.csv = csv.str();
    return o;
}

Out cmd_mass(const SurfaceFamily& fam, const RunConfig& c) {
    auto ctx = make_height_context(fam);
    MassOptions mo;
    mo.r1 = c.r1;
    mo.r2 = c.r2;
    mo.grid = c.grid;
    mo.depth = c.depth;
    mo.threads = c.threads;
    mo.height_n = c.max_n;
    mo.orbit = orbit_options(c);
    Out o;
    json secs = json::array();
    std::ostringstream csv;
    csv << std::setprecision(17) << "section,r1,r2,estimate,hhat,ratio,uncertainty,psi_estimate,inconclusive\n";
    for (std::size_t k = 0; k < sections_of(fam).size(); ++k) {
        const auto& s = fam.sections[k];
        auto ob = orbits_for(fam, s, c, false);
        auto h = estimate_from_orbit(ctx, Direction::Plus, ob.fwd);
        for (std::size_t m = 1; m < ob.fwd.exact_sections.size(); ++m)
            if (ob.fwd.exact_sections[m] == s) {
                h.value = h.error_bound = 0;
                h.certified = true;
                h.period = static_cast<int>(m);
                break;
            }
        auto r = mass_vs_height(fam, ctx, s, Direction::Plus, mo, h);
        json atoms = json::array();
        for (auto& a : r.atoms)
            if (std::abs(a.mass) > a.uncertainty)
                atoms.push_back({{"t", exact({a.t.real(), a.t.imag()})},
                                 {"mass", measured(a.mass, a.uncertainty)},
                                 {"weight", exact_real(a.weight)}});
        json degen = json::array();
        for (auto& d : r.degeneration)
            degen.push_back({{"t0", exact({d.t0.real(), d.t0.imag()})},
                             {"c1", measured(d.c1, d.slope_error)},
                             {"c2", exact_real(d.c2)},
                             {"samples", d.samples}});
        json e = {{"index", k},
                  {"section", s.str()},
                  {"radii", {exact_real(r.r1), exact_real(r.r2)}},
                  {"grid", r.grid},
                  {"depth", r.depth},
                  {"raw_slope", measured(r.raw_slope, r.tail + r.quadrature)},
                  {"estimate", measured(r.estimate, r.uncertainty)},
                  {"uncertainty_parts",
                   {{"tail", exact_real(r.tail)}, {"quadrature", exact_real(r.quadrature)}, {"atoms", exact_real(r.atom_error)}}},
                  {"psi_estimate", measured(r.psi_estimate, r.psi_uncertainty)},
                  {"estimators_agree", r.estimators_agree},
                  {"hhat", measured(h.value, h.error_bound)},
                  {"ratio", r.ratio ? measured(*r.ratio, (r.uncertainty + h.error_bound) / std::max(h.value, 1e-300))
                                    : json(nullptr)},
                  {"atoms", atoms},
                  {"degeneration", degen},
                  {"dropped", r.dropped},
                  {"inconclusive", r.inconclusive}};
        if (!r.diagnosis.empty()) e["diagnosis"] = r.diagnosis;
        if (r.inconclusive) o.inconclusive = true;
        secs.push_back(e);
        csv << k << "," << r.r1 << "," << r.r2 << "," << r.estimate << "," << h.value << ",";
        if (r.ratio) csv << *r.ratio;
        csv << "," << r.uncertainty << "," << r.psi_estimate << "," << (r.inconclusive ? 1 : 0) << "\n";
    }
    o.j["sections"] = secs;
    o.csv = csv.str();
    return o;
}

}  // namespace

Command parse_command(const std::string& name) {
    for (auto& [c, n] : kCommands)
        if (n == name) return c;
    throw std::invalid_argument("unknown command: " + name);
}

std::string command_name(Command c) {
    for (auto& [k, n] : kCommands)
        if (k == c) return n;
    return "?";
}

std::vector<std::string> command_names() {
    std::vector<std::string> v;
    for (auto& kv : kCommands) v.push_back(kv.second);
    return v;
}

RunResult evaluate(const RunConfig& c) {
    RunResult res;
    try {
        check_config(c);
        SurfaceFamily fam = load_family(c.family_path);
        const bool lattice_only = c.command == Command::Lambda || c.command == Command::PeriodicClasses;
        validate_family(fam, !lattice_only);
        Out o;
        switch (c.command) {
            case Command::Lambda: o = cmd_lambda(fam); break;
            case Command::Eigendivisors: o = cmd_eigendivisors(fam); break;
            case Command::PeriodicClasses: o = cmd_periodic_classes(fam, c); break;
            case Command::Iterate: o = cmd_iterate(fam, c); break;
            case Command::Height:
            case Command::Classify:
            case Command::Alpha: o = cmd_height_like(fam, c); break;
            case Command::Green: o = cmd_green(fam, c); break;
            case Command::MassCheck: o = cmd_mass(fam, c); break;
        }
        json out = header(c, fam);
        out.update(o.j);
        out["inconclusive"] = o.inconclusive;
        if (ends_with(c.output, ".csv") && !o.csv.empty())
            res.text = o.csv;
        else
            res.text = out.dump(2) + "\n";
        if (c.strict && o.inconclusive) {
            res.exit_code = kExitInconclusive;
            res.message = "inconclusive numeric report";
        }
    } catch (const ParseError& e) {
        res.exit_code = kExitValidation;
        res.message = e.what();
    } catch (const ValidationError& e) {
        res.exit_code = kExitValidation;
        res.message = e.what();
    } catch (const Degenerate& e) {
        res.exit_code = kExitDegenerate;
        res.message = e.what();
    } catch (const DegenerateSection& e) {
        res.exit_code = kExitDegenerate;
        res.message = e.what();
    } catch (const std::exception& e) {
        // lattice failures such as a missing Perron eigenvector are input problems
        res.exit_code = kExitValidation;
        res.message = e.what();
    }
    return res;
}

RunResult run(const RunConfig& c) {
    RunResult r = evaluate(c);
    if (!r.text.empty()) {
        try {
            write_text(c.output, r.text);
        } catch (const std::exception& e) {
            r.exit_code = kExitValidation;
            r.message = e.what();
        }
    }
    return r;
}

}  // namespace heightlab
