#pragma once

#include "heightlab/exactnum.hpp"
#include "heightlab/nslattice.hpp"

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace heightlab {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateSection : MathError {
    DegenerateSection() : MathError("section lies in ramification/degenerate locus") {}
};
struct DegreeCapExceeded : MathError {
    explicit DegreeCapExceeded(int step) : MathError("degree cap exceeded at step " + std::to_string(step)), step(step) {}
    int step;
};

constexpr long kDefaultDegreeCap = 20000;

// Projective pair [p : q] of coprime integer polynomials with content 1.
// Sign is fixed by a positive leading coefficient of q (of p when q = 0).
struct ZPair {
    ZPoly p, q;
    long degree() const { return std::max(p.degree(), q.degree()) < 0 ? 0 : std::max(p.degree(), q.degree()); }
    bool operator==(const ZPair& o) const { return p == o.p && q == o.q; }
};
// Removes content and fixes the sign; does not remove polynomial common factors.
ZPair normalize_pair(ZPoly p, ZPoly q);

using Degrees = std::array<long long, 3>;

struct MarkedSection {
    std::array<ZPair, 3> c;

    Degrees degrees() const;
    bool operator==(const MarkedSection& o) const { return c == o.c; }
    // [p : q] with monic q (monic p when q = 0), as rational functions of t
    std::array<std::pair<QPoly, QPoly>, 3> rational() const;
    std::string str() const;
    std::string canonical() const;
    static MarkedSection constant(const std::array<std::array<long, 2>, 3>& pts);
    static MarkedSection from_rational(const std::array<std::pair<QPoly, QPoly>, 3>& pairs);
};

// Parameters where a fiber degenerates. Append-only and safe for concurrent appends.
class ExcludedParams {
public:
    void add(const Q& t);
    void add_root(std::complex<double> t);
    std::vector<Q> rational() const;
    std::vector<std::complex<double>> roots() const;

private:
    mutable std::mutex mu_;
    std::vector<Q> exact_;
    std::vector<std::complex<double>> roots_;
};

struct DeltaCache;

// F_t = sum c_{abc}(t) x0^a x1^(2-a) y0^b y1^(2-b) z0^c z1^(2-c).
struct SurfaceFamily {
    std::array<ZPoly, 27> coeffs;  // index 9a + 3b + c, denominators cleared
    std::vector<int> word;          // 1-based involution indices, application order
    std::vector<MarkedSection> sections;
    std::string name;
    std::shared_ptr<ExcludedParams> excluded = std::make_shared<ExcludedParams>();
    std::shared_ptr<DeltaCache> delta_cache;

    static int index(int a, int b, int c) { return 9 * a + 3 * b + c; }
    int tdeg() const;
    std::string canonical() const;  // coefficients and word, for hashing
    std::vector<int> reversed_word() const { return {word.rbegin(), word.rend()}; }
};

// Builds a family from integer/rational coefficient polynomials (denominators are cleared).
SurfaceFamily make_family(const std::array<QPoly, 27>& coeffs, std::vector<int> word,
                          std::vector<MarkedSection> sections = {}, std::string name = "");
SurfaceFamily parse_family(const std::string& json_text);
SurfaceFamily load_family(const std::string& path);
std::string family_to_json(const SurfaceFamily& fam);

// F evaluated on the section; zero iff the section lies on the family.
ZPoly evaluate_form(const SurfaceFamily& fam, const MarkedSection& s);
bool on_surface(const SurfaceFamily& fam, const MarkedSection& s);
// Throws ValidationError: zero form, bad word, non-hyperbolic word, "section k not on surface".
void validate_family(const SurfaceFamily& fam, bool require_hyperbolic = true);

// Coefficients (A, B, C) of A u0^2 + B u0 u1 + C u1^2 in coordinate i (0-based) along s.
std::array<ZPoly, 3> coordinate_quadratic(const SurfaceFamily& fam, int i, const MarkedSection& s);

// Delta_i(t): nonzero multiple of every t where the i-th quadratic can vanish identically along some (y, z).
// Zero polynomial if no admissible auxiliary pair was found.
ZPoly coordinate_delta(const SurfaceFamily& fam, int i);
const ZPoly& cached_delta(const SurfaceFamily& fam, int i);
struct InvolutionResult {
    MarkedSection section;
    bool fixed = false;  // the section is fixed by the involution
};
// i is 1-based.
InvolutionResult involution_apply(const SurfaceFamily& fam, int i, const MarkedSection& s);
// Degree of the i-th coordinate after the involution, before cancellation.
long involution_degree_bound(const SurfaceFamily& fam, int i, const Degrees& d);
// f^power(s); negative powers apply the reversed word.
MarkedSection automorphism_apply(const SurfaceFamily& fam, const MarkedSection& s, int power,
                                 long degree_cap = kDefaultDegreeCap);

QNum section_degree(const MarkedSection& s, const DivisorClass& d);
QNum section_degree(const Degrees& deg, const DivisorClass& d);

struct SmoothnessSample {
    Q t;
    int probes = 0;
    int singular = 0;
};
struct SmoothnessReport {
    std::vector<SmoothnessSample> samples;
    std::vector<Q> flagged;
};
SmoothnessReport smoke_smoothness(const SurfaceFamily& fam, int samples, uint64_t seed = 1);

// Best effort: sections whose coordinates other than one are constant points of small height,
// the remaining coordinate being a root of the coordinate quadratic over Q(t).
std::vector<MarkedSection> find_sections(const SurfaceFamily& fam, int height_bound, std::size_t max_found = 16);

// Points of the fiber over a rational parameter, as primitive integer pairs.
using FiberPoint = std::array<std::array<Z, 2>, 3>;
FiberPoint specialize(const MarkedSection& s, const Q& t);
FiberPoint fiber_apply_exact(const SurfaceFamily& fam, const Q& t, const FiberPoint& pt, int power);

// Random pencil sum_k t^k F_k (k <= tdeg) through prescribed constant points.
// With periodic_pair, section 0 is a point p = (x, y, z1) at which the x- and y-quadratics have double
// roots, and whose z-conjugate q = (x, y, z2) has the same property, so f = s3 s2 s1 swaps p and q.
// The remaining sections are random constant points imposed on the pencil.
SurfaceFamily generate_family(uint64_t seed, bool periodic_pair, int random_sections, int tdeg = 1,
                              std::vector<int> word = {1, 2, 3});

}  // namespace heightlab
