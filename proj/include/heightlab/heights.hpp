#pragma once

#include "heightlab/nslattice.hpp"
#include "heightlab/wehler.hpp"

#include <optional>
#include <string>
#include <vector>

namespace heightlab {

struct OrbitOptions {
    long degree_cap = kDefaultDegreeCap;
    int primes = 2;
    int threads = 1;
    bool use_cache = true;
    bool keep_sections = false;
};

struct OrbitRecord {
    int n = 0;  // signed iterate index
    Degrees degrees{};
    bool exact = true;     // from exact iteration over Q(t)
    bool flagged = false;  // shadow primes disagreed; maximum taken
};

struct Orbit {
    std::vector<OrbitRecord> records;          // |n| = 0, 1, ..., reached
    std::vector<MarkedSection> exact_sections;  // when keep_sections; index = |n|
    std::vector<uint64_t> primes;
    bool partial = false;
    bool degenerate = false;  // stopped by a degenerate involution step
    std::string note;
};

// Degrees of f^{+-n}(s) for n = 0..max_n; exact below the degree cap, mod-p shadows beyond it.
Orbit compute_orbit(const SurfaceFamily& fam, const MarkedSection& s, Direction dir, int max_n,
                    const OrbitOptions& opt = {});

// Smallest m <= max_period with f^m(s) = s, by exact iteration below the cap.
std::optional<int> detect_period(const SurfaceFamily& fam, const MarkedSection& s, int max_period,
                                 long degree_cap = kDefaultDegreeCap);

struct HeightContext {
    LatticeData lat;
    DivisorClass total;  // D = D+ + D-
    double lambda = 1;
};
HeightContext make_height_context(const SurfaceFamily& fam);

enum class HeightDirection { Plus, Minus, Total };
QNum naive_height(const HeightContext& ctx, const Degrees& d, HeightDirection dir);
QNum naive_height(const HeightContext& ctx, const MarkedSection& s, HeightDirection dir);

struct HeightEstimate {
    double value = 0;
    double error_bound = 0;
    int n_used = 0;
    std::vector<std::pair<int, double>> sequence;  // (n, h(f^n s) / lambda^n)
    std::vector<Degrees> degrees;
    std::vector<bool> flagged;
    bool certified = false;
    bool partial = false;
    double fitted_ratio = 0;  // decay ratio of |h_{n+1} - h_n|; 0 if not fitted
    std::optional<int> period;
    std::string note;
};

// Height sequence and tail bound from orbit degree data.
HeightEstimate estimate_from_orbit(const HeightContext& ctx, Direction dir, const Orbit& orbit);
HeightEstimate canonical_height(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s,
                                Direction dir, int max_n, const OrbitOptions& opt = {});
// Theil-Sen slope of log|x_n| for n >= start, returned as exp(slope); 0 if fewer than two points.
double fit_decay_ratio(const std::vector<double>& x, int start);

enum class Verdict { Periodic, StableNonperiodicFlagged, Unstable, Undetermined };
std::string verdict_name(Verdict v);

struct StabilityVerdict {
    Verdict tag = Verdict::Undetermined;
    int period = 0;
    std::vector<Degrees> forward, backward;
    double gap_eps = 0;
    double naive = 0;    // h_D(s)
    double c_f = 0;      // fitted constant
    double ceiling = 0;  // naive + c_f
    bool forward_bounded = false, backward_bounded = false;
    double hhat = 0, hhat_error = 0;
    std::string note;
    std::string str() const;
};
StabilityVerdict classify(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s, double gap_eps,
                          int max_n, int max_period, const OrbitOptions& opt = {});
// Same, from orbits computed with keep_sections to max_n in both directions.
StabilityVerdict classify_orbits(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s,
                                 const Orbit& fwd, const Orbit& bwd, double gap_eps, int max_n, int max_period,
                                 long degree_cap = kDefaultDegreeCap);

struct ArithmeticDegree {
    double lower = 1, upper = 1, point = 1;
    bool exact = false;  // periodic: all three are exactly 1
    bool partial = false;
    std::vector<double> h_ample;  // 1 + total coordinate degree
};
ArithmeticDegree arithmetic_degree(const SurfaceFamily& fam, const MarkedSection& s, int max_n,
                                   const OrbitOptions& opt = {});
ArithmeticDegree arithmetic_degree_from_orbit(const Orbit& orbit);

}  // namespace heightlab
