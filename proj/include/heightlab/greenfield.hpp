#pragma once

#include "heightlab/heights.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace heightlab {

using Cx = std::complex<double>;
using CPair = std::array<Cx, 2>;

struct UnstableSpecialization : MathError {
    UnstableSpecialization() : MathError("unstable specialization") {}
};

// A point of the fiber X_t, each pair scaled to max-norm 1.
struct ComplexFiberPoint {
    Cx t;
    std::array<CPair, 3> c;
};

ComplexFiberPoint normalized(ComplexFiberPoint p);
ComplexFiberPoint specialize(const MarkedSection& s, Cx t);
ComplexFiberPoint to_complex(const FiberPoint& p, Cx t);
// |F_t(p)| / sum |c_abc(t)| at unit normalization
double fiber_residual(const SurfaceFamily& fam, const ComplexFiberPoint& p);
// max over coordinates of the chordal distance between projective pairs
double chordal_distance(const ComplexFiberPoint& a, const ComplexFiberPoint& b);

// f^power(p) by floating Vieta swaps; throws UnstableSpecialization.
ComplexFiberPoint fiber_map(const SurfaceFamily& fam, const ComplexFiberPoint& p, int power);

// One application of f^{+-1} to a unit-normalized point: the image plus the log max-norms of the
// lifted coordinates before renormalization (they transform like coordinate degrees).
struct LiftedStep {
    ComplexFiberPoint point;
    std::array<double, 3> log_scale{};
};
LiftedStep lifted_step(const SurfaceFamily& fam, const ComplexFiberPoint& p, Direction dir);

struct GreenContext {
    double lambda = 1;
    std::array<double, 3> dplus{}, dminus{};
    const std::array<double, 3>& d(Direction dir) const { return dir == Direction::Plus ? dplus : dminus; }
};
GreenContext make_green_context(const HeightContext& ctx);

struct PotentialSample {
    ComplexFiberPoint point;
    std::vector<double> u;           // u_1..u_n (u_0 = 0)
    std::vector<double> increments;  // lambda^-j v0(f^j p), j < n
    int n = 0;
    bool dropped = false;
    double fitted_ratio = 0;  // Theil-Sen over j >= 3
};
PotentialSample green_potential(const SurfaceFamily& fam, const GreenContext& g, const ComplexFiberPoint& p,
                                Direction dir, int depth);
// v0(q) = (1/lambda) sum D_i log||f~(q)_i|| at unit normalization
double v0(const SurfaceFamily& fam, const GreenContext& g, const ComplexFiberPoint& p, Direction dir);
// |u_n(p) - v0(p) - u_n(f(p)) / lambda|, the second orbit computed independently
double invariance_residual(const SurfaceFamily& fam, const GreenContext& g, const ComplexFiberPoint& p,
                           Direction dir, int depth);

// Roots of the squarefree part of Delta_0 Delta_1 Delta_2, polished; also recorded in fam.excluded.
std::vector<Cx> excluded_roots(const SurfaceFamily& fam);

// Phi(t) = lambda^-n D.l(f~^n(sigma(t))) starting from the unnormalized section values.
struct PhiValue {
    double phi = 0;
    double tail = 0;  // geometric tail bound past depth
    bool dropped = false;
};
PhiValue section_potential(const SurfaceFamily& fam, const GreenContext& g, const MarkedSection& s, Cx t,
                           Direction dir, int depth);

struct ProfilePoint {
    Cx t;
    PhiValue value;
};
std::vector<ProfilePoint> potential_profile(const SurfaceFamily& fam, const GreenContext& g, const MarkedSection& s,
                                            Direction dir, double radius, int grid, int depth, int threads = 1);
std::string profile_csv(const std::vector<ProfilePoint>& profile);

struct MassOptions {
    double r1 = 200, r2 = 2000;
    int grid = 512;
    int depth = 10;
    int threads = 1;
    int height_n = 5;  // iterates for the comparison height
    OrbitOptions orbit;
};

struct AtomMass {
    Cx t;
    double mass = 0, uncertainty = 0;
    double weight = 0;  // share of the atom inside the Jensen window
};

struct DegenerationFit {
    Cx t0;
    double c1 = 0, c2 = 0;  // |u_n(sigma(t))| <= c1 log+ 1/|t - t0| + c2
    double slope_error = 0;
    int samples = 0;
};

struct MassReport {
    Direction dir = Direction::Plus;
    double r1 = 0, r2 = 0;
    int grid = 0, depth = 0;
    double raw_slope = 0;  // Jensen slope before atom subtraction
    double estimate = 0, uncertainty = 0;
    double tail = 0, quadrature = 0, atom_error = 0;
    double psi_estimate = 0, psi_uncertainty = 0;
    bool estimators_agree = false;
    HeightEstimate hhat;
    std::optional<double> ratio;
    bool inconclusive = false;
    std::string diagnosis;
    std::vector<AtomMass> atoms;  // atoms with weight > 0
    std::vector<DegenerationFit> degeneration;
    int dropped = 0;
};
MassReport mass_vs_height(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s, Direction dir,
                          const MassOptions& opt = {});
// Same report against a precomputed height estimate.
MassReport mass_vs_height(const SurfaceFamily& fam, const HeightContext& ctx, const MarkedSection& s, Direction dir,
                          const MassOptions& opt, const HeightEstimate& hhat);
std::string mass_csv(const std::vector<MassReport>& reports);

// Sum with a fixed pairwise order, independent of thread count.
double pairwise_sum(const double* x, std::size_t n);

}  // namespace heightlab
