#pragma once

#include "heightlab/exactnum.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace heightlab {

using IVec = std::array<Z, 3>;
using IMat = std::array<std::array<Z, 3>, 3>;

enum class Direction { Plus, Minus };

struct IntersectionForm {
    IMat gram;
    // L_i.L_i = 0, L_i.L_j = 2
    static IntersectionForm wehler();
    bool symmetric() const;
    Z det() const;
    std::pair<int, int> signature() const;  // (#positive, #negative)
    Z pair(const IVec& a, const IVec& b) const;
};

struct LatticeMap {
    IMat matrix;  // column j = image of L_j under pullback

    static LatticeMap identity();
    LatticeMap operator*(const LatticeMap& o) const;
    bool operator==(const LatticeMap& o) const { return matrix == o.matrix; }
    IVec apply(const IVec& v) const;
    LatticeMap inverse() const;
    Z det() const;
    bool is_isometry(const IntersectionForm& f) const;
};

// s_i^* for i in {1,2,3}
LatticeMap wehler_involution(int i);
std::vector<LatticeMap> wehler_involutions();

struct ComposedMap {
    LatticeMap map;
    bool identity_warning = false;
};
// f = s_{w_k} o ... o s_{w_1}; pullback is the product in word order.
ComposedMap compose_word(const std::vector<LatticeMap>& involutions, const std::vector<int>& word);

QPoly charpoly(const LatticeMap& m);
AlgebraicReal dynamical_degree(const LatticeMap& m);
bool is_hyperbolic(const LatticeMap& m);

struct SpectralReport {
    QPoly charpoly;
    std::vector<QPoly> factors;  // linear rational factors, then the lambda factor
    std::optional<QPoly> salem_factor;
    AlgebraicReal lambda = AlgebraicReal::rational(1);
    std::vector<std::complex<double>> other_roots;  // roots other than lambda^{+-1}
    double max_unit_deviation = 0;                  // max | |z| - 1 | over other_roots
};
SpectralReport spectrum(const LatticeMap& m);

enum class DivisorRole { Plus, Minus, Sum, Generic };

struct DivisorClass {
    std::array<QNum, 3> coeffs;
    DivisorRole role = DivisorRole::Generic;

    static DivisorClass rational(const IVec& v);
    std::array<double, 3> approx() const;
    DivisorClass operator+(const DivisorClass& o) const;
};

QNum pairing(const IntersectionForm& f, const DivisorClass& a, const DivisorClass& b);
// sum_i d_i deg_i
QNum degree_pairing(const DivisorClass& d, const std::array<long long, 3>& degrees);

DivisorClass eigendivisor(const LatticeMap& m, Direction dir,
                          const IntersectionForm& f = IntersectionForm::wehler());

struct BigNefCertificate {
    bool big_and_nef = false;
    QNum self_intersection;
    QNum with_plus, with_minus;
    std::array<QNum, 3> with_hyperplanes;
    std::string assumption;
};
BigNefCertificate big_nef_check(const DivisorClass& d, const DivisorClass& dplus, const DivisorClass& dminus,
                                const IntersectionForm& f = IntersectionForm::wehler());

struct PeriodicClasses {
    std::vector<std::vector<IVec>> orbits;
    std::string label = "semi-decision: absence within bounds does not prove emptiness";
};
PeriodicClasses periodic_curve_classes(const LatticeMap& m, long selfint, int order_bound, int height_bound,
                                       const IntersectionForm& f = IntersectionForm::wehler(), int threads = 1);

// Everything the dynamics needs about a word, computed once.
struct LatticeData {
    std::vector<int> word;
    LatticeMap map;
    SpectralReport spec;
    double lambda = 1;
    DivisorClass dplus, dminus;
};
LatticeData lattice_data(const std::vector<int>& word);

}  // namespace heightlab
