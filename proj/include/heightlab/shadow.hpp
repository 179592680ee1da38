#pragma once

#include "heightlab/ntt.hpp"
#include "heightlab/wehler.hpp"

#include <array>
#include <vector>

namespace heightlab {

// Degree-tracking image of a section over F_p(t) for one NTT prime.
// Coordinates are kept as coefficient arrays; each involution is evaluated pointwise
// on a coset of a power-of-two subgroup and interpolated back.
class ShadowOrbit {
public:
    ShadowOrbit(const SurfaceFamily& fam, uint64_t prime);
    // throws PrimeRejected if reduction mod p changes a degree
    void load(const MarkedSection& s);
    void apply(int i);  // 1-based involution index
    void apply_word(const std::vector<int>& word) {
        for (int i : word) apply(i);
    }
    Degrees degrees() const;
    uint64_t prime() const { return ntt_.prime(); }

private:
    const SurfaceFamily& fam_;
    NttPrime ntt_;
    int e_ = 0;
    std::array<std::vector<uint64_t>, 27> coef_;  // Montgomery form
    std::array<std::vector<uint64_t>, 3> delta_;  // monic, Montgomery form; empty if unusable
    std::array<std::vector<uint64_t>, 3> p_, q_;
};

// remainder of a modulo monic m (both Montgomery form)
std::vector<uint64_t> shadow_rem(const std::vector<uint64_t>& a, const std::vector<uint64_t>& m, const Mont& M);
// quotient of a by monic m, assuming exact division
std::vector<uint64_t> shadow_divexact(const std::vector<uint64_t>& a, const std::vector<uint64_t>& m, const Mont& M);

}  // namespace heightlab
