#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "qprism/base_ring.hpp"

namespace qprism {

// Variable of a free delta-ring: V(i,k) = delta^k(S_i), or a delta-constant symbol C(j).
struct DVar {
    enum Kind : std::uint8_t { V = 0, Const = 1 };
    Kind kind = V;
    std::uint16_t index = 0;
    std::uint16_t k = 0;

    std::uint32_t code() const { return (std::uint32_t(kind) << 31) | (std::uint32_t(index) << 16) | k; }
    static DVar from_code(std::uint32_t c) {
        return DVar{static_cast<Kind>(c >> 31), static_cast<std::uint16_t>((c >> 16) & 0x7fff),
                    static_cast<std::uint16_t>(c & 0xffff)};
    }
    static DVar var(int i, int k = 0) { return DVar{V, std::uint16_t(i), std::uint16_t(k)}; }
    static DVar constant(int j) { return DVar{Const, std::uint16_t(j), 0}; }
    std::string name() const;
};

// sorted by variable code, exponents positive
using DMono = boost::container::small_vector<std::pair<std::uint32_t, std::uint32_t>, 4>;

class DeltaPoly {
public:
    DeltaPoly() = default;
    DeltaPoly(const BaseRing& R, int level) : R_(R), level_(level) {}
    static DeltaPoly constant(const BaseElt& c);
    static DeltaPoly variable(const BaseRing& R, int level, DVar v, unsigned e = 1);

    const BaseRing& ring() const { return R_; }
    int level() const { return level_; }
    const std::map<DMono, BaseElt>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    // coefficient of a monomial (zero at level if absent)
    BaseElt coeff(const DMono& m) const;
    void add_term(const DMono& m, const BaseElt& c);
    DeltaPoly reduced(int L) const;

    DeltaPoly operator+(const DeltaPoly& o) const;
    DeltaPoly operator-(const DeltaPoly& o) const;
    DeltaPoly operator-() const;
    DeltaPoly operator*(const DeltaPoly& o) const;
    DeltaPoly scaled(i64 s) const;
    DeltaPoly scaled(const BaseElt& c) const;
    DeltaPoly pow(unsigned e) const;

    bool operator==(const DeltaPoly& o) const;
    bool operator!=(const DeltaPoly& o) const { return !(*this == o); }
    bool equal_at(const DeltaPoly& o, int L) const;

    // max exponent of v, and the coefficient polynomial of v^e
    unsigned degree_in(DVar v) const;
    DeltaPoly coefficient_of(DVar v, unsigned e) const;

    std::string to_sexpr() const;
    std::string to_json() const;

private:
    BaseRing R_;
    int level_ = 0;
    std::map<DMono, BaseElt> terms_;
};

DMono mono_mul(const DMono& a, const DMono& b);
DMono mono_pow(const DMono& a, unsigned e);
unsigned mono_exponent(const DMono& m, DVar v);

DeltaPoly dp_delta(const DeltaPoly& P);
DeltaPoly dp_phi(const DeltaPoly& P);

// Ring-homomorphic evaluation: variables in the map are replaced by their images,
// others are kept.  With coherent=true, images of V(i,k+1) must equal delta of V(i,k).
DeltaPoly dp_substitute(const DeltaPoly& P, const std::map<std::uint32_t, DeltaPoly>& assign, bool coherent = false);

// Generic evaluation into any ring type T (with +, *, pow) given a term builder.
template <class T, class CoeffFn, class VarFn>
T dp_evaluate(const DeltaPoly& P, T zero, CoeffFn&& coeff, VarFn&& var) {
    T acc = zero;
    for (const auto& [m, c] : P.terms()) {
        T t = coeff(c);
        for (const auto& [code, e] : m) t = t * var(DVar::from_code(code)).pow(e);
        acc = acc + t;
    }
    return acc;
}

std::string base_to_json(const BaseElt& x);

}  // namespace qprism
