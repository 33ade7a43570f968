#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qprism/base_ring.hpp"
#include "qprism/report.hpp"

namespace qprism {

using IMat = std::vector<std::vector<i64>>;  // rows x cols
using BigInt = boost::multiprecision::cpp_int;
using BMat = std::vector<std::vector<BigInt>>;

// Bounded cochain complex of finite abelian p-groups C^q = sum_j Z/p^{exps[q][j]},
// with integer-lifted differentials d[q]: C^{lo+q} -> C^{lo+q+1}.
struct ChainComplex {
    int p = 2;
    int lo = 0;
    std::vector<std::vector<int>> exps;
    std::vector<IMat> d;                       // d.size() == exps.size() - 1
    std::vector<std::vector<int>> bands;       // optional weight band of each basis element
    std::vector<std::vector<std::string>> labels;  // optional

    int hi() const { return lo + static_cast<int>(exps.size()) - 1; }
    std::size_t dim(int q) const { return q < lo || q > hi() ? 0 : exps[q - lo].size(); }
    int max_exponent() const;
    // subcomplex spanned by the basis elements of one band (differentials must respect bands)
    ChainComplex band(int b) const;
    std::vector<int> band_values() const;
    nlohmann::ordered_json to_json() const;
    static ChainComplex from_json(const nlohmann::json& j);
};

struct CohomologyGroup {
    int degree = 0;
    std::vector<int> exponents;  // invariant factors p^e, descending, e > 0
    bool is_zero() const { return exponents.empty(); }
    std::string to_string(int p) const;
};

struct CohomologyReport {
    int p = 2;
    std::vector<CohomologyGroup> groups;
    nlohmann::ordered_json to_json() const;
    std::string table() const;
};

struct SNFResult {
    BMat U, S, V;  // U A V = S
};

// Smith normal form over Z with unimodular transforms
SNFResult smith_normal_form(const BMat& A);
std::vector<BigInt> invariant_factors(const BMat& A);

// d^{q+1} d^q = 0 and well-definedness on the presentations; throws NotAComplex
void check_complex(const ChainComplex& C);
CohomologyGroup cohomology(const ChainComplex& C, int q);
CohomologyReport cohomology_all(const ChainComplex& C);

// Kernel of a map between finite p-groups, as generators (integer lifts) with orders.
struct Subgroup {
    std::vector<std::vector<i64>> gens;
    std::vector<int> exponents;  // order p^{exponents[i]} of gens[i]; the group is their direct sum
};
Subgroup kernel_subgroup(int p, const std::vector<int>& src, const std::vector<int>& tgt, const IMat& d);
// apply an integer-lifted map and test for zero in the target presentation
bool maps_to_zero(int p, const std::vector<int>& tgt, const IMat& d, const std::vector<i64>& x);

// invariant factors (exponents, descending) of the cokernel of M over Z/p^E;
// rows are generators, columns relations
std::vector<int> cokernel_exponents(int p, int E, IMat M);

}  // namespace qprism
