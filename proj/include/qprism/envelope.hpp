#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qprism/base_ring.hpp"
#include "qprism/delta_poly.hpp"

namespace qprism {

constexpr int kMaxVars = 8;
// per-variable index m = sum_k a_k p^k encodes prod_k delta^k(tau)^{a_k}; for
// delta-constant variables m is the plain exponent
using Key = std::array<std::uint16_t, kMaxVars>;

class EnvRing;
class EnvElt;

struct CenterSpec {
    enum Kind { Base, Lower } kind = Base;
    std::vector<i64> base_poly;                          // exact integer polynomial in mu
    std::function<EnvElt(const EnvRing&)> lower;         // delta-constant element of the lower tower
    std::string label;

    static CenterSpec base(std::vector<i64> poly) { return CenterSpec{Base, std::move(poly), {}, {}}; }
    static CenterSpec base_int(i64 a) { return base({a}); }
};

struct VarSpec {
    enum Kind { Tau, Const } kind = Tau;
    CenterSpec center;
    std::string name;
};

struct EnvSpec {
    int p = 2;
    Mode mode = Mode::Generic;
    std::vector<VarSpec> vars;
    int weight_cap = 8;
};

class EnvElt {
public:
    EnvElt() = default;
    EnvElt(const EnvRing* R, int level) : R_(R), level_(level) {}

    const EnvRing& ring() const { return *R_; }
    const EnvRing* ring_ptr() const { return R_; }
    int level() const { return level_; }
    const std::map<Key, BaseElt>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    int weight() const;

    BaseElt coeff(const Key& k) const;
    void add_term(const Key& k, const BaseElt& c);
    EnvElt reduced(int L) const;

    EnvElt operator+(const EnvElt& o) const;
    EnvElt operator-(const EnvElt& o) const;
    EnvElt operator-() const;
    EnvElt operator*(const EnvElt& o) const;
    EnvElt& operator+=(const EnvElt& o);
    EnvElt& operator-=(const EnvElt& o);
    EnvElt scaled(i64 s) const;
    EnvElt scaled(const BaseElt& c) const;
    EnvElt pow(unsigned e) const;

    bool operator==(const EnvElt& o) const;
    bool operator!=(const EnvElt& o) const { return !(*this == o); }
    bool equal_at(const EnvElt& o, int L) const;
    // equality at the smaller of the two levels
    bool same(const EnvElt& o) const;

    std::string to_string() const;
    std::string to_json() const;

private:
    friend class EnvRing;
    const EnvRing* R_ = nullptr;
    int level_ = 0;
    std::map<Key, BaseElt> terms_;
};

// One term of a rewrite right-hand side: raw digit exponents of the variable and a
// coefficient in the lower tower.
struct RawTerm {
    std::vector<std::uint16_t> exps;
    EnvElt coeff;
};

class EnvRing : public std::enable_shared_from_this<EnvRing> {
public:
    static std::shared_ptr<const EnvRing> build(const EnvSpec& spec, int precision);

    const EnvSpec& spec() const { return spec_; }
    int p() const { return spec_.p; }
    int precision() const { return base_.n; }
    const BaseRing& base() const { return base_; }
    int nvars() const { return static_cast<int>(spec_.vars.size()); }
    int weight_cap() const { return spec_.weight_cap; }
    // largest delta-level of tau that fits under the weight cap
    int max_level() const { return K_; }
    bool is_const(int v) const { return spec_.vars[v].kind == VarSpec::Const; }

    // the same tower at a higher precision (cached)
    std::shared_ptr<const EnvRing> at_precision(int n) const;
    std::shared_ptr<const EnvRing> guard() const { return at_precision(precision() + K_ + 1); }
    // move an element of another precision of this tower into this ring
    EnvElt import(const EnvElt& x) const;

    EnvElt zero(int level = -1) const;
    EnvElt one(int level = -1) const;
    EnvElt scalar(const BaseElt& c) const;
    EnvElt scalar_int(i64 c) const { return scalar(BaseElt::from_int(base_, precision(), c)); }
    EnvElt basis(const Key& k) const;
    EnvElt tau(int v) const;
    EnvElt delta_tau(int v, int k) const;
    // t_v = a_v + xi tau_v for tau-variables, the variable itself for constants
    EnvElt t(int v) const;
    EnvElt center(int v) const;
    EnvElt xi() const { return scalar(base_xi(base_, precision())); }
    EnvElt mu() const { return scalar(base_mu(base_, precision())); }
    EnvElt eta() const { return scalar(base_eta(base_, precision())); }

    static int key_weight(const Key& k, int nvars);
    std::vector<int> digits(int m) const;

    // normal-form rewrite right-hand side for delta^k(tau_v)^p
    const std::vector<RawTerm>& rule(int v, int k) const { return rules_[v][k]; }
    // product table entry tau_v^{{i}} * tau_v^{{j}}
    const EnvElt& table(int v, int i, int j) const;

    EnvElt mul(const EnvElt& x, const EnvElt& y) const;
    EnvElt delta(const EnvElt& x) const;
    EnvElt phi(const EnvElt& x) const;
    // delta of a basis monomial (exact at ring precision)
    EnvElt delta_basis(const Key& k) const;
    EnvElt phi_basis(const Key& k) const;

    std::string rules_json() const;
    std::string key_string(const Key& k) const;

private:
    EnvRing(const EnvSpec& spec, int precision);
    void build_var(int v);
    EnvElt normalize_raw(int v, std::map<std::vector<std::uint16_t>, EnvElt> raw) const;
    EnvElt mul_rec(const EnvElt& x, const EnvElt& y, int v) const;
    EnvElt from_var_index(int v, int m, const EnvElt& lower) const;

    EnvSpec spec_;
    BaseRing base_;
    int K_ = 0;
    std::vector<std::vector<std::vector<RawTerm>>> rules_;
    std::vector<std::vector<std::vector<EnvElt>>> tables_;
    std::vector<EnvElt> centers_;

    mutable std::mutex mu_;
    mutable std::map<int, std::shared_ptr<const EnvRing>> precisions_;
    mutable std::map<Key, EnvElt> delta_cache_;
    mutable std::map<Key, EnvElt> phi_cache_;
    std::weak_ptr<const EnvRing> self_;
};

EnvElt env_delta(const EnvElt& x);
// random element on monomials of weight at most wmax
EnvElt random_env(std::mt19937_64& g, const EnvRing& R, int wmax, int nterms = 3);
EnvElt env_phi(const EnvElt& x);

// delta^{k+1}(xi S - t + c) with t = c + xi S substituted, in V(0, 0..k+1); c is the given
// integer mu-polynomial or the delta-constant symbol Const(1); level base_precision - k - 1
DeltaPoly envelope_relation(int p, Mode mode, int base_precision, int k, const std::optional<std::vector<i64>>& center);

// Convenience constructors for common towers.
EnvSpec envelope_spec(int p, Mode mode, const std::vector<std::vector<i64>>& centers, int weight_cap);
EnvSpec chart_spec(int p, Mode mode, int d, int degree_cap);

}  // namespace qprism
