#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "qprism/envelope.hpp"
#include "qprism/report.hpp"

namespace qprism {

// Normalization of the PD comparison: X^{[n]} corresponds to tau^n / n!, so that
// sigma = tau^p / p corresponds to (p-1)! X^{[p]}.
inline constexpr const char* kPdNormalization = "X^[n] = tau^n/n!; sigma = (p-1)! X^[p]";

// Divided power polynomial ring (Z/p^{L+1})[X_1..X_d]_PD truncated at total degree maxdeg.
class PDRing {
public:
    static std::shared_ptr<const PDRing> make(int p, int d, int maxdeg, int top_level);
    int p() const { return p_; }
    int nvars() const { return d_; }
    int maxdeg() const { return maxdeg_; }
    int top_level() const { return top_; }
    // C(n,k) modulo p^{top_level+1}
    i64 binom_mod(int n, int k) const;

private:
    int p_ = 2, d_ = 1, maxdeg_ = 0, top_ = 0;
    std::vector<std::vector<i64>> pascal_;
};

class PDElt {
public:
    PDElt() = default;
    PDElt(std::shared_ptr<const PDRing> R, int level);
    static PDElt monomial(std::shared_ptr<const PDRing> R, int level, const Key& k, i64 c = 1);
    static PDElt var(std::shared_ptr<const PDRing> R, int level, int v, int n = 1);

    const PDRing& ring() const { return *R_; }
    int level() const { return level_; }
    i64 modulus() const { return ipow(R_->p(), level_ + 1); }
    const std::map<Key, i64>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    i64 coeff(const Key& k) const;
    void add_term(const Key& k, i64 c);
    PDElt reduced(int L) const;

    PDElt operator+(const PDElt& o) const;
    PDElt operator-(const PDElt& o) const;
    PDElt operator-() const;
    PDElt operator*(const PDElt& o) const;
    PDElt scaled(i64 s) const;
    PDElt pow(unsigned e) const;
    // exact division by p of an element whose coefficients are all divisible by p
    PDElt divided_by_p() const;
    // d/dX_v: X_v^{[n+1]} -> X_v^{[n]}
    PDElt derive(int v) const;

    bool operator==(const PDElt& o) const { return level_ == o.level_ && terms_ == o.terms_; }
    bool same(const PDElt& o) const;
    std::string to_string() const;
    nlohmann::ordered_json to_json() const;

private:
    std::shared_ptr<const PDRing> R_;
    int level_ = 0;
    std::map<Key, i64> terms_;
};

struct PDSigmaData {
    EnvElt tau, t, b, sigma;
    bool verified = false;  // tau^p = p sigma at the level of sigma
};

// sigma = (1-p^{p-1})^{-1}(-b - delta(tau) + sum_nu C(p,nu)/p t^{p-nu} p^{nu-1} tau^nu)
PDSigmaData sigma_from(const EnvElt& tau, const EnvElt& t, const EnvElt& b);
// sigma for variable i of a flat q=1 envelope; b defaults to delta(a_i)/p and must exist
PDSigmaData sigma_of(const EnvRing& E, int i, std::optional<i64> b = std::nullopt);

// Dictionary delta^k(tau_v) -> PD polynomial, delivered at PD level out_level from an
// envelope of precision out_level + K.
class EnvToPD {
public:
    EnvToPD(std::shared_ptr<const EnvRing> E, int K);
    int depth() const { return K_; }
    int out_level() const { return out_; }
    std::shared_ptr<const PDRing> pd() const { return pd_; }
    const PDElt& image(int v, int k) const { return images_.at(v).at(k); }
    PDElt operator()(const EnvElt& x) const;
    nlohmann::ordered_json dictionary() const;

private:
    std::shared_ptr<const EnvRing> E_;
    int K_, out_;
    std::shared_ptr<const PDRing> pd_;
    std::vector<std::vector<PDElt>> images_;
};

Report sigma_antisym_check(const PDSigmaData& d12, const PDSigmaData& d21);
Report sigma_cocycle_check(const PDSigmaData& d12, const PDSigmaData& d13, const PDSigmaData& d23);

}  // namespace qprism
