#pragma once

#include <functional>
#include <memory>
#include <string>

#include "qprism/envelope.hpp"
#include "qprism/report.hpp"

namespace qprism {

// Element (x0, x1) of the twisted extension A[T]/(T^2 - alpha T), x0 + x1 T.
struct TwistedExtElt {
    EnvElt alpha;
    EnvElt x0, x1;
};

TwistedExtElt ext_make(const EnvElt& alpha, const EnvElt& x0, const EnvElt& x1);
TwistedExtElt ext_add(const TwistedExtElt& a, const TwistedExtElt& b);
TwistedExtElt ext_mul(const TwistedExtElt& a, const TwistedExtElt& b);
EnvElt ext_pi0(const TwistedExtElt& a);
EnvElt ext_piAlpha(const TwistedExtElt& a);
EnvElt ext_D(const TwistedExtElt& a);
// delta-structure with delta(0,1) = (0, beta); requires delta(alpha) = alpha beta
TwistedExtElt ext_delta(const TwistedExtElt& a, const EnvElt& beta);
bool ext_same(const TwistedExtElt& a, const TwistedExtElt& b);

// Generator data of an alpha-derivation on an envelope tower, evaluated in a given
// precision of the tower: images[v] is the image of tau_v (of t_v for delta-constants).
struct DerivationData {
    EnvElt alpha, beta;
    std::vector<EnvElt> images;
};

struct DerivationSpec {
    std::string name;
    std::function<DerivationData(const EnvRing&)> data;
    bool delta_compatible = true;
    // false drops the alpha term of the twisted Leibniz rule (negative control)
    bool leibniz = true;
};

class Derivation {
public:
    Derivation(DerivationSpec spec, std::shared_ptr<const EnvRing> ring);

    const DerivationSpec& spec() const { return spec_; }
    const EnvRing& ring() const { return *ring_; }
    std::shared_ptr<const EnvRing> ring_ptr() const { return ring_; }
    const EnvElt& alpha() const { return data_.alpha; }
    const EnvElt& beta() const { return data_.beta; }

    EnvElt apply(const EnvElt& x) const;
    EnvElt operator()(const EnvElt& x) const { return apply(x); }
    // gamma = 1 + alpha * d
    EnvElt gamma(const EnvElt& x) const;
    // image of delta^k(tau_v)
    EnvElt on_generator(int v, int k) const;
    EnvElt on_basis(const Key& k) const;

private:
    DerivationSpec spec_;
    std::shared_ptr<const EnvRing> ring_;
    DerivationData data_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<int, int>, EnvElt> gen_cache_;
    mutable std::map<Key, EnvElt> basis_cache_;
    // twisted product rule on (x, dx), (y, dy)
    EnvElt leibniz(const EnvElt& x, const EnvElt& dx, const EnvElt& y, const EnvElt& dy) const;
};

// q-Higgs derivation theta_i on a flat envelope or polynomial chart: alpha = t_i mu,
// beta = t_i^{p-1} eta, theta(tau_i) = 1 (theta(t_i) = [p]_q on a chart)
DerivationSpec qhiggs_derivation(const EnvRing& R, int i);
// zero derivation with the given alpha, beta
DerivationSpec zero_derivation(std::function<EnvElt(const EnvRing&)> alpha, std::function<EnvElt(const EnvRing&)> beta);

// s(x) = (x, dx) is multiplicative and additive
Report section_check(const Derivation& D, int samples, std::uint64_t seed, int wmax);
// delta(alpha) = alpha beta and delta(s(x)) = s(delta(x)) in the twisted delta-extension
Report delta_compat_check(const Derivation& D, int samples, std::uint64_t seed, int wmax);
// d(phi(x)) = (alpha^{p-1} + p beta) phi(d(x))
Report frobenius_relation_check(const Derivation& D, int samples, std::uint64_t seed, int wmax);
// d1 d2 = d2 d1; throws PreconditionViolated unless d1(alpha2) = d2(alpha1) = 0
Report commute_check(const Derivation& D1, const Derivation& D2, int samples, std::uint64_t seed, int wmax);

}  // namespace qprism
