#pragma once

#include <functional>
#include <memory>
#include <string>

#include "qprism/envelope.hpp"
#include "qprism/report.hpp"

namespace qprism {

// delta-homomorphism between envelope towers, fixed by the images of the tower
// variables tau_v (or t_v for delta-constant variables); images of delta^k(tau_v)
// are delta^k of the image, computed in a guard precision of the target
class EnvHom {
public:
    using ImageFn = std::function<std::vector<EnvElt>(const EnvRing& target)>;
    // image of delta^k of variable v, as an element of the target
    using GenFn = std::function<EnvElt(int v, int k)>;

    EnvHom(std::string name, std::shared_ptr<const EnvRing> source, std::shared_ptr<const EnvRing> target, ImageFn images);
    EnvHom(std::string name, std::shared_ptr<const EnvRing> source, std::shared_ptr<const EnvRing> target, GenFn gens);

    const std::string& name() const { return name_; }
    const EnvRing& source() const { return *src_; }
    const EnvRing& target() const { return *tgt_; }
    std::shared_ptr<const EnvRing> source_ptr() const { return src_; }
    std::shared_ptr<const EnvRing> target_ptr() const { return tgt_; }

    EnvElt operator()(const EnvElt& x) const;
    EnvElt on_generator(int v, int k) const;
    EnvElt on_basis(const Key& k) const;

private:
    std::string name_;
    std::shared_ptr<const EnvRing> src_, tgt_;
    ImageFn images_;
    GenFn gens_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<int, int>, EnvElt> gen_cache_;
    mutable std::map<Key, EnvElt> basis_cache_;
};

// composite g o f
std::shared_ptr<const EnvHom> compose(std::shared_ptr<const EnvHom> g, std::shared_ptr<const EnvHom> f);

// multiplicativity, additivity and delta-compatibility on random samples
Report hom_check(const EnvHom& f, int samples, std::uint64_t seed, int wmax);

}  // namespace qprism
