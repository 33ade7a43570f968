#include "qprism/env_hom.hpp"

namespace qprism {

EnvHom::EnvHom(std::string name, std::shared_ptr<const EnvRing> source, std::shared_ptr<const EnvRing> target, ImageFn images)
    : name_(std::move(name)), src_(std::move(source)), tgt_(std::move(target)), images_(std::move(images)) {
    require(src_->p() == tgt_->p() && src_->base().mode == tgt_->base().mode, ErrorKind::RingMismatch,
            "homomorphism between towers over different bases");
}

EnvHom::EnvHom(std::string name, std::shared_ptr<const EnvRing> source, std::shared_ptr<const EnvRing> target, GenFn gens)
    : name_(std::move(name)), src_(std::move(source)), tgt_(std::move(target)), gens_(std::move(gens)) {
    require(src_->p() == tgt_->p() && src_->base().mode == tgt_->base().mode, ErrorKind::RingMismatch,
            "homomorphism between towers over different bases");
}

EnvElt EnvHom::on_generator(int v, int k) const {
    if (gens_) return gens_(v, k);
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = gen_cache_.find({v, k});
        if (it != gen_cache_.end()) return it->second;
    }
    EnvElt r;
    if (src_->is_const(v)) {
        require(k == 0, ErrorKind::BadInput, "delta-constant variable has no delta-iterates");
        auto imgs = images_(*tgt_);
        r = tgt_->import(imgs.at(v));
    } else {
        auto G = tgt_->at_precision(tgt_->precision() + k);
        auto imgs = images_(*G);
        EnvElt y = G->import(imgs.at(v));
        for (int i = 0; i < k; ++i) y = G->delta(y);
        r = tgt_->import(y);
    }
    std::lock_guard<std::mutex> g(mu_);
    gen_cache_.emplace(std::pair{v, k}, r);
    return r;
}

EnvElt EnvHom::on_basis(const Key& key) const {
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = basis_cache_.find(key);
        if (it != basis_cache_.end()) return it->second;
    }
    EnvElt r = tgt_->one();
    for (int v = 0; v < src_->nvars(); ++v) {
        if (!key[v]) continue;
        if (src_->is_const(v)) {
            r = r * on_generator(v, 0).pow(key[v]);
            continue;
        }
        auto d = src_->digits(key[v]);
        for (int k = 0; k < static_cast<int>(d.size()); ++k)
            if (d[k]) r = r * on_generator(v, k).pow(d[k]);
    }
    std::lock_guard<std::mutex> g(mu_);
    basis_cache_.emplace(key, r);
    return r;
}

EnvElt EnvHom::operator()(const EnvElt& x) const {
    require(x.ring_ptr() == src_.get(), ErrorKind::RingMismatch, "homomorphism applied outside its source");
    EnvElt r = tgt_->zero(std::min(x.level(), tgt_->precision()));
    for (const auto& [k, c] : x.terms()) r += on_basis(k).scaled(c);
    return r;
}

std::shared_ptr<const EnvHom> compose(std::shared_ptr<const EnvHom> g, std::shared_ptr<const EnvHom> f) {
    require(&f->target() == &g->source(), ErrorKind::RingMismatch, "composite of non-composable homomorphisms");
    return std::make_shared<EnvHom>(g->name() + "*" + f->name(), f->source_ptr(), g->target_ptr(),
                                    EnvHom::GenFn([g, f](int v, int k) { return (*g)(f->on_generator(v, k)); }));
}

Report hom_check(const EnvHom& f, int samples, std::uint64_t seed, int wmax) {
    Report rep("hom_check:" + f.name(), "ring map commuting with delta", seed);
    std::mt19937_64 g(seed);
    const EnvRing& S = f.source();
    for (int v = 0; v < S.nvars(); ++v)
        if (S.is_const(v) && S.precision() >= 1)
            rep.expect(f.target().delta(f.on_generator(v, 0)).is_zero(), "image of delta-constant " + S.spec().vars[v].name + " is not delta-constant");
    for (int i = 0; i < samples; ++i) {
        EnvElt x = random_env(g, S, wmax), y = random_env(g, S, wmax);
        rep.expect(f(x * y).same(f(x) * f(y)), "f(xy) != f(x)f(y) at x=" + x.to_string() + ", y=" + y.to_string());
        rep.expect(f(x + y).same(f(x) + f(y)), "f(x+y) != f(x)+f(y)");
        if (S.precision() >= 1) rep.expect(f(S.delta(x)).same(f.target().delta(f(x))), "f(delta x) != delta f(x) at x=" + x.to_string());
    }
    return rep;
}

}  // namespace qprism
