#pragma once

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "qprism/env_hom.hpp"
#include "qprism/homalg.hpp"
#include "qprism/report.hpp"
#include "qprism/twisted.hpp"

namespace qprism {

using MVec = std::vector<EnvElt>;                    // coordinates on the basis e_1..e_r
using EnvMat = std::vector<std::vector<EnvElt>>;     // [row][column], acting on column vectors

// drop the monomials of weight above W
EnvElt truncate(const EnvElt& x, int W);

// Ring map between towers: R-linear (from an EnvHom) or Frobenius-semilinear.
struct RingMap {
    std::string name;
    std::shared_ptr<const EnvRing> src, tgt;
    std::function<EnvElt(const EnvElt&)> fn;

    EnvElt operator()(const EnvElt& x) const { return fn(x); }
    static RingMap from_hom(std::shared_ptr<const EnvHom> h);
    static RingMap frobenius(std::shared_ptr<const EnvRing> R);
    static RingMap identity(std::shared_ptr<const EnvRing> R);
};
RingMap compose(const RingMap& g, const RingMap& f);

using DerivList = std::vector<std::shared_ptr<const Derivation>>;
// theta_i for every variable of the host, in variable order (shared per host)
DerivList qhiggs_derivations(const std::shared_ptr<const EnvRing>& R);

MVec mvec_zero(const EnvRing& R, int r);
MVec mvec_add(const MVec& a, const MVec& b);
MVec mvec_sub(const MVec& a, const MVec& b);
MVec mvec_scale(const EnvElt& c, const MVec& a);
bool mvec_same(const MVec& a, const MVec& b);
bool mvec_is_zero(const MVec& a);
MVec mvec_map(const RingMap& g, const MVec& a);
MVec mat_apply(const EnvMat& A, const MVec& x);
std::string mvec_string(const MVec& a);

// Finite free module with a q-Higgs field: theta_{M,i}(a x) = gamma_i(a) theta_{M,i}(x) + theta_i(a) x
// and theta_{M,i}(e_j) = sum_k Theta_i[k][j] e_k. The index order is the list order.
class QHiggsModule {
public:
    QHiggsModule(std::shared_ptr<const EnvRing> host, DerivList thetas, std::vector<EnvMat> Theta, std::string name = "M");
    static QHiggsModule trivial(std::shared_ptr<const EnvRing> host, DerivList thetas, int rank, std::string name = "O");

    const EnvRing& host() const { return *host_; }
    std::shared_ptr<const EnvRing> host_ptr() const { return host_; }
    const DerivList& thetas() const { return thetas_; }
    const Derivation& derivation(int i) const { return *thetas_[i]; }
    int rank() const { return rank_; }
    int nindex() const { return static_cast<int>(thetas_.size()); }
    const EnvMat& matrix(int i) const { return Theta_[i]; }
    const std::vector<EnvMat>& matrices() const { return Theta_; }
    const std::string& name() const { return name_; }

    MVec zero() const { return mvec_zero(*host_, rank_); }
    MVec basis(int j) const;
    MVec theta(int i, const MVec& m) const;
    MVec gamma(int i, const MVec& m) const;
    // composites over the indices in the bit set S
    MVec theta_set(unsigned S, const MVec& m) const;
    MVec gamma_set(unsigned S, const MVec& m) const;

    nlohmann::ordered_json to_json() const;

private:
    std::shared_ptr<const EnvRing> host_;
    DerivList thetas_;
    std::vector<EnvMat> Theta_;
    int rank_;
    std::string name_;
};

// Element of M (x) qOmega^q: parts[I] is the coefficient of omega_I (I a bit set).
struct Form {
    std::map<unsigned, MVec> parts;
};
Form form_term(unsigned mask, MVec m);
Form form_add(const Form& a, const Form& b);
Form form_sub(const Form& a, const Form& b);
Form form_scale(int s, const Form& a);
bool form_same(const Form& a, const Form& b);
bool form_is_zero(const Form& a);
int form_degree(const Form& a);
Form truncate(const Form& a, int W);  // monomial weight + form degree <= W
std::string form_string(const Form& a);
// omega_I ^ omega_J = sign * omega_{I u J}; 0 if I and J meet
int wedge_sign(unsigned I, unsigned J);

// nabla(m omega_I) = sum_i theta_{M,i}(m) omega_i ^ omega_I
Form nabla(const QHiggsModule& M, const Form& x);

Report check_integrability(const QHiggsModule& M);
Report check_quasi_nilpotent(const QHiggsModule& M, int N_max);
// monomial basis forms a e_j omega_I with weight(a) + |I| <= W and |I| <= max_degree
std::vector<Form> basis_forms(const QHiggsModule& M, int W, int max_degree);
Report nabla_squared_check(const QHiggsModule& M, int W);

// Quotient of the q-Higgs complex by the forms of total weight above W (monomial weight
// plus form degree). Fails with WeightCapTooSmall if that span is not a subcomplex at the edge.
ChainComplex build_complex(const QHiggsModule& M, int W, int max_degree = -1);

QHiggsModule tensor(const QHiggsModule& M, const QHiggsModule& N);
MVec tensor_vec(const QHiggsModule& M, const QHiggsModule& N, const MVec& m, const MVec& n);
// M (x) N -> N (x) M
MVec swap_vec(const QHiggsModule& M, const QHiggsModule& N, const MVec& x);

using FormMap = std::function<Form(const Form&)>;

// theta'_i = phi(Theta_i) [p]_q t_i^{p-1}; checks the host Frobenius relation on generators
QHiggsModule frobenius_pullback(const QHiggsModule& M);
FormMap frobenius_chain_map(const QHiggsModule& M);

struct PullbackSpec {
    std::string name;
    RingMap g;
    std::vector<int> psi;       // index map Lambda -> Lambda'
    std::vector<EnvElt> c;      // twist constants in the target host
    DerivList target_thetas;
};
// g(alpha_i) = c_i alpha'_{psi(i)}, theta'_{i'}(c_i) = 0 for i' != psi(i), and the bialgebra
// condition on generators and samples
Report validate_pullback(const PullbackSpec& S, const DerivList& source_thetas, int samples, std::uint64_t seed, int wmax);
PullbackSpec frobenius_spec(const std::shared_ptr<const EnvRing>& R, const DerivList& thetas);
// S2 after S; OrderViolation unless both index maps are order preserving
PullbackSpec compose_pullbacks(const PullbackSpec& S, const PullbackSpec& S2);
QHiggsModule scalar_extension(const QHiggsModule& M, const PullbackSpec& S);
// m omega_I -> gamma^<_{M,psi,I}(m) (x) 1 * c_I omega_{psi(I)}; OrderViolation if psi is not monotone
FormMap pullback_chain_map(const QHiggsModule& M, const PullbackSpec& S);

// (m omega_I)(m' omega_J) = (m (x) gamma_{M',I}(m')) omega_I ^ omega_J in the complex of M (x) M'
Form product(const QHiggsModule& M, const QHiggsModule& N, const Form& x, const Form& y);

// F o nabla = nabla o F on the basis forms of weight <= W
Report chain_map_check(const std::string& name, const QHiggsModule& src, const QHiggsModule& tgt, const FormMap& F, int W, int max_degree);
// nabla(xy) = nabla(x) y + (-1)^|x| x nabla(y)
Report leibniz_check(const QHiggsModule& M, const QHiggsModule& N, int W);
// pullback(S2) o pullback(S) = pullback(S2 o S) on basis forms, and equal extended modules
Report pullback_cocycle_check(const QHiggsModule& M, const PullbackSpec& S, const PullbackSpec& S2, int W);
bool same_module(const QHiggsModule& A, const QHiggsModule& B);

// commuting base-entry matrices Theta_i = f_i(A); with nilpotent = true they are nilpotent mod (p, mu)
std::vector<EnvMat> random_commuting(const EnvRing& host, int d, int rank, std::mt19937_64& g, bool nilpotent);

}  // namespace qprism
