// qprism: command-line front end for the q-crystalline toolkit.
// Exit codes: 0 ok, 1 invariant violation, 2 bad input, 3 precision or budget exhausted.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qprism/budget.hpp"
#include "qprism/divided_powers.hpp"
#include "qprism/envelope.hpp"
#include "qprism/homalg.hpp"
#include "qprism/module_io.hpp"
#include "qprism/poincare.hpp"
#include "qprism/qhiggs.hpp"
#include "qprism/stratification.hpp"
#include "qprism/suites.hpp"

using namespace qprism;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
    std::string format = "table";
    std::uint64_t seed = 1;
};

bool json_out(const Common& c) { return c.format == "json"; }

void print_report(const Report& r, const Common& c) {
    if (json_out(c)) {
        std::cout << r.to_json().dump(2) << "\n";
        return;
    }
    std::cout << r.check << ": " << (r.pass ? "PASS" : "FAIL") << " (" << r.samples << " checks, seed " << r.seed << ")\n";
    if (!r.property.empty()) std::cout << "  property: " << r.property << "\n";
    for (const auto& w : r.witnesses) std::cout << "  witness: " << w << "\n";
    for (const auto& n : r.notes) std::cout << "  note: " << n << "\n";
}

int report_exit(const Report& r, const Common& c) {
    print_report(r, c);
    return r.pass ? 0 : 1;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::BadInput, "cannot read '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::BadInput, "'" + path + "' is not valid JSON: " + e.what());
    }
}

Mode parse_mode(const std::string& m) {
    if (m == "q") return Mode::Generic;
    if (m == "q1") return Mode::QOne;
    fail(ErrorKind::BadInput, "mode must be q or q1");
}

// "0;1" or "0,1;2" -> centers as integer mu-polynomials
std::vector<std::vector<i64>> parse_centers(const std::string& s) {
    std::vector<std::vector<i64>> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ';')) {
        std::vector<i64> poly;
        std::stringstream ps(part);
        std::string c;
        while (std::getline(ps, c, ',')) {
            i64 v = 0;
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size()) fail(ErrorKind::BadInput, "bad center coefficient '" + c + "'");
            poly.push_back(v);
        }
        if (poly.empty()) fail(ErrorKind::BadInput, "empty center");
        out.push_back(poly);
    }
    if (out.empty() || out.size() > 4) fail(ErrorKind::BadInput, "between one and four centers are supported");
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ',')) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
        if (ec != std::errc() || ptr != c.data() + c.size() || v < 0) fail(ErrorKind::BadInput, "bad integer '" + c + "'");
        out.push_back(v);
    }
    return out;
}

void require_prime(int p) {
    bool prime = p >= 2;
    for (int k = 2; k * k <= p; ++k) prime = prime && p % k != 0;
    if (!prime || p > 7) fail(ErrorKind::BadInput, "p must be a prime at most 7");
}

void print_cohomology(const CohomologyReport& r, const Common& c) {
    if (json_out(c)) std::cout << r.to_json().dump(2) << "\n";
    else std::cout << r.table();
}

// ------------------------------------------------------------------- envelope

std::string rule_table(const std::string& rules_json) {
    auto j = nlohmann::json::parse(rules_json);
    std::ostringstream os;
    os << "p = " << j["p"] << ", precision " << j["precision"] << ", mode " << j["mode"].get<std::string>() << ", weight cap "
       << j["weight_cap"] << "\n";
    for (const auto& v : j["variables"]) {
        os << v["name"].get<std::string>() << " (" << v["kind"].get<std::string>() << ")";
        if (v.contains("center")) os << " center " << v["center"].dump();
        os << "\n";
        if (!v.contains("rules")) continue;
        for (const auto& r : v["rules"])
            os << "  (delta^" << r["level"] << " tau)^p -> " << r["rhs"].size() << " terms: " << r["rhs"].dump() << "\n";
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* env = std::getenv("QPRISM_BUDGET")) {
        const std::string s(env);
        unsigned long long v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
            std::cerr << "error: QPRISM_BUDGET must be a positive integer, got '" << s << "'\n";
            return 2;
        }
        set_monomial_budget(static_cast<std::size_t>(v));
    }

    CLI::App app{"qprism: delta-rings, q-crystalline envelopes, q-Higgs complexes and stratifications"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--format", common.format, "output format")->check(CLI::IsMember({"json", "table"}));
    app.add_option("--seed", common.seed, "random seed");

    // check
    auto* check = app.add_subcommand("check", "run a named property suite");
    std::string suite;
    SuiteConfig cfg;
    bool list = false;
    check->add_option("suite", suite, "suite name");
    check->add_flag("--list", list, "list the suites");
    check->add_flag("--corrupt", cfg.corrupt, "run on a corrupted input; the suite must fail");
    check->add_option("--p", cfg.p, "restrict to this prime");
    check->add_option("--n,--prec,--precision", cfg.n, "restrict to this precision");
    check->add_option("--d", cfg.d, "restrict to this number of coordinates");
    check->add_option("--W", cfg.W, "weight truncation");
    check->add_option("--depth", cfg.depth, "PD depth");
    check->add_option("--samples", cfg.samples, "number of samples or instances");
    check->add_option("--golden-dir", cfg.golden_dir, "directory of golden files");
    check->add_option("--threads", cfg.threads, "worker threads")->check(CLI::Range(1, 64));

    // envelope
    auto* env = app.add_subcommand("envelope", "normal-form rewrite tables of a divided delta-envelope");
    int ep = 2, en = 2, eW = 8;
    std::string emode = "q", ecenters = "0";
    env->add_option("--p", ep, "prime");
    env->add_option("--n,--prec,--precision", en, "precision n of the base");
    env->add_option("--mode", emode, "q or q1");
    env->add_option("--centers", ecenters, "centers as mu-polynomials, e.g. \"0;1\" or \"1,2\"");
    env->add_option("--W", eW, "weight cap")->check(CLI::Range(1, 64));

    // pd
    auto* pd = app.add_subcommand("pd", "PD dictionary at q = 1, or the truncated Poincare lemma");
    int pp = 2, pK = 1, pN = 2, pd_d = 1, pdepth = 4;
    std::string pcenters = "0", pcoeffs = "2,1";
    bool ppoinc = false;
    pd->add_option("--p", pp, "prime");
    pd->add_option("--K", pK, "dictionary depth")->check(CLI::Range(0, 3));
    pd->add_option("--N", pN, "output precision")->check(CLI::Range(1, 4));
    pd->add_option("--centers", pcenters, "centers");
    pd->add_flag("--poincare", ppoinc, "check the truncated Poincare lemma instead");
    pd->add_option("--d", pd_d, "number of PD variables")->check(CLI::Range(1, 4));
    pd->add_option("--depth", pdepth, "PD truncation depth")->check(CLI::Range(1, 64));
    pd->add_option("--coeffs", pcoeffs, "coefficient module exponents, e.g. 2,1");

    // qhiggs
    auto* qh = app.add_subcommand("qhiggs", "q-Higgs module tasks");
    std::string qfile, qder, qtask = "cohomology";
    int qW = 3, qsamples = 50;
    qh->add_option("--module", qfile, "module JSON file");
    qh->add_option("--derivation", qder, "derivation JSON file (task derivation)");
    qh->add_option("--samples", qsamples, "random samples for the derivation checks")->check(CLI::Range(1, 100000));
    qh->add_option("--task", qtask, "task")->check(CLI::IsMember({"complex", "cohomology", "integrability", "nilpotence", "frobenius", "derivation"}));
    qh->add_option("--W", qW, "weight truncation")->check(CLI::Range(0, 32));

    // strat
    auto* st = app.add_subcommand("strat", "stratification tasks");
    std::string sfile, stask = "build";
    int sW = 4, sW0 = 1;
    st->add_option("--module", sfile, "module JSON file")->required();
    st->add_option("--task", stask, "task")->check(CLI::IsMember({"build", "cocycle", "roundtrip", "frobenius", "ca-h0", "gamma"}));
    st->add_option("--W", sW, "weight truncation of the simplicial envelopes")->check(CLI::Range(1, 16));
    st->add_option("--W0", sW0, "truncation of M for ca-h0")->check(CLI::Range(0, 16));

    // cohomology
    auto* co = app.add_subcommand("cohomology", "cohomology of a complex");
    std::string cfile;
    bool caff = false, cpoinc = false;
    int cp = 2, cn = 1, cW = 8, cd = 1, cdepth = 4;
    std::string cmode = "q", ccoeffs = "2,1";
    co->add_option("--complex", cfile, "complex JSON file");
    co->add_flag("--affine-line", caff, "q-de Rham complex of the affine line");
    co->add_flag("--poincare", cpoinc, "truncated PD de Rham complex");
    co->add_option("--p", cp, "prime");
    co->add_option("--n,--prec,--precision", cn, "precision");
    co->add_option("--mode", cmode, "q or q1");
    co->add_option("--W", cW, "t-degree bound")->check(CLI::Range(1, 40));
    co->add_option("--d", cd, "PD variables")->check(CLI::Range(1, 4));
    co->add_option("--depth", cdepth, "PD depth")->check(CLI::Range(1, 64));
    co->add_option("--coeffs", ccoeffs, "coefficient module exponents");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (check->parsed()) {
            if (list || suite.empty()) {
                if (json_out(common)) {
                    ojson j = ojson::array();
                    for (const auto& s : suite_list()) j.push_back({{"name", s.name}, {"description", s.description}});
                    std::cout << j.dump(2) << "\n";
                } else {
                    for (const auto& s : suite_list()) std::cout << s.name << "  " << s.description << "\n";
                }
                return list ? 0 : 2;
            }
            cfg.seed = common.seed;
            return report_exit(run_suite(suite, cfg), common);
        }

        if (env->parsed()) {
            require_prime(ep);
            if (en < 1 || en > 6) fail(ErrorKind::BadInput, "precision must be in 1..6");
            auto R = EnvRing::build(envelope_spec(ep, parse_mode(emode), parse_centers(ecenters), eW), en);
            if (json_out(common)) std::cout << nlohmann::ordered_json::parse(R->rules_json()).dump(2) << "\n";
            else std::cout << rule_table(R->rules_json());
            return 0;
        }

        if (pd->parsed()) {
            require_prime(pp);
            if (ppoinc) {
                CohomologyReport out;
                Report r = poincare_check(pp, pd_d, parse_int_list(pcoeffs), pdepth, &out);
                if (json_out(common)) {
                    ojson j;
                    j["report"] = r.to_json();
                    j["cohomology"] = out.to_json();
                    std::cout << j.dump(2) << "\n";
                } else {
                    print_report(r, common);
                    std::cout << out.table();
                }
                return r.pass ? 0 : 1;
            }
            const int W = static_cast<int>(ipow(pp, pK + 1)) - 1;
            auto E = EnvRing::build(envelope_spec(pp, Mode::QOne, parse_centers(pcenters), W), pN + pK);
            EnvToPD f(E, pK);
            auto dict = f.dictionary();
            if (json_out(common)) {
                std::cout << dict.dump(2) << "\n";
            } else {
                std::cout << "normalization: " << kPdNormalization << "\n";
                for (const auto& v : dict["variables"])
                    for (const auto& e : v["entries"])
                        std::cout << v["variable"].get<std::string>() << ": delta^" << e["delta_power"] << "(tau) -> " << e["text"].get<std::string>()
                                  << "\n";
            }
            return 0;
        }

        if (qh->parsed()) {
            if (qtask == "derivation") {
                if (qder.empty()) fail(ErrorKind::BadInput, "task derivation needs --derivation");
                DerivationInput din = derivation_from_json(read_json_file(qder));
                const Derivation& D = *din.derivation;
                Report r("derivation:" + D.spec().name, "twisted Leibniz rule, delta-compatibility and the Frobenius relation", common.seed);
                r.merge(section_check(D, qsamples, common.seed, 2));
                if (D.spec().delta_compatible) {
                    r.merge(delta_compat_check(D, qsamples, common.seed + 1, 1));
                    r.merge(frobenius_relation_check(D, qsamples, common.seed + 2, 1));
                }
                return report_exit(r, common);
            }
            if (qfile.empty()) fail(ErrorKind::BadInput, "--module is required");
            ModuleInput in = module_from_json(read_json_file(qfile));
            const QHiggsModule& M = *in.module;
            if (qtask == "integrability") return report_exit(check_integrability(M), common);
            if (qtask == "nilpotence") return report_exit(check_quasi_nilpotent(M, 64), common);
            if (qtask == "frobenius") {
                QHiggsModule F = frobenius_pullback(M);
                Report r = chain_map_check("frobenius", M, F, frobenius_chain_map(M), std::min(qW, 2), M.nindex());
                if (json_out(common)) {
                    ojson j;
                    j["pullback"] = F.to_json();
                    j["chain_map"] = r.to_json();
                    std::cout << j.dump(2) << "\n";
                } else {
                    std::cout << "phi^*" << M.name() << ": " << F.to_json().dump() << "\n";
                    print_report(r, common);
                }
                return r.pass ? 0 : 1;
            }
            Report integ = check_integrability(M);
            if (!integ.pass) return report_exit(integ, common);
            ChainComplex C = build_complex(M, qW);
            if (qtask == "complex") {
                std::cout << C.to_json().dump(json_out(common) ? 2 : -1) << "\n";
                return 0;
            }
            print_cohomology(cohomology_all(C), common);
            return 0;
        }

        if (st->parsed()) {
            ModuleInput in = module_from_json(read_json_file(sfile));
            const QHiggsModule& M = *in.module;
            auto S = build_simplicial(in.chart, sW);
            Stratification eps = strat_from_higgs(M, S);
            if (stask == "build") {
                std::cout << eps.to_json().dump(json_out(common) ? 2 : -1) << "\n";
                return 0;
            }
            if (stask == "cocycle") return report_exit(cocycle_check(eps), common);
            if (stask == "roundtrip") return report_exit(roundtrip_check(M, eps), common);
            if (stask == "frobenius") return report_exit(frobenius_strat_check(M, eps), common);
            if (stask == "gamma") return report_exit(gamma_compat_check(M, eps), common);
            Subgroup K;
            Report r = ca_h0_compare(M, eps, sW0, &K);
            r.notes.push_back("kernel invariant factors: " + nlohmann::json(K.exponents).dump());
            return report_exit(r, common);
        }

        if (co->parsed()) {
            const int modes = (cfile.empty() ? 0 : 1) + (caff ? 1 : 0) + (cpoinc ? 1 : 0);
            if (modes != 1) fail(ErrorKind::BadInput, "give exactly one of --complex, --affine-line, --poincare");
            if (!cfile.empty()) {
                ChainComplex C = ChainComplex::from_json(read_json_file(cfile));
                check_complex(C);
                print_cohomology(cohomology_all(C), common);
                return 0;
            }
            require_prime(cp);
            if (caff) {
                if (cn < 1 || cn > 6) fail(ErrorKind::BadInput, "precision must be in 1..6");
                auto A = EnvRing::build(chart_spec(cp, parse_mode(cmode), 1, cW + 1), cn);
                auto O = QHiggsModule::trivial(A, qhiggs_derivations(A), 1);
                print_cohomology(cohomology_all(build_complex(O, cW)), common);
                return 0;
            }
            print_cohomology(cohomology_all(pd_complex(cp, cd, parse_int_list(ccoeffs), cdepth)), common);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: BadInput: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: BadInput: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: BadInput: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
