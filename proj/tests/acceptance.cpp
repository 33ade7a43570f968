// Acceptance run: one PASS/FAIL line per criterion, each under its wall-clock limit.
// Usage: acceptance [criterion ...]

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "qprism/suites.hpp"

using namespace qprism;

namespace {

struct Criterion {
    int id;
    std::string title;
    double limit_s;
    std::string suite;  // empty for the negative-control sweep
};

const std::vector<Criterion> kCriteria{
    {1, "delta-ring axioms", 10, "delta-axioms"},
    {2, "base identities", 1, "base-identities"},
    {3, "envelope normal form", 60, "envelope"},
    {4, "q-Higgs derivations", 60, "qhiggs-derivations"},
    {5, "PD comparison at q = 1", 60, "pd-comparison"},
    {6, "sigma identities", 30, "sigma"},
    {7, "complexes and chain maps", 120, "complexes"},
    {8, "stratification dictionary", 180, "stratification"},
    {9, "Poincare lemma at truncation", 60, "poincare"},
    {10, "q-de Rham cohomology of the affine line", 30, "affine-line"},
    {11, "Cech-Alexander H0 comparison", 60, "ca-h0"},
    {12, "negative controls", 10, ""},
};

int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::max(1u, std::min(hw, 8u)));
}

// runs the CLI and returns (exit code, stdout)
std::pair<int, std::string> run_cli(const std::string& args) {
    const std::string cmd = std::string(QPRISM_CLI) + " " + args + " 2>&1";
    FILE* f = popen(cmd.c_str(), "r");
    if (!f) return {-1, ""};
    std::string out;
    char buf[4096];
    while (std::size_t k = fread(buf, 1, sizeof buf, f)) out.append(buf, k);
    int status = pclose(f);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

// every suite, on its corrupted input, exits with 1 and reports a witness
bool negative_controls(std::string& detail) {
    bool ok = true;
    int failed_as_expected = 0;
    for (const auto& s : suite_list()) {
        auto [rc, out] = run_cli("--format json check " + s.name + " --corrupt --samples 3 --golden-dir " + QPRISM_GOLDEN_DIR);
        bool witness = false;
        try {
            auto j = nlohmann::json::parse(out);
            witness = !j.at("pass").get<bool>() && !j.at("witnesses").empty();
        } catch (const std::exception&) {
            witness = false;
        }
        if (rc == 1 && witness) {
            ++failed_as_expected;
        } else {
            ok = false;
            detail += " " + s.name + "(exit " + std::to_string(rc) + (witness ? "" : ", no witness") + ")";
        }
    }
    // and the clean runs of the CLI succeed on a cheap suite
    auto [rc, out] = run_cli("check base-identities");
    if (rc != 0) {
        ok = false;
        detail += " clean base-identities exit " + std::to_string(rc);
    }
    detail = std::to_string(failed_as_expected) + "/" + std::to_string(suite_list().size()) + " corrupted suites rejected" + detail;
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    bool all_ok = true;
    for (const auto& c : kCriteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        auto t0 = std::chrono::steady_clock::now();
        bool pass = false;
        std::string detail;
        try {
            if (c.suite.empty()) {
                pass = negative_controls(detail);
            } else {
                SuiteConfig cfg;
                cfg.seed = 20240601 + c.id;
                cfg.golden_dir = QPRISM_GOLDEN_DIR;
                cfg.threads = worker_count();
                Report r = run_suite(c.suite, cfg);
                pass = r.pass;
                detail = std::to_string(r.samples) + " checks";
                if (!r.witnesses.empty()) detail += "; first witness: " + r.witnesses.front();
            }
        } catch (const std::exception& e) {
            pass = false;
            detail = std::string("aborted: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.limit_s;
        const bool ok = pass && in_time;
        all_ok = all_ok && ok;
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.2fs / %.0fs", secs, c.limit_s);
        std::cout << "criterion " << (c.id < 10 ? " " : "") << c.id << ": " << (ok ? "PASS" : "FAIL") << "  [" << timing << "]  " << c.title
                  << " (" << detail << (in_time ? "" : "; time limit exceeded") << ")" << std::endl;
    }
    return all_ok ? 0 : 1;
}
