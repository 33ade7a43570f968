#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qprism/base_ring.hpp"
#include "qprism/report.hpp"

namespace qprism {

// Parameters of a named property suite. Negative values select the full default grid
// of the suite; a given value restricts the grid to it.
struct SuiteConfig {
    int p = -1;
    int n = -1;
    int d = -1;
    int W = -1;
    int depth = -1;
    int samples = -1;
    std::uint64_t seed = 1;
    bool corrupt = false;        // run on a deliberately corrupted input; the suite must fail
    std::string golden_dir;      // envelope and PD golden files, compared when set
    int threads = 1;
};

struct SuiteInfo {
    std::string name;
    std::string description;
};

const std::vector<SuiteInfo>& suite_list();
// throws BadInput for an unknown suite name
Report run_suite(const std::string& name, const SuiteConfig& cfg);

// instance seed derived from a suite seed (splitmix64)
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// invariant factors of R_n / (x) and of ann(x), read off the multiplication-by-x matrix
std::vector<int> quotient_exponents(const BaseElt& x);
std::vector<int> annihilator_exponents(const BaseElt& x);

// golden renderings
std::string envelope_golden_name(int p, int n, int d);
std::string envelope_golden(int p, int n, int d);
std::string pd_golden_name(int p, int K);
std::string pd_golden(int p, int K);

}  // namespace qprism
