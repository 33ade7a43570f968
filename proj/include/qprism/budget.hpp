#pragma once

#include <cstddef>

namespace qprism {

// Global monomial cap; QPRISM_BUDGET overrides the default at first use.
std::size_t monomial_budget();
void set_monomial_budget(std::size_t cap);
void check_budget(std::size_t terms, const char* where);

}  // namespace qprism
