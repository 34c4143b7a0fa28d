#pragma once

#include <cstdint>
#include <string>

namespace repoforge {

/// Deterministic approximate token count: maximal runs of identifier
/// characters and maximal runs of other non-space characters each count
/// as one token. Budgets only need proportional accuracy.
std::uint64_t approx_token_count(const std::string& text);

}  // namespace repoforge
