#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vbakf {

/// Seeded generator. One per task; never shared between threads.
using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Independent stream seed for (root, label, index). Streams for distinct
/// labels or indices do not depend on each other, so adding sensors or sweep
/// points leaves existing streams untouched.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0);

/// Same, for a two-level index (e.g. sweep point, replication).
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t outer, std::uint64_t inner);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace vbakf
