#pragma once

#include <cstdint>
#include <string_view>

#include <boost/random/mersenne_twister.hpp>

namespace geoflow {

/// The one generator used for every random draw in the library. Boost's
/// distributions are plain header code, so a seed reproduces the same
/// stream on every standard library.
using Rng = boost::random::mt19937_64;

inline constexpr std::string_view kRngName =
    "boost::random::mt19937_64 + boost::random::normal_distribution";

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seed for sub-stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

double standard_normal(Rng& rng);

}  // namespace geoflow
