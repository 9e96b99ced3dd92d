#include "geoflow/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#include "geoflow/error.hpp"

namespace geoflow {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::size_limit: return "size limit";
    case ErrorKind::parse_error: return "parse error";
    case ErrorKind::duplicate_point: return "duplicate point";
    case ErrorKind::corrupted_state: return "corrupted state";
    case ErrorKind::construction_failed: return "construction failed";
    case ErrorKind::numerical_failure: return "numerical failure";
  }
  return "unknown";
}

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix_seed(seed ^ mix_seed(stream));
}

double standard_normal(Rng& rng) {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace geoflow
