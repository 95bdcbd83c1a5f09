#include "pekar/error.hpp"

namespace pekar {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::grid_mismatch: return "grid mismatch";
    case ErrorCode::support_overflow: return "support overflow";
    case ErrorCode::gram_violation: return "gram violation";
    case ErrorCode::dependent_orbitals: return "dependent orbitals";
    case ErrorCode::oracle_size_limit: return "oracle size limit";
    case ErrorCode::profile_budget: return "profile budget";
    case ErrorCode::size_limit: return "size limit";
    case ErrorCode::empty_block: return "empty block";
    case ErrorCode::dimension_overflow: return "dimension overflow";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::repulsion_dominance: return "repulsion dominance violated";
    case ErrorCode::missing_entries: return "missing entries";
    case ErrorCode::support_overlap: return "support overlap";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace pekar
