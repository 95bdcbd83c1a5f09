#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pekar {

enum class ErrorCode {
  invalid_argument,
  grid_mismatch,
  support_overflow,
  gram_violation,
  dependent_orbitals,
  oracle_size_limit,
  profile_budget,
  size_limit,
  empty_block,
  dimension_overflow,
  non_convergence,
  repulsion_dominance,
  missing_entries,
  support_overlap,
  io,
  config,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pekar
