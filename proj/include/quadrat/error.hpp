#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace quadrat {

enum class ErrorKind {
  parse,
  contradiction,
  dangling_reference,
  unknown_id,
  degenerate,
  scale_too_large,
  infeasible_config,
  dimension_mismatch,
  incongruent,
  incomplete_grid,
  empty_input,
  unattainable_target,
  missing_group,
  duplicate,
  invalid_config,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so the CLI can map it
/// to a stable machine-parsable prefix.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace quadrat
