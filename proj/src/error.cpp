#include "quadrat/error.hpp"

namespace quadrat {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::contradiction: return "contradiction";
    case ErrorKind::dangling_reference: return "dangling-reference";
    case ErrorKind::unknown_id: return "unknown-id";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::scale_too_large: return "scale-too-large";
    case ErrorKind::infeasible_config: return "infeasible-config";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::incongruent: return "incongruent";
    case ErrorKind::incomplete_grid: return "incomplete-grid";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::unattainable_target: return "unattainable-target";
    case ErrorKind::missing_group: return "missing-group";
    case ErrorKind::duplicate: return "duplicate";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace quadrat
