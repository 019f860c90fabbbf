#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stablebranch {

struct ValidationRow {
  std::string check;
  std::string measure;  // what `value` is: "max_abs_z", "max_rel_error", ...
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct ValidationOptions {
  // nullopt runs every check; an empty list runs none.
  std::optional<std::vector<std::string>> selection;
  // Fault injection for the criticality check.
  double two_offspring_probability = 0.5;
  std::size_t threads = 0;
};

// Names of all checks, in execution order.
const std::vector<std::string>& validation_check_names();

// Each check draws from its own stream derived from (seed, check index), so a
// check's outcome does not depend on which other checks are selected.
// Failures are rows, never exceptions; unknown names in the selection throw
// std::invalid_argument.
std::vector<ValidationRow> run_validation_suite(std::uint64_t seed, const ValidationOptions& options = {});

void write_validation_csv(std::ostream& os, const std::vector<ValidationRow>& rows);

}  // namespace stablebranch
