// Property checks shared by the unit-test suite and the acceptance report.
// Each check runs a fixed-seed sample and reports the worst deviation seen.
#pragma once

#include <cstdint>
#include <string>

namespace testsupport {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

PropertyResult prop_metric_axioms(std::uint64_t seed);
PropertyResult prop_symplectic_identity(std::uint64_t seed);
PropertyResult prop_composition_law(std::uint64_t seed);
PropertyResult prop_update_forms_agree(std::uint64_t seed);
PropertyResult prop_injectivity_and_cardinality(std::uint64_t seed);
PropertyResult prop_contraction(std::uint64_t seed);
PropertyResult prop_dare_initial_value();
PropertyResult prop_mass_and_cdf();
PropertyResult prop_determinism();

}  // namespace testsupport
