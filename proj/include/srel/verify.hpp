#ifndef SREL_VERIFY_HPP
#define SREL_VERIFY_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace srel {

// One verification check: an expected value from a closed form, the observed
// value from the estimator under test, and the tolerance both were compared
// at. `reference` names the mathematical fact being exercised.
struct CheckResult {
  std::string criterion;  // grouping tag, e.g. "3a"
  std::string name;
  std::string reference;
  std::string expected;
  std::string observed;
  std::string tolerance;
  bool pass = false;
  double seconds = 0.0;
};

struct VerifyOptions {
  bool quick = false;                // reduced path counts, same checks
  std::uint64_t seed = 20240801ULL;  // documented default
  int threads = 0;
  bool corrupt_oracle = false;  // harness self-test: breaks one expected constant
};

std::vector<CheckResult> run_verification(const VerifyOptions& opts, std::ostream& progress);

bool all_passed(const std::vector<CheckResult>& results);
void print_check_table(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace srel

#endif
