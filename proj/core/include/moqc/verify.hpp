#pragma once

// Self-checks runnable from the command line: analytic derivatives against
// finite differences, unitarity of propagators, and K_beta against a
// Monte-Carlo noise-loss estimate.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace moqc {

struct VerifyCheck {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const;
  void print(std::ostream& os) const;
};

/// gradients | hessians | unitarity | kbeta-oracle | all
const std::vector<std::string>& verify_suites();
VerifyReport run_verify(const std::string& suite, std::uint64_t seed = 1, int threads = 1);

}  // namespace moqc
