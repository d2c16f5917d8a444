#pragma once

#include <ostream>

namespace riccati_lab::cli {

/// Exit codes of the riccati-lab command.
enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kGuard = 2,
  kTolerance = 3,
  kMetricSignature = 4,
};

/// Runs `riccati-lab <construct|verify|star|fuzz> [flags]`. Errors are
/// written to `err` as a single `ERROR <code> <detail>` line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace riccati_lab::cli
