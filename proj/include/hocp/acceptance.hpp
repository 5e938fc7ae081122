#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hocp::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct Options {
  /// Replaces kappa in every schedule the suite builds (mutation testing).
  std::optional<double> kappa;
  /// Run only these criteria (empty: all). Criterion 11 pulls in 1, 5, 6.
  std::vector<int> only;
};

std::vector<CriterionResult> run_all(const Options& opt = {});

/// "PASS  [ 1] name: detail", one line per criterion.
std::string format_line(const CriterionResult& r);

/// Prints one line per criterion and returns true iff all passed.
bool print_report(std::ostream& os, const std::vector<CriterionResult>& results);

}  // namespace hocp::acceptance
