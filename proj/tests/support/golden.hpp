#pragma once

// Golden CLI cases: tests/golden/cases.txt lists `name | exit | args`, and
// NAME.out holds the expected stdout.

#include <string>
#include <vector>

namespace pgame::testing {

struct GoldenCase {
  std::string name;
  int exit_code = 0;
  std::vector<std::string> args;
  std::string expected_stdout;
};

std::vector<GoldenCase> golden_cases();

struct BinaryRun {
  int exit_code = -1;
  std::string stdout_text;
};

/// Runs the built pgame binary with stderr discarded.
BinaryRun run_binary(const std::vector<std::string>& args);

}  // namespace pgame::testing
