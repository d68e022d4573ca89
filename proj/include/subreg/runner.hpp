#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subreg/problem.hpp"
#include "subreg/report.hpp"

namespace subreg {

enum ExitCode : int { kExitOk = 0, kExitExpectation = 1, kExitParse = 2, kExitEval = 3 };

struct ScheduleOverride {
  double r0 = 0.5;
  double decay = 0.6;
  std::size_t shells = 10;
  std::size_t points = 1024;
};

/// "r0,decay,K,N".
ScheduleOverride parse_schedule_override(std::string_view text);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<ScheduleOverride> schedule;
  bool skip_eval_errors = false;
  std::optional<double> assume_eps;
};

struct CurveFile {
  std::string name;  // file name inside the curves directory
  std::string csv;
};

struct RunResult {
  json report;
  int exit_code = kExitOk;
  std::vector<CurveFile> curves;
  std::string diagnostic;  // parse error text when exit_code == kExitParse
};

/// Executes the tasks of a parsed document in order.
RunResult run_problem(const ProblemSpec& spec, std::string_view document, const RunOptions& opt = {});
/// Parses then runs; parse failures give exit code 2 and an empty report.
RunResult run_document(std::string_view document, const RunOptions& opt = {});
/// Runs a catalog example and attaches its qualitative checks; failed checks give exit code 1.
RunResult reproduce_example(std::string_view id, const RunOptions& opt = {});

}  // namespace subreg
