// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/workflow.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace claimchain {

// One declarative action: `action positional... key=value... flag...`.
// Quoted strings keep their spaces; `#` starts a comment.
struct ScenarioStep {
    size_t line_no = 0;
    std::string action;
    std::vector<std::string> args;
    std::map<std::string, std::string> kwargs; // bare flags map to "true"
};

struct ScenarioScript {
    std::vector<ScenarioStep> steps;

    static ScenarioScript parse(const std::string& text);
    static ScenarioScript load(const std::filesystem::path& p);
};

class ScenarioError : public Error {
  public:
    ScenarioError(size_t line_no, size_t step_no, const std::string& what)
        : Error(Err::ParseError, "step " + std::to_string(step_no) + " (line " +
                                     std::to_string(line_no) + "): " + what),
          line_no_(line_no), step_no_(step_no)
    {
    }

    size_t line_no() const { return line_no_; }
    size_t step_no() const { return step_no_; }

  private:
    size_t line_no_;
    size_t step_no_;
};

struct ScenarioResult {
    std::string summary;
    std::map<std::string, size_t> kind_census; // mined transactions per kind
    size_t blocks = 0;
    std::filesystem::path ledger_path;
    std::filesystem::path trace_path;
};

// Executes the script against a fresh network, then writes ledger, trace,
// accounts, insurer databases and a human-readable summary under out_dir.
// Any failed step or broken end-of-run invariant throws ScenarioError.
ScenarioResult run_scenario(const ScenarioScript& script, const std::filesystem::path& out_dir,
                            uint64_t seed = 7, uint64_t wait_period_ms = 1000);

} // namespace claimchain
