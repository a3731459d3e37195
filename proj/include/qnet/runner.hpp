#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnet/scenario.hpp"

namespace qnet {

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<double> epsilon;
    std::string out_dir;  // beats the scenario and the QNET_OUT_DIR default
    int jobs = 1;
};

// Hard failures throw (ParseError/SemanticError/EngineError carry the exit
// code); a finished run that fails its configured checks returns exit_code 2.
struct CommandResult {
    int exit_code = 0;
    std::string report_json;             // full report document, "" for validate
    std::vector<std::string> lines;      // human-readable summary
    std::vector<std::string> artifacts;  // files written
};

CommandResult cmd_validate(const std::string& path);
CommandResult cmd_run(const std::string& path, const RunOptions& opts = {});
// sizes empty: falls back to the scenario's subsets list
CommandResult cmd_sweep(const std::string& path, const std::vector<int>& sizes,
                        const RunOptions& opts = {});

}  // namespace qnet
