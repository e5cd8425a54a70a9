#pragma once

#include <string>
#include <vector>

#include "wiredelay/io.hpp"

namespace wiredelay {

/// Result of one experiment run. All data files named in `files` are pure
/// functions of (config, master_seed): re-running reproduces them byte for
/// byte at any worker count. The manifest is the one exception -- its "run"
/// object records the wall-clock timestamp and duration.
struct RunOutcome {
    bool tolerance_failure = false;   ///< at least one asserted check failed
    std::vector<std::string> files;   ///< paths written, in write order
    Json summary;                     ///< same document as summary.json
};

/// Execute the configured experiment, writing CSV/JSON outputs plus a
/// manifest into config.output.directory. Throws ConfigError or
/// std::invalid_argument for configurations the experiment cannot run
/// (e.g. a scheme the requested flow does not support) and NumericalError
/// when an integrator aborts.
[[nodiscard]] RunOutcome run_experiment(const ExperimentConfig& config, int workers = 1);

/// Human-readable listing: one line per experiment with a one-line
/// description and the library module it exercises.
[[nodiscard]] std::string list_experiments_text();

/// Machine-readable listing: array of {name, description, module} objects.
[[nodiscard]] Json list_experiments_json();

}  // namespace wiredelay
