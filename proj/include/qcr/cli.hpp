#pragma once

namespace qcr::cli {

// Parses argv, dispatches to the protocol layer, writes CSV outputs and a
// JSON run manifest. Returns the process exit code: 0 success, 2 config or
// flag errors, 3 numerical failures, 4 fit non-convergence.
int run_cli(int argc, char** argv);

}  // namespace qcr::cli
