#pragma once

namespace loralab {

// Full command-line workbench. Returns the process exit code: 0 success,
// 2 config or usage error, 3 training divergence, 4 I/O or data error.
// Subcommands: train, evaluate, perturb, sweep-layers, report, gen-data.
int cli_main(int argc, const char* const* argv);

}  // namespace loralab
