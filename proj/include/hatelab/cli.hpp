#pragma once

#include <string>
#include <vector>

namespace hatelab {

inline constexpr const char* kVersion = "0.1.0";

// Parses argv (argv[0] is the program name) and runs one subcommand:
// filter, ingest, annotate, train-meta, ensemble, evaluate, stats.
// Returns 0 on success, 1 on usage errors, 2 on data errors, 3 when some
// texts were quarantined.
int run_cli(const std::vector<std::string>& argv);
int run_cli(int argc, char** argv);

}  // namespace hatelab
