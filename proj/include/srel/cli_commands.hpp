#ifndef SREL_CLI_COMMANDS_HPP
#define SREL_CLI_COMMANDS_HPP

#include <ostream>
#include <string>
#include <vector>

namespace srel {

// Exit codes: 0 ok, 1 verification failure, 2 config error, 3 runtime or
// numeric error, 4 unsupported operation. All randomness flows from the
// config seed; identical (config, seed, build) produce byte-identical
// artifacts independently of --threads.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace srel

#endif
