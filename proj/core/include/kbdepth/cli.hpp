#ifndef KBDEPTH_CLI_HPP_
#define KBDEPTH_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace kbdepth {

// Dispatches one command line (without the program name).  Reports go to
// `out` as ordered JSON; diagnostics go to `err`.  Returns 0 on success, 1
// on domain failures (unreachable queries, invalid traces, infeasible
// allocations, failed self-checks), 2 on usage or parse problems.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace kbdepth

#endif  // KBDEPTH_CLI_HPP_
