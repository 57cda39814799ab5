#pragma once

#include <ostream>

namespace hmnss {

// exit codes: 0 ok (diverged runs included), 2 configuration error, 3 numerical/internal error
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hmnss
