#pragma once

namespace percont::cli {

/// Exit codes: 0 pipeline passed or reached the target, 2 completed with a
/// failing check, boundary exit, fold or step failure, 1 operational error.
int run(int argc, const char* const* argv);

}  // namespace percont::cli
