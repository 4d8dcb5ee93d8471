#pragma once

namespace cablesoup {

// Entry point for the command line driver.  Parses argv, runs the requested
// experiment and writes a JSON report plus any data files into the output
// directory.  Returns the process exit code:
//   0  experiment ran and (where applicable) its statistical check passed
//   1  experiment ran but the check failed, or an internal error occurred
//   2  bad invocation or bad input (unparsable flags, missing files, ...)
int run(int argc, const char* const* argv);

}  // namespace cablesoup
