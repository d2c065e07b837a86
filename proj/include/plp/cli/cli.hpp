#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plp::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kNegative = 1;  // command ran; the answer is "no" (invalid pack, corrupted blob)
inline constexpr int kFailed = 2;    // an error code was raised
inline constexpr int kUsage = 64;

// Runs one command line. argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace plp::cli
