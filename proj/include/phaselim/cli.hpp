#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phaselim::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kExitPass = 0,
    kExitFail = 1,
    kExitUsage = 2,
    kExitIo = 3,
    kExitNumeric = 4,
};

// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Flat "key = value" text or a JSON object turned into "--key value" pairs.
std::vector<std::string> config_to_args(const std::string& text);

std::string sha256_hex(const std::string& bytes);

}  // namespace phaselim::cli
