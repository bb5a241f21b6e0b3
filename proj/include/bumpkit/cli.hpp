#pragma once

#include "bumpkit/grid.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bumpkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitUsage = 64;

// ones | power:g | spike:h:w | appendix:a:p | file:<path>
// appendix gives u_I for role "u" and v_I for role "v" on [0, b].
StepFn parse_weight(const std::string& spec, const Grid& g, const std::string& role);

// `key = value` lines, '#' starts a comment
std::map<std::string, std::string> read_config_file(const std::string& path);

// Full command-line entry; returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace bumpkit
