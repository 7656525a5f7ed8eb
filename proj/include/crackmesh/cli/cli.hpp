#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crackmesh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNetwork = 3;

/// Shortest decimal that round-trips, e.g. 81.450625 or 64.
std::string format_seconds(double seconds);

/// "1d 2h 3m 4s", "850ms", "3.17e+22 years".
std::string humanize_duration(double seconds);

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crackmesh::cli
