#pragma once

namespace fixtures {

inline constexpr const char* fig1a =
    "S1 -> S2 + S3 @ 1 a1\n"
    "S2 + S3 -> 2 S2 @ 1 a1\n"
    "2 S2 -> S1 @ 1 a1\n"
    "2 S1 -> 2 S3 @ 1 a2\n"
    "2 S3 -> 2 S1 @ 1 a2\n";

inline constexpr const char* fig1b =
    "species: S1 S2 S3 S4\n"
    "S1 <=> S2 + S4 @ 1 a1\n"
    "2 S1 <=> 2 S3 @ 1 a2\n";

inline constexpr const char* special =
    "S1 <=> 2 S2 @ 1 k1\n"
    "S2 <=> 2 S3 @ 1 k2\n";

inline constexpr const char* two_by_two =
    "S1 <=> S2 @ 1 k\n";

}  // namespace fixtures
