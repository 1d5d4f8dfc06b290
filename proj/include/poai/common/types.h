#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poai {

using Bytes = std::vector<std::uint8_t>;

// Logical simulation time in seconds since genesis. No wall clock is ever read.
using SimTime = std::int64_t;
using Seconds = std::int64_t;

using DeedId = std::string;

}  // namespace poai
