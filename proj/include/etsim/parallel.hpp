#pragma once

#include <cstdint>
#include <functional>

namespace etsim {

/// Calls body(index) for every index in [0, count) using `workers` threads
/// (0 means hardware concurrency). Indices are handed out in fixed-size
/// blocks; callers write results into per-index slots, so output never
/// depends on the schedule. The first exception thrown by the body is
/// rethrown after all workers have stopped.
void parallel_for(std::uint64_t count, unsigned workers, const std::function<void(std::uint64_t)>& body);

[[nodiscard]] unsigned resolve_workers(unsigned requested) noexcept;

}  // namespace etsim
