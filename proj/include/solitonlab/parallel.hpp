#pragma once

#include <functional>

namespace solitonlab {

/// Runs `fn(i)` for i in [0, count) on up to `workers` threads. Results
/// must be written to per-index slots so the outcome is order independent.
/// The first exception thrown by a worker is rethrown after all join.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

} // namespace solitonlab
