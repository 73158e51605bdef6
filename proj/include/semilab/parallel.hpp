#pragma once

#include <cstddef>
#include <functional>

namespace semilab {

/// Worker count used by enumeration-heavy operations. Results never depend on
/// it: work is split into a fixed set of chunks and reduced in chunk order.
void set_workers(unsigned count);
unsigned workers();

/// Runs fn(0..count-1) on up to workers() threads. The exception from the
/// lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace semilab
