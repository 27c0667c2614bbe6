#pragma once

#include <cstdint>
#include <functional>

namespace netobj {

/// Worker count for parallel regions. Reads NETOBJ_THREADS each call;
/// 0 or unset means hardware concurrency.
int thread_count();

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one
/// per worker; fn must write only to slots indexed by i so the result is
/// identical for every worker count. Nested calls run serially.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace netobj
