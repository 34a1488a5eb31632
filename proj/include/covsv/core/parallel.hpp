#pragma once

#include <cstddef>
#include <functional>

namespace covsv {

// Resolves a requested thread count: values <= 0 mean "auto", which honours
// the COVSV_THREADS environment variable and falls back to the hardware count.
int resolve_threads(int requested);

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// executed exactly once; callers write results into index-addressed slots so
// the outcome does not depend on scheduling. The first exception thrown by any
// body is rethrown on the calling thread.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace covsv
