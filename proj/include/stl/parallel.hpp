#pragma once

#include <functional>

namespace stl {

// Worker cap for all internal loops. 0 means hardware concurrency.
void set_threads(int n);
int threads();

// Runs body(begin, end) over contiguous chunks of [0, n). Results must be
// written per index so the outcome is independent of the chunking.
void parallel_for(long n, const std::function<void(long, long)>& body);

}  // namespace stl
