#pragma once

#include <functional>

namespace udsmc {

// Runs fn over [0, count) split into contiguous chunks, one worker thread
// per chunk beyond the first. Work items must write disjoint state; results
// cannot depend on the thread count (callers key RNG streams by item index,
// not by thread). threads <= 1 runs inline.
void parallel_chunks(long count, int threads,
                     const std::function<void(long, long)>& fn);

}  // namespace udsmc
