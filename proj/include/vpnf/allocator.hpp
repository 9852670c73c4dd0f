#pragma once

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace vpnf {

// Keeps large jet buffers in the heap between iterations instead of returning them to the
// OS; repeated mmap/munmap of multi-megabyte temporaries otherwise dominates small batches.
inline void tune_allocator() {
#ifdef __GLIBC__
    static const bool done = [] {
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, 1 << 30);
        return true;
    }();
    (void)done;
#endif
}

}  // namespace vpnf
