#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace geoldp::cli {

// Replicate loops allocate and free point-sized buffers (hundreds of KB) per
// replicate. glibc serves those with fresh mmaps by default, so every
// replicate pays page faults; keeping them on the heap removes that cost.
inline void keep_large_buffers_on_heap() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
}

}  // namespace geoldp::cli
