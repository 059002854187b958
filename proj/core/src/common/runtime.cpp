#include "oucd/common/runtime.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace oucd {

void tune_allocator() noexcept {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

} // namespace oucd
