#pragma once

namespace oucd {

/// Keeps freed large blocks in the malloc arena instead of returning them to
/// the OS. Training reallocates the same multi-megabyte activations every
/// step; without this each one is page-faulted and zeroed again. No-op off glibc.
void tune_allocator() noexcept;

} // namespace oucd
