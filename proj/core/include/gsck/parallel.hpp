// Copyright Contributors to the gsck Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <functional>

namespace gsck {

/// Worker count: `GSCK_THREADS` when set to a positive integer, otherwise the hardware
/// concurrency (at least 1).
int workerCount();

/// Calls `body(begin, end)` over contiguous chunks covering [0, n). Chunk boundaries
/// depend only on `n` and the worker count, and every index is visited exactly once.
void parallelFor(std::size_t n, const std::function<void(std::size_t, std::size_t)> &body);

} // namespace gsck
