// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace mtm {

// Worker count from SPECTRUM_THREADS, else the hardware concurrency.
std::size_t default_workers();

// Runs body(i) for i in [0, count). Work is handed out by index so results
// written to per-index slots do not depend on the worker count. The first
// exception (lowest index) is rethrown after all workers stop. FFT tallies
// from workers are credited to the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace mtm
