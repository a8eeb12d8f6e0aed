// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace dpg {

// Worker cap for internal parallelism: DPG_THREADS env var if set, otherwise
// the machine's core count. Always at least 1.
int max_threads();

// Explicit override (0 restores the default). Used by the C API.
void set_max_threads(int n);

// Runs fn(i) for i in [0, count) over a deterministic block partition. Each
// index is processed by exactly one worker; fn must not touch shared state
// for distinct indices.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace dpg
