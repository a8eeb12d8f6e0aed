// Copyright (C) 2026 The DPG Authors
// SPDX-License-Identifier: Apache-2.0
#include "dpg/threading.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace dpg {

namespace {
std::atomic<int> g_thread_override{0};

int env_threads() {
    const char* s = std::getenv("DPG_THREADS");
    if (!s || !*s) return 0;
    int n = std::atoi(s);
    return n > 0 ? n : 0;
}
}  // namespace

int max_threads() {
    int n = g_thread_override.load();
    if (n <= 0) n = env_threads();
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    return n > 0 ? n : 1;
}

void set_max_threads(int n) { g_thread_override.store(n > 0 ? n : 0); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t workers = static_cast<std::size_t>(max_threads());
    if (workers > count) workers = count;
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = count * w / workers;
        std::size_t hi = count * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn]() {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace dpg
