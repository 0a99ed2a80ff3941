// SPDX-License-Identifier: Apache-2.0
//
// hgm-mimo: holonomic-gradient evaluation of MIMO zero-forcing performance
// Copyright (C) 2026 The hgm-mimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Minimal fork-join helper for independent tasks.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hgm_mimo
{
    /// Number of worker threads: HGM_MIMO_THREADS when set to a positive integer, else the
    /// hardware concurrency (at least 1).
    unsigned worker_count();

    /// Runs task(i) for i in [0, count) on up to worker_count() threads. Tasks must write only
    /// to their own outputs. If tasks throw, the exception of the lowest failing index is
    /// rethrown after all workers finished, so error reporting does not depend on scheduling.
    template <typename Task>
    void parallel_for(std::size_t count, Task &&task)
    {
        const std::size_t workers = std::min<std::size_t>(worker_count(), count);
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < count; ++i)
                task(i);
            return;
        }

        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(count);
        const auto run = [&] {
            for (std::size_t i = next++; i < count; i = next++)
            {
                try
                {
                    task(i);
                }
                catch (...)
                {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w)
            pool.emplace_back(run);
        run();
        for (auto &th : pool)
            th.join();
        for (const auto &e : errors)
            if (e)
                std::rethrow_exception(e);
    }
}
