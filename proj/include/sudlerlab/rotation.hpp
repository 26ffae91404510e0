#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "sudlerlab/fixed_point.hpp"

namespace sudlerlab::rotation {

// {n*alpha} by one multiplication; err_ulp <= n*(err0+1).
inline fixed_fraction frac_at(const fixed_fraction& alpha, std::uint64_t n) {
    if (n == 0) return fixed_fraction::zero(alpha.bits);
    return alpha.mul_u64_mod1(n);
}

// Streaming orbit. The mantissa after any number of steps is bit-identical to
// frac_at at the same index (addition mod 1 is exact), so chunked runs seeded
// by frac_at reproduce the sequential stream exactly, error bounds included.
class orbit_cursor {
public:
    explicit orbit_cursor(const fixed_fraction& alpha, std::uint64_t start = 0)
        : alpha_(alpha), x_(frac_at(alpha, start)), n_(start) {}

    std::uint64_t index() const { return n_; }
    const fixed_fraction& current() const { return x_; }

    const fixed_fraction& next() {
        x_.add_mod1(alpha_);
        ++n_;
        return x_;
    }

private:
    fixed_fraction alpha_;
    fixed_fraction x_;
    std::uint64_t n_;
};

// Deterministic chunk-parallel pipeline over n = 1..m. `make(lo, hi)` computes
// the chunk covering [lo, hi] (a pure function of its range); `consume(i, chunk)`
// receives chunks strictly in index order on the calling thread, so any
// worker count and chunk size yield byte-identical downstream results. A bounded
// window keeps at most ~2*workers chunks in memory.
template <typename ChunkT, typename MakeFn, typename ConsumeFn>
void chunked_stream(std::uint64_t m, std::uint64_t chunk_size, unsigned workers,
                    MakeFn&& make, ConsumeFn&& consume) {
    if (m == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::uint64_t nchunks = (m - 1) / chunk_size + 1;
    auto range_of = [&](std::uint64_t i) {
        std::uint64_t lo = i * chunk_size + 1;
        std::uint64_t hi = std::min<std::uint64_t>(m, (i + 1) * chunk_size);
        return std::pair<std::uint64_t, std::uint64_t>(lo, hi);
    };

    if (workers <= 1) {
        for (std::uint64_t i = 0; i < nchunks; ++i) {
            auto [lo, hi] = range_of(i);
            ChunkT c = make(lo, hi);
            consume(i, std::move(c));
        }
        return;
    }

    struct slot {
        std::optional<ChunkT> data;
        std::exception_ptr error;
        bool done = false;
    };
    const std::uint64_t window = std::max<std::uint64_t>(2 * workers, 4);
    std::vector<slot> ring(static_cast<std::size_t>(std::min<std::uint64_t>(window, nchunks)));
    const std::uint64_t ring_size = ring.size();

    std::mutex mu;
    std::condition_variable cv_space, cv_data;
    std::uint64_t next_issue = 0, next_consume = 0;
    bool stop = false;

    auto worker_loop = [&] {
        for (;;) {
            std::uint64_t i;
            {
                std::unique_lock<std::mutex> lk(mu);
                cv_space.wait(lk, [&] {
                    return stop || next_issue >= nchunks || next_issue < next_consume + ring_size;
                });
                if (stop || next_issue >= nchunks) return;
                i = next_issue++;
            }
            auto [lo, hi] = range_of(i);
            std::optional<ChunkT> data;
            std::exception_ptr err;
            try {
                data.emplace(make(lo, hi));
            } catch (...) {
                err = std::current_exception();
            }
            {
                std::unique_lock<std::mutex> lk(mu);
                slot& s = ring[static_cast<std::size_t>(i % ring_size)];
                s.data = std::move(data);
                s.error = err;
                s.done = true;
            }
            cv_data.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker_loop);
    auto shut_down = [&] {
        {
            std::unique_lock<std::mutex> lk(mu);
            stop = true;
        }
        cv_space.notify_all();
        cv_data.notify_all();
        for (auto& t : pool)
            if (t.joinable()) t.join();
    };

    try {
        for (std::uint64_t i = 0; i < nchunks; ++i) {
            std::optional<ChunkT> data;
            std::exception_ptr err;
            {
                std::unique_lock<std::mutex> lk(mu);
                slot& s = ring[static_cast<std::size_t>(i % ring_size)];
                cv_data.wait(lk, [&] { return s.done; });
                data = std::move(s.data);
                err = s.error;
                s.data.reset();
                s.error = nullptr;
                s.done = false;
                ++next_consume;
            }
            cv_space.notify_all();
            // In-order consumption makes the smallest failing chunk index the
            // one reported, independent of worker scheduling.
            if (err) std::rethrow_exception(err);
            consume(i, std::move(*data));
        }
    } catch (...) {
        shut_down();
        throw;
    }
    shut_down();
}

} // namespace sudlerlab::rotation
