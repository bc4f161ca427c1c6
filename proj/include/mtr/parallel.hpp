#pragma once

#include <cstddef>
#include <memory>

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

namespace mtr {

/// Runs body(i) for i in [0, n). Results must be written to per-index
/// slots so the outcome is independent of scheduling.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    if (n == 0) return;
    if (n == 1) {
        body(std::size_t{0});
        return;
    }
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 1),
                      [&](const tbb::blocked_range<std::size_t>& r) {
                          for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
                      });
}

/// Caps worker threads for the lifetime of the object (0 = library default).
class WorkerLimit {
public:
    explicit WorkerLimit(std::size_t workers) {
        if (workers > 0)
            control_ = std::make_unique<tbb::global_control>(
                tbb::global_control::max_allowed_parallelism, workers);
    }

private:
    std::unique_ptr<tbb::global_control> control_;
};

}  // namespace mtr
