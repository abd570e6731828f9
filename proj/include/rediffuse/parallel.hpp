#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace rediffuse::par {

// Global worker count; 0 means "use every hardware thread".
void set_threads(int n);
int threads();
int hardware_threads();

// Runs fn(i) for i in [0, count). Work items must be independent and write
// only to their own output slots; under that contract results are identical
// for any thread count, including the serial path.
void for_each_index(size_t count, const std::function<void(size_t)>& fn);

// Serial reference. The bench tool and the determinism tests diff the two.
void for_each_index_serial(size_t count, const std::function<void(size_t)>& fn);

}  // namespace rediffuse::par
