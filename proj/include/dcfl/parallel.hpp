#pragma once

#include <cstddef>
#include <functional>

namespace dcfl {

// Fan a loop body over [0, n). workers <= 1 runs the serial reference path;
// otherwise the OpenMP kernel is used. Each index must write only its own
// output slot, so both paths produce bitwise-identical results.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

// Serial reference, kept separate so tests and the benchmark can call it
// regardless of the workers setting.
void serial_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dcfl
