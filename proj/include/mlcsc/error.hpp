#pragma once
#include <stdexcept>
#include <string>
#include <vector>

namespace mlcsc {

// Iterative routine ran out of iterations; carries whatever it had.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last)
        : std::runtime_error(what), last_iterate(std::move(last)) {}
    std::vector<double> last_iterate;
};

}  // namespace mlcsc
