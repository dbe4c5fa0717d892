#pragma once

#include <span>

#include "gocor/common.hpp"

namespace gocor {

// Blocked reductions: partial sums over fixed-size blocks, combined in block
// order. The result depends only on the data, never on the thread count.

double sum(std::span<const double> x, Exec exec = Exec::Parallel);
double squared_norm(std::span<const double> x, Exec exec = Exec::Parallel);
double dot(std::span<const double> x, std::span<const double> y, Exec exec = Exec::Parallel);

}  // namespace gocor
