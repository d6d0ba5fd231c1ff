#pragma once

#include <cstddef>

namespace snake {

// Branch-free sin and cos over an array, written so the loop vectorizes.
// Accurate to a few ulp for |x| < 1e6; larger arguments lose precision.
void sincos_array(const double* x, double* s, double* c, std::size_t n);

}  // namespace snake
