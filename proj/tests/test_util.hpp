#ifndef LUMLOSS_TEST_UTIL_HPP
#define LUMLOSS_TEST_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "lumloss/image.hpp"

namespace lumloss::test {

// Test-side generator, deliberately separate from lumloss::Rng.
inline Image random_image(std::mt19937_64& gen, std::size_t h, std::size_t w, std::size_t c, double lo = 0.0,
                          double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Image img(h, w, c);
    for (double& v : img.data()) v = dist(gen);
    return img;
}

inline Tensor random_tensor(std::mt19937_64& gen, std::size_t h, std::size_t w, std::size_t c, double lo = -1.0,
                            double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor t(h, w, c);
    for (double& v : t.data()) v = dist(gen);
    return t;
}

// Central difference of f with respect to x[i].
inline double central_difference(const std::function<double()>& f, double& x, double step = 1e-5) {
    const double orig = x;
    x = orig + step;
    const double up = f();
    x = orig - step;
    const double down = f();
    x = orig;
    return (up - down) / (2.0 * step);
}

inline double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}

#endif
