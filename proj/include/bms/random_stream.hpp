#pragma once

#include <cstdint>
#include <random>

namespace bms {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Independent, reproducible stream for one simulated policyholder. The
// engine is std::mt19937_64; the variate generators are implemented here so
// results do not depend on the standard library's distribution classes.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream);

    double uniform();               // open interval (0, 1)
    double normal();                // Marsaglia polar method
    double gamma(double shape);     // unit scale; Marsaglia-Tsang
    int poisson(double mean);       // inversion below 10, PTRS rejection above

    // Index drawn with probability proportional to `cumulative` increments;
    // `cumulative` must end at 1.
    template <class Range>
    std::size_t categorical(const Range& cumulative) {
        const double u = uniform();
        std::size_t i = 0;
        for (double c : cumulative) {
            if (u <= c) return i;
            ++i;
        }
        return i - 1;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

} // namespace bms
