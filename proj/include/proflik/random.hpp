#pragma once

// Deterministic random streams for simulation.  A stream is keyed by
// (seed, substream); replicate r of a simulation uses substream r, so
// results are identical however replicates are scheduled across workers
// and across platforms (pure 64-bit integer arithmetic, no library
// distribution objects).

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace proflik {

class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t substream = 0) {
        state_ = mix(mix(seed ^ 0x8c6e1d2f4b9a7e35ull) + substream);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform on the open interval (0, 1).
    double uniform() {
        return (double(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // Standard normal by the polar method (second deviate cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double v1, v2, s;
        do {
            v1 = 2.0 * uniform() - 1.0;
            v2 = 2.0 * uniform() - 1.0;
            s = v1 * v1 + v2 * v2;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v2 * m;
        have_spare_ = true;
        return v1 * m;
    }

    // Exponential with the given mean, by inverse CDF.
    double exponential(double mean) {
        if (!(mean > 0.0))
            throw std::domain_error("RngStream::exponential: requires mean > 0");
        return -mean * std::log(uniform());
    }

    // Gamma with the given shape and mean, by the Marsaglia-Tsang
    // accept-reject method (exact; shape < 1 lifted via the boost
    // identity G(a) = G(a+1) * U^(1/a)).
    double gamma(double shape, double mean) {
        if (!(shape > 0.0) || !(mean > 0.0))
            throw std::domain_error("RngStream::gamma: requires shape > 0 and mean > 0");
        double scale = mean / shape;
        double boost = 1.0;
        double a = shape;
        if (a < 1.0) {
            boost = std::pow(uniform(), 1.0 / a);
            a += 1.0;
        }
        double d = a - 1.0 / 3.0;
        double c = 1.0 / (3.0 * std::sqrt(d));
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return boost * d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return boost * d * v * scale;
        }
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30; z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27; z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace proflik
