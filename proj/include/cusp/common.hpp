#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cusp {

using cxd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Error hierarchy shared by all modules. Numeric failures map to CLI exit
// code 3, validation/domain failures to exit code 2.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DivergenceError : NumericError {
    double residual;
    DivergenceError(const std::string& msg, double res)
        : NumericError(msg), residual(res) {}
};

struct BracketError : NumericError {
    using NumericError::NumericError;
};

struct AccuracyError : NumericError {
    using NumericError::NumericError;
};

struct InsufficientStatisticsError : NumericError {
    using NumericError::NumericError;
};

// splitmix64; used both as a generator and to derive per-trial seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t base_seed, long trial) {
    std::uint64_t s = base_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial + 1);
    return splitmix64(s);
}

// Deterministic scalar RNG. Normal deviates via polar Box-Muller so the
// stream does not depend on library internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in (0,1)
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cusp
