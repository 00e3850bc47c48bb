#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcprobe/signal.hpp"

namespace qcprobe {

enum class GPKernelKind { SquaredExponential, Exponential };

struct GPKernelSpec {
    GPKernelKind kind = GPKernelKind::SquaredExponential;
    double length_scale = 0.2; // seconds
    double variance = 1.0;

    std::string name() const;

    // "se:0.2" or "exp:0.2[:variance]"
    static GPKernelSpec parse(const std::string& text);
};

// Zero-mean stationary GP on a uniform grid. The covariance is factorized
// once (Cholesky with diagonal jitter 1e-10, doubled up to 5 retries); each
// draw is L*z with z ~ N(0,1) from the given seed.
class GPSampler {
public:
    GPSampler(const GPKernelSpec& spec, int length, double fs);

    SignalRecord draw(std::uint64_t seed) const;
    int jitter_retries() const { return retries_; }
    double covariance(int i, int j) const; // kernel value on the grid

private:
    GPKernelSpec spec_;
    int length_;
    double fs_;
    int retries_ = 0;
    std::vector<double> chol_; // lower triangular, row-major length x length
};

SignalRecord sample_gp_trajectory(const GPKernelSpec& spec, int length, double fs,
                                  std::uint64_t seed);

} // namespace qcprobe
