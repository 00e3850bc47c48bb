#pragma once

#include <cstdint>
#include <vector>

#include "qcprobe/signal.hpp"

namespace qcprobe {

struct WaveParams {
    double center_frac;  // center offset within the cycle, fraction of RR
    double width;        // Gaussian sigma, seconds
    double amplitude;    // normalized units
    double morph_jitter; // per-record multiplicative jitter, fraction
};

// Schematic cardiac cycle: P and T are single Gaussian bumps, the QRS complex
// is a tall narrow R bump with symmetric negative Q and S flanks.
struct CycleParams {
    double rr_mean = 0.8;   // seconds, 60-100 bpm range
    double rr_jitter = 0.05;
    WaveParams p{0.20, 0.040, 0.15, 0.10};
    WaveParams qrs{0.35, 0.020, 1.00, 0.10};
    WaveParams t{0.62, 0.050, 0.30, 0.10};
};

struct SynthResult {
    SignalRecord record;
    std::vector<int> r_peaks; // ground-truth R sample indices
};

// Sum-of-Gaussians generator; deterministic for a fixed seed. RR intervals
// are rr_mean * (1 + U(-rr_jitter, +rr_jitter)).
SynthResult synth_ecg(const CycleParams& params, double duration, double fs,
                      std::uint64_t seed);

} // namespace qcprobe
