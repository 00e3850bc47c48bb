#include "qcprobe/synth.hpp"

#include <cmath>

#include "qcprobe/error.hpp"
#include "qcprobe/rng.hpp"

namespace qcprobe {

namespace {

// Q and S flank offsets/scales relative to the R bump.
constexpr double kFlankOffsetSigmas = 2.2;
constexpr double kFlankAmpFrac = -0.20;
constexpr double kFlankWidthFrac = 0.55;

void add_gaussian(std::vector<double>& y, double fs, double center, double sigma,
                  double amp) {
    const int n = static_cast<int>(y.size());
    int lo = std::max(0, static_cast<int>(std::floor((center - 5.0 * sigma) * fs)));
    int hi = std::min(n - 1, static_cast<int>(std::ceil((center + 5.0 * sigma) * fs)));
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int i = lo; i <= hi; ++i) {
        double d = i / fs - center;
        y[i] += amp * std::exp(-d * d * inv2s2);
    }
}

void validate(const CycleParams& p) {
    if (!(p.rr_mean >= 0.6 && p.rr_mean <= 1.0))
        fail("synth_ecg: rr_mean must be in [0.6, 1.0] s");
    if (!(p.rr_jitter >= 0.0 && p.rr_jitter < 1.0))
        fail("synth_ecg: rr_jitter must be in [0, 1)");
    const double rr_min = p.rr_mean * (1.0 - p.rr_jitter);
    auto check_wave = [&](const WaveParams& w, double extent_sigmas, const char* name) {
        if (!(w.width > 0.0)) fail(std::string("synth_ecg: ") + name + " width must be > 0");
        if (!(w.morph_jitter >= 0.0 && w.morph_jitter < 1.0))
            fail(std::string("synth_ecg: ") + name + " morph_jitter must be in [0, 1)");
        double extent = extent_sigmas * w.width * (1.0 + w.morph_jitter);
        if (w.center_frac * rr_min - extent < 0.0 ||
            w.center_frac * rr_min + extent > rr_min)
            fail(std::string("synth_ecg: ") + name + " wave window overflows the RR interval");
    };
    check_wave(p.p, 3.0, "P");
    check_wave(p.qrs, 4.0, "QRS"); // flanks extend past the R bump
    check_wave(p.t, 3.0, "T");
}

} // namespace

SynthResult synth_ecg(const CycleParams& params, double duration, double fs,
                      std::uint64_t seed) {
    validate(params);
    if (!(duration >= params.rr_mean)) fail("synth_ecg: duration shorter than one cycle");
    if (!(fs > 0.0)) fail("synth_ecg: fs must be positive");

    Rng rng(seed);
    // Per-record morphology: one amplitude and one width factor per wave,
    // drawn in a pinned order.
    struct Morph { double amp, width; };
    auto draw = [&](const WaveParams& w) {
        Morph m;
        m.amp = w.amplitude * (1.0 + rng.uniform(-w.morph_jitter, w.morph_jitter));
        m.width = w.width * (1.0 + rng.uniform(-w.morph_jitter, w.morph_jitter));
        return m;
    };
    Morph mp = draw(params.p);
    Morph mq = draw(params.qrs);
    Morph mt = draw(params.t);

    const int n = static_cast<int>(std::lround(duration * fs));
    std::vector<double> y(n, 0.0);
    std::vector<double> r_centers;

    double start = 0.0;
    while (start < duration) {
        double rr = params.rr_mean *
                    (1.0 + rng.uniform(-params.rr_jitter, params.rr_jitter));
        double pc = start + params.p.center_frac * rr;
        double rc = start + params.qrs.center_frac * rr;
        double tc = start + params.t.center_frac * rr;

        add_gaussian(y, fs, pc, mp.width, mp.amp);
        add_gaussian(y, fs, rc, mq.width, mq.amp);
        add_gaussian(y, fs, rc - kFlankOffsetSigmas * mq.width,
                     mq.width * kFlankWidthFrac, mq.amp * kFlankAmpFrac);
        add_gaussian(y, fs, rc + kFlankOffsetSigmas * mq.width,
                     mq.width * kFlankWidthFrac, mq.amp * kFlankAmpFrac);
        add_gaussian(y, fs, tc, mt.width, mt.amp);
        r_centers.push_back(rc);
        start += rr;
    }

    // Ground-truth peak = sample argmax near each R center.
    std::vector<int> peaks;
    for (double rc : r_centers) {
        int lo = std::max(0, static_cast<int>(std::floor((rc - 3.0 * mq.width) * fs)));
        int hi = std::min(n - 1, static_cast<int>(std::ceil((rc + 3.0 * mq.width) * fs)));
        if (lo > hi) continue;
        int idx = static_cast<int>(std::lround(rc * fs));
        if (idx < 0 || idx >= n) continue;
        int best = lo;
        for (int i = lo + 1; i <= hi; ++i)
            if (y[i] > y[best]) best = i;
        peaks.push_back(best);
    }

    SynthResult res;
    res.record.samples = std::move(y);
    res.record.fs = fs;
    res.record.source = SignalSource::Synthetic;
    res.record.label = "synthetic";
    res.r_peaks = std::move(peaks);
    return res;
}

} // namespace qcprobe
