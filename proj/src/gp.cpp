#include "qcprobe/gp.hpp"

#include <cmath>
#include <cstdio>

#include "qcprobe/error.hpp"
#include "qcprobe/rng.hpp"

namespace qcprobe {

std::string GPKernelSpec::name() const {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s-%g",
                  kind == GPKernelKind::SquaredExponential ? "se" : "exp",
                  length_scale);
    return buf;
}

GPKernelSpec GPKernelSpec::parse(const std::string& text) {
    GPKernelSpec spec;
    std::size_t c1 = text.find(':');
    if (c1 == std::string::npos) fail("bad kernel spec '" + text + "', want kind:length_scale");
    std::string kind = text.substr(0, c1);
    if (kind == "se")
        spec.kind = GPKernelKind::SquaredExponential;
    else if (kind == "exp")
        spec.kind = GPKernelKind::Exponential;
    else
        fail("unknown kernel kind '" + kind + "'");
    std::string rest = text.substr(c1 + 1);
    std::size_t c2 = rest.find(':');
    spec.length_scale = std::atof(rest.substr(0, c2).c_str());
    if (c2 != std::string::npos) spec.variance = std::atof(rest.substr(c2 + 1).c_str());
    if (!(spec.length_scale > 0.0)) fail("kernel length_scale must be > 0");
    if (!(spec.variance > 0.0)) fail("kernel variance must be > 0");
    return spec;
}

namespace {

// In-place lower Cholesky; returns false on a non-positive pivot.
bool cholesky(std::vector<double>& a, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<std::size_t>(i) * n + j];
            const double* ri = a.data() + static_cast<std::size_t>(i) * n;
            const double* rj = a.data() + static_cast<std::size_t>(j) * n;
            for (int k = 0; k < j; ++k) s -= ri[k] * rj[k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                a[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
            } else {
                a[static_cast<std::size_t>(i) * n + j] =
                    s / a[static_cast<std::size_t>(j) * n + j];
            }
        }
        for (int j = i + 1; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = 0.0;
    }
    return true;
}

} // namespace

double GPSampler::covariance(int i, int j) const {
    double d = std::fabs(i - j) / fs_;
    if (spec_.kind == GPKernelKind::SquaredExponential)
        return spec_.variance * std::exp(-d * d / (2.0 * spec_.length_scale * spec_.length_scale));
    return spec_.variance * std::exp(-d / spec_.length_scale);
}

GPSampler::GPSampler(const GPKernelSpec& spec, int length, double fs)
    : spec_(spec), length_(length), fs_(fs) {
    if (length < 2) fail("GPSampler: length must be >= 2");
    if (!(fs > 0.0)) fail("GPSampler: fs must be positive");
    const int n = length;
    std::vector<double> base(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            base[static_cast<std::size_t>(i) * n + j] = covariance(i, j);

    double jitter = 1e-10;
    for (retries_ = 0; retries_ <= 5; ++retries_) {
        chol_ = base;
        for (int i = 0; i < n; ++i) chol_[static_cast<std::size_t>(i) * n + i] += jitter;
        if (cholesky(chol_, n)) return;
        jitter *= 2.0;
    }
    fail("GPSampler: covariance factorization failed after 5 jitter retries (kernel " +
         spec_.name() + ")");
}

SignalRecord GPSampler::draw(std::uint64_t seed) const {
    const int n = length_;
    Rng rng(seed);
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    SignalRecord rec;
    rec.samples.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = chol_.data() + static_cast<std::size_t>(i) * n;
        double s = 0.0;
        for (int k = 0; k <= i; ++k) s += row[k] * z[k];
        rec.samples[i] = s;
    }
    rec.fs = fs_;
    rec.source = SignalSource::GaussianProcess;
    rec.label = spec_.name();
    return rec;
}

SignalRecord sample_gp_trajectory(const GPKernelSpec& spec, int length, double fs,
                                  std::uint64_t seed) {
    return GPSampler(spec, length, fs).draw(seed);
}

} // namespace qcprobe
