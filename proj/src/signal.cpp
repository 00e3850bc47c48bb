#include "qcprobe/signal.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "qcprobe/error.hpp"

namespace qcprobe {

namespace fs = std::filesystem;

std::string source_name(SignalSource s) {
    switch (s) {
    case SignalSource::EcgFile: return "ecg-file";
    case SignalSource::Synthetic: return "synthetic";
    case SignalSource::GaussianProcess: return "gaussian-process";
    }
    return "unknown";
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::vector<double> standardize(const std::vector<double>& v) {
    double m = mean_of(v);
    double sd = std_of(v);
    if (!(sd > 1e-12))
        fail("standardize: zero variance signal cannot be standardized");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) / sd;
    return out;
}

std::vector<double> moving_median(const std::vector<double>& v, int w) {
    if (w < 1) fail("moving_median: window must be positive");
    const int n = static_cast<int>(v.size());
    std::vector<double> out(v.size());
    std::vector<double> buf;
    buf.reserve(w);
    const int half_lo = (w - 1) / 2;
    const int half_hi = w / 2;
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - half_lo);
        int hi = std::min(n - 1, i + half_hi);
        buf.assign(v.begin() + lo, v.begin() + hi + 1);
        int m = static_cast<int>(buf.size());
        int k = m / 2;
        std::nth_element(buf.begin(), buf.begin() + k, buf.end());
        double med = buf[k];
        if (m % 2 == 0) {
            double lo_med = *std::max_element(buf.begin(), buf.begin() + k);
            med = 0.5 * (med + lo_med);
        }
        out[i] = med;
    }
    return out;
}

std::vector<double> linear_resample(const std::vector<double>& v, int target_length) {
    const int n = static_cast<int>(v.size());
    if (n < 2) fail("linear_resample: need at least 2 samples");
    if (target_length < 2) fail("linear_resample: target length must be >= 2");
    if (n == target_length) return v;
    std::vector<double> out(target_length);
    const double scale = static_cast<double>(n - 1) / static_cast<double>(target_length - 1);
    for (int i = 0; i < target_length; ++i) {
        double p = i * scale;
        int j = std::min(static_cast<int>(p), n - 2);
        double frac = p - j;
        out[i] = v[j] * (1.0 - frac) + v[j + 1] * frac;
    }
    return out;
}

// ---- columnar files ----------------------------------------------------

namespace {

struct Header {
    int fs = 0;
    std::string lead, label, id;
};

Header parse_header(const std::string& line, const fs::path& path) {
    auto bad = [&](const std::string& why) {
        fail(path.string() + ": parse error: line 1: " + why);
    };
    if (line.rfind("# ", 0) != 0) bad("expected '# fs=... lead=... label=... id=...'");
    Header h;
    bool have_fs = false;
    std::size_t pos = 2;
    while (pos < line.size()) {
        std::size_t sp = line.find(' ', pos);
        if (sp == std::string::npos) sp = line.size();
        std::string tok = line.substr(pos, sp - pos);
        pos = sp + 1;
        if (tok.empty()) continue;
        std::size_t eq = tok.find('=');
        if (eq == std::string::npos) bad("token '" + tok + "' is not key=value");
        std::string key = tok.substr(0, eq);
        std::string val = tok.substr(eq + 1);
        if (key == "fs") {
            char* end = nullptr;
            long f = std::strtol(val.c_str(), &end, 10);
            if (end == val.c_str() || *end != '\0' || f <= 0) bad("fs must be a positive integer");
            h.fs = static_cast<int>(f);
            have_fs = true;
        } else if (key == "lead") {
            h.lead = val;
        } else if (key == "label") {
            h.label = val;
        } else if (key == "id") {
            h.id = val;
        } else {
            bad("unknown key '" + key + "'");
        }
    }
    if (!have_fs) bad("missing fs");
    if (h.id.empty()) bad("missing id");
    return h;
}

SignalRecord load_one(const fs::path& path, const std::string& lead) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) fail(path.string() + ": parse error: line 1: empty file");
    Header h = parse_header(line, path);
    if (!lead.empty() && h.lead != lead)
        fail(path.string() + ": missing lead '" + lead + "' (file has '" + h.lead + "')");

    SignalRecord rec;
    rec.fs = h.fs;
    rec.label = h.label;
    rec.id = h.id;
    rec.source = SignalSource::EcgFile;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        char* end = nullptr;
        errno = 0;
        double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str() || *end != '\0' || errno == ERANGE)
            fail(path.string() + ": parse error: line " + std::to_string(lineno) +
                 ": bad value '" + line + "'");
        rec.samples.push_back(v);
    }
    if (rec.samples.empty())
        fail(path.string() + ": parse error: line " + std::to_string(lineno + 1) +
             ": no data rows");
    return rec;
}

} // namespace

std::vector<SignalRecord> load_records(const fs::path& path, const std::string& lead) {
    std::vector<SignalRecord> out;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file() && e.path().extension() == ".sig")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) fail("no .sig files in " + path.string());
        int lead_misses = 0;
        for (const auto& f : files) {
            try {
                out.push_back(load_one(f, lead));
            } catch (const Error& e) {
                if (std::string(e.what()).find("missing lead") != std::string::npos) {
                    ++lead_misses;
                    continue;
                }
                throw;
            }
        }
        if (out.empty())
            fail(path.string() + ": missing lead '" + lead + "' in all " +
                 std::to_string(lead_misses) + " records");
        return out;
    }
    out.push_back(load_one(path, lead));
    return out;
}

void write_signal_file(const SignalRecord& rec, const std::string& lead, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write " + path.string());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d", static_cast<int>(rec.fs));
    out << "# fs=" << buf << " lead=" << lead << " label=" << rec.label
        << " id=" << rec.id << "\n";
    for (double v : rec.samples) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << "\n";
    }
    if (!out) fail("write failed: " + path.string());
}

void write_peaks_file(const std::vector<int>& peaks, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write " + path.string());
    for (int p : peaks) out << p << "\n";
}

std::vector<int> load_peaks_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path.string());
    std::vector<int> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(std::atoi(line.c_str()));
    }
    return out;
}

// ---- preprocessing -----------------------------------------------------

SignalRecord preprocess(const SignalRecord& rec, const PreprocessConfig& cfg) {
    const int n = static_cast<int>(rec.samples.size());
    if (rec.fs <= 0) fail("preprocess: record has no sampling rate");
    if (n < cfg.detrend_window)
        fail("preprocess: record shorter than detrend window");
    const int wlen = static_cast<int>(std::lround(cfg.window_seconds * rec.fs));
    if (wlen < 2 || n < wlen)
        fail("preprocess: insufficient length, record " + std::to_string(n) +
             " samples < window " + std::to_string(wlen));

    std::vector<double> base = moving_median(rec.samples, cfg.detrend_window);
    std::vector<double> detr(n);
    for (int i = 0; i < n; ++i) detr[i] = rec.samples[i] - base[i];

    const int start = (n - wlen) / 2; // mid-record window
    std::vector<double> cut(detr.begin() + start, detr.begin() + start + wlen);
    std::vector<double> res = linear_resample(cut, cfg.target_length);

    SignalRecord out;
    out.samples = standardize(res);
    out.fs = static_cast<double>(cfg.target_length) / cfg.window_seconds;
    out.source = rec.source;
    out.label = rec.label;
    out.id = rec.id;
    return out;
}

SignalRecord detrend_standardize(const SignalRecord& rec, int detrend_window) {
    const int n = static_cast<int>(rec.samples.size());
    if (n < detrend_window) fail("detrend_standardize: record shorter than detrend window");
    std::vector<double> base = moving_median(rec.samples, detrend_window);
    std::vector<double> detr(n);
    for (int i = 0; i < n; ++i) detr[i] = rec.samples[i] - base[i];
    SignalRecord out = rec;
    out.samples = standardize(detr);
    return out;
}

std::vector<int> detect_r_peaks(const SignalRecord& rec, bool check_standardized) {
    const int n = static_cast<int>(rec.samples.size());
    if (n < 3) return {};
    if (check_standardized) {
        double m = mean_of(rec.samples);
        double sd = std_of(rec.samples);
        if (std::fabs(m) > 1e-6 || std::fabs(sd - 1.0) > 1e-3)
            fail("detect_r_peaks: record is not standardized (mean " + std::to_string(m) +
                 ", std " + std::to_string(sd) + ")");
    }
    const double fs = rec.fs;
    const int w = std::max(1, static_cast<int>(std::lround(0.6 * fs)));
    std::vector<double> base = moving_median(rec.samples, w);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = rec.samples[i] - base[i];

    // threshold = 0.5 * 99th percentile (nearest rank)
    std::vector<double> sorted(d);
    std::sort(sorted.begin(), sorted.end());
    int rank = std::max(0, static_cast<int>(std::ceil(0.99 * n)) - 1);
    double thr = 0.5 * sorted[rank];

    std::vector<int> cand;
    for (int i = 1; i + 1 < n; ++i)
        if (d[i] >= thr && d[i] > d[i - 1] && d[i] >= d[i + 1]) cand.push_back(i);

    const int refractory = static_cast<int>(std::lround(0.33 * fs));
    auto greedy = [&](std::vector<int> idx, const std::vector<double>& score) {
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            if (score[a] != score[b]) return score[a] > score[b];
            return a < b;
        });
        std::vector<int> kept;
        for (int i : idx) {
            bool ok = true;
            for (int k : kept)
                if (std::abs(k - i) < refractory) { ok = false; break; }
            if (ok) kept.push_back(i);
        }
        std::sort(kept.begin(), kept.end());
        return kept;
    };

    std::vector<int> accepted = greedy(cand, d);

    // local-max refinement on the raw standardized signal
    const int r2 = std::max(1, static_cast<int>(std::lround(0.05 * fs)));
    std::vector<int> refined;
    for (int i : accepted) {
        int lo = std::max(0, i - r2), hi = std::min(n - 1, i + r2);
        int best = lo;
        for (int j = lo + 1; j <= hi; ++j)
            if (rec.samples[j] > rec.samples[best]) best = j;
        refined.push_back(best);
    }
    std::sort(refined.begin(), refined.end());
    refined.erase(std::unique(refined.begin(), refined.end()), refined.end());
    return greedy(refined, rec.samples);
}

CropResult crop_cycles(const SignalRecord& rec, const std::vector<int>& peaks,
                       int target_length) {
    if (rec.fs <= 0) fail("crop_cycles: record has no sampling rate");
    const int n = static_cast<int>(rec.samples.size());
    const int wlen = static_cast<int>(std::lround(1.0 * rec.fs));
    const int half = wlen / 2;
    CropResult res;
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        int start = peaks[k] - half;
        if (start < 0 || start + wlen > n) {
            ++res.skipped;
            continue;
        }
        std::vector<double> window(rec.samples.begin() + start,
                                   rec.samples.begin() + start + wlen);
        SignalRecord crop;
        crop.samples = standardize(linear_resample(window, target_length));
        crop.fs = static_cast<double>(target_length); // 1-second window
        crop.source = rec.source;
        crop.label = rec.label;
        crop.id = rec.id + "_c" + std::to_string(k);
        res.crops.push_back(std::move(crop));
    }
    return res;
}

SignalRecord normalize_to_reference(const SignalRecord& rec, double ref_mean, double ref_std) {
    double m = mean_of(rec.samples);
    double sd = std_of(rec.samples);
    if (!(sd > 1e-12)) fail("normalize_to_reference: zero input variance");
    SignalRecord out = rec;
    for (double& x : out.samples) x = (x - m) / sd * ref_std + ref_mean;
    return out;
}

} // namespace qcprobe
