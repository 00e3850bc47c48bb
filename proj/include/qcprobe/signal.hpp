#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qcprobe {

enum class SignalSource { EcgFile, Synthetic, GaussianProcess };

std::string source_name(SignalSource s);

// One fixed-rate 1D signal with provenance metadata.
struct SignalRecord {
    std::vector<double> samples;
    double fs = 0.0; // Hz
    SignalSource source = SignalSource::EcgFile;
    std::string label; // "healthy", "pathology", kernel name, ...
    std::string id;
};

struct PreprocessConfig {
    int target_length = 512;   // samples after resampling
    int detrend_window = 300;  // moving-median width, samples at native rate
    double window_seconds = 4.0;
};

// ---- basic stats ------------------------------------------------------

double mean_of(const std::vector<double>& v);
double std_of(const std::vector<double>& v); // population (1/N)

// Subtracts mean, divides by population std. Throws on (near-)zero variance.
std::vector<double> standardize(const std::vector<double>& v);

// Centered moving median of width w; windows are truncated at the edges.
std::vector<double> moving_median(const std::vector<double>& v, int w);

// Linear interpolation onto target_length points; endpoints map to endpoints.
std::vector<double> linear_resample(const std::vector<double>& v, int target_length);

// ---- columnar signal files --------------------------------------------
//
// UTF-8 text, one record per file:
//   line 1:  # fs=<int> lead=<name> label=<string> id=<string>
//   then one decimal sample value per line.
// Synthetic records may carry a sidecar "<id>.peaks" with one ground-truth
// R index per line.

// Loads a single .sig file or every *.sig in a directory, keeping records
// whose lead matches (empty lead = accept all). Throws a parse error naming
// the offending line, or a missing-lead error when nothing matches.
std::vector<SignalRecord> load_records(const std::filesystem::path& path,
                                       const std::string& lead = "V6");

// Canonical emitter; load_records followed by write_signal_file is
// byte-identical for files produced here.
void write_signal_file(const SignalRecord& rec, const std::string& lead,
                       const std::filesystem::path& path);

void write_peaks_file(const std::vector<int>& peaks, const std::filesystem::path& path);
std::vector<int> load_peaks_file(const std::filesystem::path& path);

// ---- preprocessing -----------------------------------------------------

// Moving-median baseline removal, mid-record window cut of window_seconds,
// linear resample to target_length, standardize. Output fs is the effective
// rate target_length / window_seconds.
SignalRecord preprocess(const SignalRecord& rec, const PreprocessConfig& cfg);

// Baseline removal + standardization of the whole record at native rate;
// the input side of R-peak detection and cycle cropping.
SignalRecord detrend_standardize(const SignalRecord& rec, int detrend_window);

// Moving-median detrend, threshold at 0.5 * 99th percentile, refractory
// spacing 0.33 s, local-max refinement. Expects a standardized record
// (check_standardized=false is a test hook). Returns ascending indices.
std::vector<int> detect_r_peaks(const SignalRecord& rec, bool check_standardized = true);

struct CropResult {
    std::vector<SignalRecord> crops;
    int skipped = 0; // peaks too close to the record edges
};

// One window of round(1.0 s * fs) samples centered on each peak; windows that
// do not fit inside the record are skipped. Each crop is resampled to
// target_length and re-standardized.
CropResult crop_cycles(const SignalRecord& rec, const std::vector<int>& peaks,
                       int target_length);

// Affine transform to exact target mean/std. Throws on zero input variance.
SignalRecord normalize_to_reference(const SignalRecord& rec, double ref_mean, double ref_std);

} // namespace qcprobe
