#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "qcprobe/layers.hpp"
#include "qcprobe/signal.hpp"
#include "qcprobe/tensor.hpp"

namespace qcprobe {

struct LayerSpec {
    enum class Kind { Conv, Relu, BatchNorm, MaxPool, Upsample, Dense };
    Kind kind = Kind::Conv;
    int kernel_size = 0;  // conv
    int out_channels = 0; // conv
    int window = 2;       // maxpool (always 2 in the shipped configs)
    int factor = 2;       // upsample
    int out_units = 0;    // dense
};

// Declarative encoder; the decoder is derived by mirroring.
struct NetworkSpec {
    int input_length = 512;
    std::vector<LayerSpec> encoder_layers;
    int latent_dim = 30;
};

// Encoder of the base architecture: four conv/relu/batchnorm/pool blocks
// (kernels 100, 100, 30, 20; channels 30, 15, 15, 5) and a dense layer to a
// 30-dimensional code. Total pooling x16.
NetworkSpec paper_spec();
// Same stack with only the first two pools kept (total pooling x4).
NetworkSpec good_spec();
// Alias of paper_spec(): the high-compression preset.
NetworkSpec bad_spec();
// Compact stack for single-cycle interpolation probes (cheap to train many
// times; hyperparameter_sensitivity covers the larger variants).
NetworkSpec crop_probe_spec();

NetworkSpec load_network_spec(const std::filesystem::path& path);
void save_network_spec(const NetworkSpec& spec, const std::filesystem::path& path);
std::string network_spec_to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const std::string& text);

// Ordered view over every parameter array: (layer index, name alphabetical).
struct ParamStore {
    struct Item {
        int layer_index;
        std::string name; // "<layer>.<param>"
        ParamArray* array;
    };
    std::vector<Item> items;

    std::size_t total_values() const;
    std::size_t trainable_values() const;
};

class Autoencoder {
public:
    Autoencoder(const NetworkSpec& spec, std::uint64_t seed);

    const NetworkSpec& spec() const { return spec_; }
    int input_length() const { return spec_.input_length; }
    int latent_dim() const { return spec_.latent_dim; }

    // Shape after each encoder layer (element 0 = input shape); the Table-1
    // chain check reads this.
    const std::vector<Shape>& encoder_shapes() const { return encoder_shapes_; }
    const std::vector<Shape>& decoder_shapes() const { return decoder_shapes_; }

    std::vector<double> encode(const SignalRecord& rec);
    SignalRecord decode(const std::vector<double>& z);

    // Training plumbing: full forward through encoder+decoder. Activations
    // are kept for backward(); single network instance is single-threaded.
    // The returned batch is mutable so the loss can write into .grad.
    Batch& forward(const Batch& input, Mode mode, bool update_running);
    // Seeds the chain from reconstruction.grad and propagates to the input.
    void backward();

    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }
    Rng& rng() { return rng_; }

    std::int64_t opt_step() const { return opt_step_; }
    void set_opt_step(std::int64_t t) { opt_step_ = t; }

    std::string rng_state() const { return rng_.serialize(); }
    void set_rng_state(const std::string& s) { rng_.deserialize(s); }

    double sample_rate = 128.0; // fs stamped on decoded records

private:
    NetworkSpec spec_;
    std::vector<std::unique_ptr<Layer>> layers_; // encoder then decoder
    std::size_t n_encoder_layers_ = 0;
    std::vector<Shape> encoder_shapes_, decoder_shapes_;
    std::vector<Batch> acts_; // acts_[i] = output of layers_[i-1]
    ParamStore store_;
    Rng rng_;
    std::int64_t opt_step_ = 0;
};

// Validates a spec (pool divisibility, dense/latent match) and reports the
// encoder shape chain without building parameters.
std::vector<Shape> infer_encoder_shapes(const NetworkSpec& spec);

} // namespace qcprobe
