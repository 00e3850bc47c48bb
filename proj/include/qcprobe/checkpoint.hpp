#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "qcprobe/network.hpp"
#include "qcprobe/train.hpp"

namespace qcprobe {

// Checkpoint file: magic "QCAE", u16 LE format version, u32 LE metadata
// length, UTF-8 JSON metadata (spec, train config, epoch, parameter layout,
// payload checksum, RNG state), then the payload: little-endian f64 arrays in
// canonical ParamStore order (value, then Adam m and v for trainable params).

struct Checkpoint {
    std::unique_ptr<Autoencoder> model;
    TrainConfig cfg;
    int epoch = 0;
};

void save_checkpoint(const Autoencoder& model, const TrainConfig& cfg, int epoch,
                     const std::filesystem::path& path);

Checkpoint load_checkpoint(const std::filesystem::path& path);

// Metadata document only (no payload validation); exposes header fields such
// as input_length and latent_dim.
std::string read_checkpoint_meta(const std::filesystem::path& path);

} // namespace qcprobe
