#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qcprobe/tensor.hpp"

// OpenMP-parallel forward/backward kernels. Every parallel loop assigns each
// output element to exactly one thread, which accumulates serially in a fixed
// order, so results are bit-identical for any thread count. A serial naive
// implementation of the heavy kernels lives in qcprobe::ref (reference.hpp)
// and is used by the tests and the kernel benchmark.

namespace qcprobe::kernels {

// Same-padding, stride 1. Kernel layout [oc][ic][j] row-major; left pad is
// floor((k-1)/2), so even kernels pad one more on the right.
void conv1d_forward(std::span<const Tensor> in, std::span<Tensor> out,
                    const std::vector<double>& kernel, const std::vector<double>& bias,
                    int in_ch, int out_ch, int k);

// Writes in[i].grad from out[i].grad (overwrites).
void conv1d_backward_input(std::span<Tensor> in, std::span<const Tensor> out,
                           const std::vector<double>& kernel, int in_ch, int out_ch, int k);

// Accumulates (+=) into dkernel/dbias.
void conv1d_backward_params(std::span<const Tensor> in, std::span<const Tensor> out,
                            std::vector<double>& dkernel, std::vector<double>& dbias,
                            int in_ch, int out_ch, int k);

void relu_forward(std::span<const Tensor> in, std::span<Tensor> out);
void relu_backward(std::span<Tensor> in, std::span<const Tensor> out);

// argmax flags: one byte per output element per batch record, 0 = first of
// the pair won (ties go to the first element).
void maxpool2_forward(std::span<const Tensor> in, std::span<Tensor> out,
                      std::vector<std::uint8_t>& argmax);
void maxpool2_backward(std::span<Tensor> in, std::span<const Tensor> out,
                       const std::vector<std::uint8_t>& argmax);

void upsample2_forward(std::span<const Tensor> in, std::span<Tensor> out);
void upsample2_backward(std::span<Tensor> in, std::span<const Tensor> out);

// weight layout [out][in] row-major over flattened (channel-major) inputs.
void dense_forward(std::span<const Tensor> in, std::span<Tensor> out,
                   const std::vector<double>& weight, const std::vector<double>& bias);
void dense_backward_input(std::span<Tensor> in, std::span<const Tensor> out,
                          const std::vector<double>& weight);
void dense_backward_params(std::span<const Tensor> in, std::span<const Tensor> out,
                           std::vector<double>& dweight, std::vector<double>& dbias);

struct BatchNormCache {
    std::vector<double> mean, inv_std; // per channel
    std::vector<Tensor> xhat;          // cached normalized activations
};

// Train mode normalizes each channel over (batch x length) with the given
// epsilon; eval mode uses running stats. Running stats are updated only when
// update_running is set: running = momentum*running + (1-momentum)*batch.
void batchnorm_forward(std::span<const Tensor> in, std::span<Tensor> out,
                       const std::vector<double>& gain, const std::vector<double>& shift,
                       std::vector<double>& running_mean, std::vector<double>& running_var,
                       double eps, double momentum, bool train, bool update_running,
                       BatchNormCache& cache);

// Train-mode backward (through the batch statistics).
void batchnorm_backward(std::span<Tensor> in, std::span<const Tensor> out,
                        const std::vector<double>& gain, std::vector<double>& dgain,
                        std::vector<double>& dshift, const BatchNormCache& cache);

} // namespace qcprobe::kernels
