#pragma once

#include <vector>

#include "qcprobe/tensor.hpp"

// Serial reference kernels: naive loop nests kept deliberately simple and
// independent of the parallel implementations in qcprobe::kernels. The tests
// use them as oracles and tools/bench_kernels compares throughput.

namespace qcprobe::ref {

void conv1d_forward(const Tensor& in, Tensor& out, const std::vector<double>& kernel,
                    const std::vector<double>& bias, int in_ch, int out_ch, int k);

void conv1d_backward(const Tensor& in, Tensor& in_grad_out, const Tensor& out,
                     const std::vector<double>& kernel, std::vector<double>& dkernel,
                     std::vector<double>& dbias, int in_ch, int out_ch, int k);

void dense_forward(const Tensor& in, Tensor& out, const std::vector<double>& weight,
                   const std::vector<double>& bias);

void maxpool2_forward(const Tensor& in, Tensor& out);

} // namespace qcprobe::ref
