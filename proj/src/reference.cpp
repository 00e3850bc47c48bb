#include "qcprobe/reference.hpp"

#include <algorithm>

namespace qcprobe::ref {

void conv1d_forward(const Tensor& in, Tensor& out, const std::vector<double>& kernel,
                    const std::vector<double>& bias, int in_ch, int out_ch, int k) {
    const int len = in.length;
    const int pad = (k - 1) / 2;
    for (int oc = 0; oc < out_ch; ++oc) {
        for (int t = 0; t < len; ++t) {
            double acc = bias[oc];
            for (int ic = 0; ic < in_ch; ++ic) {
                for (int j = 0; j < k; ++j) {
                    int p = t + j - pad;
                    if (p < 0 || p >= len) continue;
                    acc += kernel[(static_cast<std::size_t>(oc) * in_ch + ic) * k + j] *
                           in.at(ic, p);
                }
            }
            out.at(oc, t) = acc;
        }
    }
}

void conv1d_backward(const Tensor& in, Tensor& in_grad_out, const Tensor& out,
                     const std::vector<double>& kernel, std::vector<double>& dkernel,
                     std::vector<double>& dbias, int in_ch, int out_ch, int k) {
    const int len = in.length;
    const int pad = (k - 1) / 2;
    std::fill(in_grad_out.grad.begin(), in_grad_out.grad.end(), 0.0);
    for (int oc = 0; oc < out_ch; ++oc) {
        for (int t = 0; t < len; ++t) {
            const double g = out.grad_at(oc, t);
            dbias[oc] += g;
            for (int ic = 0; ic < in_ch; ++ic) {
                for (int j = 0; j < k; ++j) {
                    int p = t + j - pad;
                    if (p < 0 || p >= len) continue;
                    dkernel[(static_cast<std::size_t>(oc) * in_ch + ic) * k + j] +=
                        g * in.at(ic, p);
                    in_grad_out.grad_at(ic, p) +=
                        g * kernel[(static_cast<std::size_t>(oc) * in_ch + ic) * k + j];
                }
            }
        }
    }
}

void dense_forward(const Tensor& in, Tensor& out, const std::vector<double>& weight,
                   const std::vector<double>& bias) {
    const int in_dim = static_cast<int>(in.size());
    const int out_dim = static_cast<int>(out.size());
    for (int o = 0; o < out_dim; ++o) {
        double acc = bias[o];
        for (int i = 0; i < in_dim; ++i)
            acc += weight[static_cast<std::size_t>(o) * in_dim + i] * in.values[i];
        out.values[o] = acc;
    }
}

void maxpool2_forward(const Tensor& in, Tensor& out) {
    for (int c = 0; c < in.channels; ++c)
        for (int t = 0; t < in.length / 2; ++t)
            out.at(c, t) = std::max(in.at(c, 2 * t), in.at(c, 2 * t + 1));
}

} // namespace qcprobe::ref
