#include "qcprobe/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "qcprobe/error.hpp"

namespace qcprobe::kernels {

namespace {
inline int left_pad(int k) { return (k - 1) / 2; }
} // namespace

void conv1d_forward(std::span<const Tensor> in, std::span<Tensor> out,
                    const std::vector<double>& kernel, const std::vector<double>& bias,
                    int in_ch, int out_ch, int k) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    if (in[0].channels != in_ch)
        fail("conv1d: input has " + std::to_string(in[0].channels) +
             " channels, kernel expects " + std::to_string(in_ch));
    const int len = in[0].length;
    const int pad = left_pad(k);

#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < nb; ++b) {
        for (int oc = 0; oc < out_ch; ++oc) {
            double* o = out[b].row(oc);
            std::fill(o, o + len, bias[oc]);
            for (int ic = 0; ic < in_ch; ++ic) {
                const double* x = in[b].row(ic);
                const double* kr = kernel.data() + (static_cast<std::size_t>(oc) * in_ch + ic) * k;
                for (int j = 0; j < k; ++j) {
                    const double c = kr[j];
                    const int off = j - pad; // x index = t + off
                    const int t0 = std::max(0, -off);
                    const int t1 = std::min(len, len - off);
                    const double* xs = x + off;
                    for (int t = t0; t < t1; ++t) o[t] += c * xs[t];
                }
            }
        }
    }
}

void conv1d_backward_input(std::span<Tensor> in, std::span<const Tensor> out,
                           const std::vector<double>& kernel, int in_ch, int out_ch, int k) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int len = in[0].length;
    const int pad = left_pad(k);

#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < nb; ++b) {
        for (int ic = 0; ic < in_ch; ++ic) {
            double* gx = in[b].grad_row(ic);
            std::fill(gx, gx + len, 0.0);
            for (int oc = 0; oc < out_ch; ++oc) {
                const double* gy = out[b].grad_row(oc);
                const double* kr = kernel.data() + (static_cast<std::size_t>(oc) * in_ch + ic) * k;
                for (int j = 0; j < k; ++j) {
                    const double c = kr[j];
                    const int off = pad - j; // gy index = t + off
                    const int t0 = std::max(0, -off);
                    const int t1 = std::min(len, len - off);
                    const double* gs = gy + off;
                    for (int t = t0; t < t1; ++t) gx[t] += c * gs[t];
                }
            }
        }
    }
}

void conv1d_backward_params(std::span<const Tensor> in, std::span<const Tensor> out,
                            std::vector<double>& dkernel, std::vector<double>& dbias,
                            int in_ch, int out_ch, int k) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int len = in[0].length;
    const int pad = left_pad(k);

#pragma omp parallel for collapse(2) schedule(static)
    for (int oc = 0; oc < out_ch; ++oc) {
        for (int ic = 0; ic < in_ch; ++ic) {
            double* dk = dkernel.data() + (static_cast<std::size_t>(oc) * in_ch + ic) * k;
            for (int j = 0; j < k; ++j) {
                const int off = j - pad;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(len, len - off);
                double s = 0.0;
                for (int b = 0; b < nb; ++b) {
                    const double* gy = out[b].grad_row(oc);
                    const double* xs = in[b].row(ic) + off;
                    for (int t = t0; t < t1; ++t) s += gy[t] * xs[t];
                }
                dk[j] += s;
            }
        }
    }
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < out_ch; ++oc) {
        double s = 0.0;
        for (int b = 0; b < nb; ++b) {
            const double* gy = out[b].grad_row(oc);
            for (int t = 0; t < len; ++t) s += gy[t];
        }
        dbias[oc] += s;
    }
}

void relu_forward(std::span<const Tensor> in, std::span<Tensor> out) {
    const int nb = static_cast<int>(in.size());
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nb; ++b) {
        const std::size_t n = in[b].size();
        for (std::size_t i = 0; i < n; ++i)
            out[b].values[i] = in[b].values[i] > 0.0 ? in[b].values[i] : 0.0;
    }
}

void relu_backward(std::span<Tensor> in, std::span<const Tensor> out) {
    const int nb = static_cast<int>(in.size());
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nb; ++b) {
        const std::size_t n = in[b].size();
        for (std::size_t i = 0; i < n; ++i)
            in[b].grad[i] = in[b].values[i] > 0.0 ? out[b].grad[i] : 0.0;
    }
}

void maxpool2_forward(std::span<const Tensor> in, std::span<Tensor> out,
                      std::vector<std::uint8_t>& argmax) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    if (in[0].length % 2 != 0)
        fail("maxpool2: length " + std::to_string(in[0].length) + " is odd");
    const int ch = in[0].channels;
    const int half = in[0].length / 2;
    argmax.assign(static_cast<std::size_t>(nb) * ch * half, 0);

#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < nb; ++b) {
        for (int c = 0; c < ch; ++c) {
            const double* x = in[b].row(c);
            double* o = out[b].row(c);
            std::uint8_t* am = argmax.data() +
                               (static_cast<std::size_t>(b) * ch + c) * half;
            for (int t = 0; t < half; ++t) {
                double a = x[2 * t], bv = x[2 * t + 1];
                if (bv > a) {
                    o[t] = bv;
                    am[t] = 1;
                } else {
                    o[t] = a;
                    am[t] = 0;
                }
            }
        }
    }
}

void maxpool2_backward(std::span<Tensor> in, std::span<const Tensor> out,
                       const std::vector<std::uint8_t>& argmax) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int ch = in[0].channels;
    const int half = out[0].length;

#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < nb; ++b) {
        for (int c = 0; c < ch; ++c) {
            double* gx = in[b].grad_row(c);
            const double* gy = out[b].grad_row(c);
            const std::uint8_t* am = argmax.data() +
                                     (static_cast<std::size_t>(b) * ch + c) * half;
            for (int t = 0; t < half; ++t) {
                gx[2 * t] = am[t] == 0 ? gy[t] : 0.0;
                gx[2 * t + 1] = am[t] == 1 ? gy[t] : 0.0;
            }
        }
    }
}

void upsample2_forward(std::span<const Tensor> in, std::span<Tensor> out) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int ch = in[0].channels;
    const int len = in[0].length;
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < nb; ++b) {
        for (int c = 0; c < ch; ++c) {
            const double* x = in[b].row(c);
            double* o = out[b].row(c);
            for (int t = 0; t < len; ++t) {
                o[2 * t] = x[t];
                o[2 * t + 1] = x[t];
            }
        }
    }
}

void upsample2_backward(std::span<Tensor> in, std::span<const Tensor> out) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int ch = in[0].channels;
    const int len = in[0].length;
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < nb; ++b) {
        for (int c = 0; c < ch; ++c) {
            double* gx = in[b].grad_row(c);
            const double* gy = out[b].grad_row(c);
            for (int t = 0; t < len; ++t) gx[t] = gy[2 * t] + gy[2 * t + 1];
        }
    }
}

void dense_forward(std::span<const Tensor> in, std::span<Tensor> out,
                   const std::vector<double>& weight, const std::vector<double>& bias) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int in_dim = static_cast<int>(in[0].size());
    const int out_dim = static_cast<int>(out[0].size());
    if (static_cast<std::size_t>(in_dim) * out_dim != weight.size())
        fail("dense: weight shape mismatch");

#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < nb; ++b) {
        for (int o = 0; o < out_dim; ++o) {
            const double* w = weight.data() + static_cast<std::size_t>(o) * in_dim;
            const double* x = in[b].values.data();
            double s = bias[o];
            for (int i = 0; i < in_dim; ++i) s += w[i] * x[i];
            out[b].values[o] = s;
        }
    }
}

void dense_backward_input(std::span<Tensor> in, std::span<const Tensor> out,
                          const std::vector<double>& weight) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int in_dim = static_cast<int>(in[0].size());
    const int out_dim = static_cast<int>(out[0].size());

#pragma omp parallel for schedule(static)
    for (int b = 0; b < nb; ++b) {
        double* gx = in[b].grad.data();
        std::fill(gx, gx + in_dim, 0.0);
        const double* gy = out[b].grad.data();
        for (int o = 0; o < out_dim; ++o) {
            const double g = gy[o];
            const double* w = weight.data() + static_cast<std::size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) gx[i] += g * w[i];
        }
    }
}

void dense_backward_params(std::span<const Tensor> in, std::span<const Tensor> out,
                           std::vector<double>& dweight, std::vector<double>& dbias) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int in_dim = static_cast<int>(in[0].size());
    const int out_dim = static_cast<int>(out[0].size());

#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_dim; ++o) {
        double* dw = dweight.data() + static_cast<std::size_t>(o) * in_dim;
        double db = 0.0;
        for (int b = 0; b < nb; ++b) {
            const double g = out[b].grad[o];
            const double* x = in[b].values.data();
            for (int i = 0; i < in_dim; ++i) dw[i] += g * x[i];
            db += g;
        }
        dbias[o] += db;
    }
}

void batchnorm_forward(std::span<const Tensor> in, std::span<Tensor> out,
                       const std::vector<double>& gain, const std::vector<double>& shift,
                       std::vector<double>& running_mean, std::vector<double>& running_var,
                       double eps, double momentum, bool train, bool update_running,
                       BatchNormCache& cache) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int ch = in[0].channels;
    const int len = in[0].length;

    if (!train) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < nb; ++b) {
            for (int c = 0; c < ch; ++c) {
                const double inv = 1.0 / std::sqrt(running_var[c] + eps);
                const double g = gain[c], sh = shift[c], m = running_mean[c];
                const double* x = in[b].row(c);
                double* y = out[b].row(c);
                for (int t = 0; t < len; ++t) y[t] = g * (x[t] - m) * inv + sh;
            }
        }
        return;
    }

    if (nb < 2) fail("batchnorm: train mode needs batch size >= 2");
    cache.mean.assign(ch, 0.0);
    cache.inv_std.assign(ch, 0.0);
    cache.xhat.resize(nb);
    for (int b = 0; b < nb; ++b)
        if (!cache.xhat[b].same_shape(in[b])) cache.xhat[b].resize(ch, len);

    const double n = static_cast<double>(nb) * len;
#pragma omp parallel for schedule(static)
    for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int b = 0; b < nb; ++b) {
            const double* x = in[b].row(c);
            for (int t = 0; t < len; ++t) s += x[t];
        }
        const double mu = s / n;
        double v = 0.0;
        for (int b = 0; b < nb; ++b) {
            const double* x = in[b].row(c);
            for (int t = 0; t < len; ++t) v += (x[t] - mu) * (x[t] - mu);
        }
        v /= n;
        const double inv = 1.0 / std::sqrt(v + eps);
        cache.mean[c] = mu;
        cache.inv_std[c] = inv;
        const double g = gain[c], sh = shift[c];
        for (int b = 0; b < nb; ++b) {
            const double* x = in[b].row(c);
            double* xh = cache.xhat[b].row(c);
            double* y = out[b].row(c);
            for (int t = 0; t < len; ++t) {
                xh[t] = (x[t] - mu) * inv;
                y[t] = g * xh[t] + sh;
            }
        }
        if (update_running) {
            running_mean[c] = momentum * running_mean[c] + (1.0 - momentum) * mu;
            running_var[c] = momentum * running_var[c] + (1.0 - momentum) * v;
        }
    }
}

void batchnorm_backward(std::span<Tensor> in, std::span<const Tensor> out,
                        const std::vector<double>& gain, std::vector<double>& dgain,
                        std::vector<double>& dshift, const BatchNormCache& cache) {
    const int nb = static_cast<int>(in.size());
    if (nb == 0) return;
    const int ch = in[0].channels;
    const int len = in[0].length;
    const double n = static_cast<double>(nb) * len;

#pragma omp parallel for schedule(static)
    for (int c = 0; c < ch; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int b = 0; b < nb; ++b) {
            const double* gy = out[b].grad_row(c);
            const double* xh = cache.xhat[b].row(c);
            for (int t = 0; t < len; ++t) {
                sum_dy += gy[t];
                sum_dy_xhat += gy[t] * xh[t];
            }
        }
        dgain[c] += sum_dy_xhat;
        dshift[c] += sum_dy;
        const double scale = gain[c] * cache.inv_std[c];
        const double mean_dy = sum_dy / n;
        const double mean_dy_xhat = sum_dy_xhat / n;
        for (int b = 0; b < nb; ++b) {
            const double* gy = out[b].grad_row(c);
            const double* xh = cache.xhat[b].row(c);
            double* gx = in[b].grad_row(c);
            for (int t = 0; t < len; ++t)
                gx[t] = scale * (gy[t] - mean_dy - xh[t] * mean_dy_xhat);
        }
    }
}

} // namespace qcprobe::kernels
