#include "qcprobe/layers.hpp"

#include <cmath>

#include "qcprobe/error.hpp"

namespace qcprobe {

namespace {

void ensure_batch(Batch& out, int nb, Shape s) {
    out.resize(nb);
    for (auto& t : out)
        if (t.channels != s.channels || t.length != s.length) t.resize(s.channels, s.length);
}

void init_uniform(Rng& rng, std::vector<double>& w, int fan_in, int fan_out) {
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& x : w) x = rng.uniform(-bound, bound);
}

} // namespace

// ---- Conv1dSame ----------------------------------------------------------

Conv1dSame::Conv1dSame(int in_ch, int out_ch, int k)
    : in_ch_(in_ch), out_ch_(out_ch), k_(k),
      bias_("bias", out_ch, 0.0, true),
      kernel_("kernel", static_cast<std::size_t>(out_ch) * in_ch * k, 0.0, true) {
    if (k < 1) fail("conv: kernel size must be >= 1");
}

Shape Conv1dSame::out_shape(Shape in) const {
    if (in.channels != in_ch_)
        fail("conv: expected " + std::to_string(in_ch_) + " input channels, got " +
             std::to_string(in.channels));
    return {out_ch_, in.length};
}

void Conv1dSame::forward(const Batch& in, Batch& out, Mode, bool) {
    ensure_batch(out, static_cast<int>(in.size()), out_shape({in[0].channels, in[0].length}));
    kernels::conv1d_forward(in, out, kernel_.value, bias_.value, in_ch_, out_ch_, k_);
}

void Conv1dSame::backward(Batch& in, const Batch& out) {
    kernels::conv1d_backward_params(in, out, kernel_.grad, bias_.grad, in_ch_, out_ch_, k_);
    kernels::conv1d_backward_input(in, out, kernel_.value, in_ch_, out_ch_, k_);
}

void Conv1dSame::init_params(Rng& rng) {
    init_uniform(rng, kernel_.value, in_ch_ * k_, out_ch_ * k_);
}

// ---- Relu ----------------------------------------------------------------

void Relu::forward(const Batch& in, Batch& out, Mode, bool) {
    ensure_batch(out, static_cast<int>(in.size()), {in[0].channels, in[0].length});
    kernels::relu_forward(in, out);
}

void Relu::backward(Batch& in, const Batch& out) { kernels::relu_backward(in, out); }

// ---- BatchNormChannels -----------------------------------------------------

BatchNormChannels::BatchNormChannels(int channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum),
      gain_("gain", channels, 1.0, true),
      shift_("shift", channels, 0.0, true),
      running_mean_("running_mean", channels, 0.0, false),
      running_var_("running_var", channels, 1.0, false) {}

Shape BatchNormChannels::out_shape(Shape in) const {
    if (in.channels != channels_)
        fail("batchnorm: expected " + std::to_string(channels_) + " channels, got " +
             std::to_string(in.channels));
    return in;
}

void BatchNormChannels::forward(const Batch& in, Batch& out, Mode mode, bool update_running) {
    ensure_batch(out, static_cast<int>(in.size()), {in[0].channels, in[0].length});
    last_was_train_ = mode == Mode::Train;
    kernels::batchnorm_forward(in, out, gain_.value, shift_.value, running_mean_.value,
                               running_var_.value, eps_, momentum_, last_was_train_,
                               update_running && last_was_train_, cache_);
}

void BatchNormChannels::backward(Batch& in, const Batch& out) {
    if (!last_was_train_) fail("batchnorm: backward requires a train-mode forward");
    kernels::batchnorm_backward(in, out, gain_.value, gain_.grad, shift_.grad, cache_);
}

// ---- MaxPool2 --------------------------------------------------------------

Shape MaxPool2::out_shape(Shape in) const {
    if (in.length % 2 != 0)
        fail("maxpool: length " + std::to_string(in.length) + " is not divisible by 2");
    return {in.channels, in.length / 2};
}

void MaxPool2::forward(const Batch& in, Batch& out, Mode, bool) {
    ensure_batch(out, static_cast<int>(in.size()), out_shape({in[0].channels, in[0].length}));
    kernels::maxpool2_forward(in, out, argmax_);
}

void MaxPool2::backward(Batch& in, const Batch& out) {
    kernels::maxpool2_backward(in, out, argmax_);
}

// ---- Upsample2 -------------------------------------------------------------

void Upsample2::forward(const Batch& in, Batch& out, Mode, bool) {
    ensure_batch(out, static_cast<int>(in.size()), {in[0].channels, in[0].length * 2});
    kernels::upsample2_forward(in, out);
}

void Upsample2::backward(Batch& in, const Batch& out) {
    kernels::upsample2_backward(in, out);
}

// ---- Dense -----------------------------------------------------------------

Dense::Dense(Shape in, Shape out)
    : in_shape_(in), out_shape_(out),
      bias_("bias", static_cast<std::size_t>(out.channels) * out.length, 0.0, true),
      weight_("weight",
              static_cast<std::size_t>(out.channels) * out.length * in.channels * in.length,
              0.0, true) {}

Shape Dense::out_shape(Shape in) const {
    if (!(in == in_shape_))
        fail("dense: expected input " + std::to_string(in_shape_.channels) + "x" +
             std::to_string(in_shape_.length) + ", got " + std::to_string(in.channels) +
             "x" + std::to_string(in.length));
    return out_shape_;
}

void Dense::forward(const Batch& in, Batch& out, Mode, bool) {
    ensure_batch(out, static_cast<int>(in.size()), out_shape_);
    kernels::dense_forward(in, out, weight_.value, bias_.value);
}

void Dense::backward(Batch& in, const Batch& out) {
    kernels::dense_backward_params(in, out, weight_.grad, bias_.grad);
    kernels::dense_backward_input(in, out, weight_.value);
}

void Dense::init_params(Rng& rng) {
    init_uniform(rng, weight_.value, in_shape_.channels * in_shape_.length,
                 out_shape_.channels * out_shape_.length);
}

} // namespace qcprobe
