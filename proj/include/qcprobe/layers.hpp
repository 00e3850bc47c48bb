#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qcprobe/kernels.hpp"
#include "qcprobe/rng.hpp"
#include "qcprobe/tensor.hpp"

namespace qcprobe {

enum class Mode { Train, Eval };

struct ParamArray {
    std::string name;          // unique within its layer
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<double> m, v;  // Adam moments (trainable params only)
    bool trainable = true;

    ParamArray(std::string n, std::size_t size, double init, bool train)
        : name(std::move(n)), value(size, init), grad(size, 0.0), trainable(train) {
        if (train) {
            m.assign(size, 0.0);
            v.assign(size, 0.0);
        }
    }
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual std::string kind() const = 0;
    virtual Shape out_shape(Shape in) const = 0;
    // update_running only matters for batchnorm in train mode.
    virtual void forward(const Batch& in, Batch& out, Mode mode, bool update_running) = 0;
    // Reads out.grad (+ cached state), overwrites in.grad, accumulates param grads.
    virtual void backward(Batch& in, const Batch& out) = 0;
    virtual void init_params(Rng&) {}
    virtual std::vector<ParamArray*> params() { return {}; }
};

class Conv1dSame : public Layer {
public:
    Conv1dSame(int in_ch, int out_ch, int k);
    std::string kind() const override { return "conv"; }
    Shape out_shape(Shape in) const override;
    void forward(const Batch& in, Batch& out, Mode, bool) override;
    void backward(Batch& in, const Batch& out) override;
    void init_params(Rng& rng) override;
    std::vector<ParamArray*> params() override { return {&bias_, &kernel_}; }

    int in_channels() const { return in_ch_; }
    int out_channels() const { return out_ch_; }
    int kernel_size() const { return k_; }

private:
    int in_ch_, out_ch_, k_;
    ParamArray bias_, kernel_;
};

class Relu : public Layer {
public:
    std::string kind() const override { return "relu"; }
    Shape out_shape(Shape in) const override { return in; }
    void forward(const Batch& in, Batch& out, Mode, bool) override;
    void backward(Batch& in, const Batch& out) override;
};

class BatchNormChannels : public Layer {
public:
    explicit BatchNormChannels(int channels, double eps = 1e-5, double momentum = 0.9);
    std::string kind() const override { return "batchnorm"; }
    Shape out_shape(Shape in) const override;
    void forward(const Batch& in, Batch& out, Mode mode, bool update_running) override;
    void backward(Batch& in, const Batch& out) override;
    std::vector<ParamArray*> params() override {
        return {&gain_, &running_mean_, &running_var_, &shift_};
    }

private:
    int channels_;
    double eps_, momentum_;
    ParamArray gain_, shift_, running_mean_, running_var_;
    kernels::BatchNormCache cache_;
    bool last_was_train_ = false;
};

class MaxPool2 : public Layer {
public:
    std::string kind() const override { return "maxpool"; }
    Shape out_shape(Shape in) const override;
    void forward(const Batch& in, Batch& out, Mode, bool) override;
    void backward(Batch& in, const Batch& out) override;

private:
    std::vector<std::uint8_t> argmax_;
};

class Upsample2 : public Layer {
public:
    std::string kind() const override { return "upsample"; }
    Shape out_shape(Shape in) const override { return {in.channels, in.length * 2}; }
    void forward(const Batch& in, Batch& out, Mode, bool) override;
    void backward(Batch& in, const Batch& out) override;
};

// Affine map between flattened tensors; reshapes to an arbitrary output
// (channels, length). Flatten order is channel-major (row-major Tensor data).
class Dense : public Layer {
public:
    Dense(Shape in, Shape out);
    std::string kind() const override { return "dense"; }
    Shape out_shape(Shape in) const override;
    void forward(const Batch& in, Batch& out, Mode, bool) override;
    void backward(Batch& in, const Batch& out) override;
    void init_params(Rng& rng) override;
    std::vector<ParamArray*> params() override { return {&bias_, &weight_}; }

private:
    Shape in_shape_, out_shape_;
    ParamArray bias_, weight_;
};

} // namespace qcprobe
