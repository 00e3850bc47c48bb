#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace qcprobe {

// channels x length array of doubles with a same-shape gradient buffer.
// Row-major: entry (c, t) lives at c*length + t.
struct Tensor {
    int channels = 0;
    int length = 0;
    std::vector<double> values;
    std::vector<double> grad;

    Tensor() = default;
    Tensor(int c, int l)
        : channels(c), length(l),
          values(static_cast<std::size_t>(c) * l, 0.0),
          grad(static_cast<std::size_t>(c) * l, 0.0) {}

    void resize(int c, int l) {
        channels = c;
        length = l;
        values.assign(static_cast<std::size_t>(c) * l, 0.0);
        grad.assign(static_cast<std::size_t>(c) * l, 0.0);
    }

    double& at(int c, int t) { return values[static_cast<std::size_t>(c) * length + t]; }
    double at(int c, int t) const { return values[static_cast<std::size_t>(c) * length + t]; }
    double& grad_at(int c, int t) { return grad[static_cast<std::size_t>(c) * length + t]; }
    double grad_at(int c, int t) const { return grad[static_cast<std::size_t>(c) * length + t]; }

    double* row(int c) { return values.data() + static_cast<std::size_t>(c) * length; }
    const double* row(int c) const { return values.data() + static_cast<std::size_t>(c) * length; }
    double* grad_row(int c) { return grad.data() + static_cast<std::size_t>(c) * length; }
    const double* grad_row(int c) const { return grad.data() + static_cast<std::size_t>(c) * length; }

    std::size_t size() const { return values.size(); }
    bool same_shape(const Tensor& o) const { return channels == o.channels && length == o.length; }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

using Batch = std::vector<Tensor>;

struct Shape {
    int channels = 0;
    int length = 0;
    bool operator==(const Shape&) const = default;
};

} // namespace qcprobe
