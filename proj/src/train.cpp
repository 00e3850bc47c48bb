#include "qcprobe/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qcprobe/error.hpp"
#include "qcprobe/rng.hpp"

namespace qcprobe {

RegionMask RegionMask::centered_unpunished(int n, int size) {
    if (size < 0 || size >= n)
        fail("mask: unpunished block of " + std::to_string(size) +
             " samples does not fit in " + std::to_string(n));
    return unpunished_span(n, (n - size) / 2, size);
}

RegionMask RegionMask::unpunished_span(int n, int start, int len) {
    if (start < 0 || len < 0 || start + len > n)
        fail("mask: span " + std::to_string(start) + ":" + std::to_string(len) +
             " out of range for length " + std::to_string(n));
    if (len >= n) fail("mask: at least one punished sample is required");
    RegionMask m;
    m.flags.assign(n, 1);
    std::fill(m.flags.begin() + start, m.flags.begin() + start + len, 0);
    return m;
}

int RegionMask::punished_count() const {
    int c = 0;
    for (auto f : flags) c += f != 0;
    return c;
}

double masked_mse(Tensor& pred, const Tensor& target, const RegionMask& mask,
                  bool with_grad, double grad_scale) {
    if (!pred.same_shape(target)) fail("masked_mse: shape mismatch");
    if (mask.size() != pred.length)
        fail("masked_mse: mask length " + std::to_string(mask.size()) +
             " != signal length " + std::to_string(pred.length));
    const int denom_per_ch = mask.punished_count();
    if (denom_per_ch == 0) fail("masked_mse: all-false mask (zero denominator)");
    const double denom = static_cast<double>(denom_per_ch) * pred.channels;

    double sse = 0.0;
    for (int c = 0; c < pred.channels; ++c) {
        const double* p = pred.row(c);
        const double* t = target.row(c);
        for (int i = 0; i < pred.length; ++i)
            if (mask.flags[i]) {
                double d = p[i] - t[i];
                sse += d * d;
            }
    }
    if (with_grad) {
        const double s = 2.0 * grad_scale / denom;
        for (int c = 0; c < pred.channels; ++c) {
            const double* p = pred.row(c);
            const double* t = target.row(c);
            double* g = pred.grad_row(c);
            for (int i = 0; i < pred.length; ++i)
                g[i] = mask.flags[i] ? s * (p[i] - t[i]) : 0.0;
        }
    }
    return sse / denom;
}

void adam_step(ParamStore& store, double lr, double beta1, double beta2, double eps,
               std::int64_t t) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (auto& item : store.items) {
        ParamArray& p = *item.array;
        if (!p.trainable) continue;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            if (!std::isfinite(g))
                fail("adam: non-finite gradient in " + item.name + "[" +
                     std::to_string(i) + "]");
            p.m[i] = beta1 * p.m[i] + (1.0 - beta1) * g;
            p.v[i] = beta2 * p.v[i] + (1.0 - beta2) * g * g;
            const double mhat = p.m[i] / bc1;
            const double vhat = p.v[i] / bc2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

Batch records_to_batch(const std::vector<SignalRecord>& recs) {
    Batch b(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        b[i].resize(1, static_cast<int>(recs[i].samples.size()));
        std::copy(recs[i].samples.begin(), recs[i].samples.end(), b[i].values.begin());
    }
    return b;
}

namespace {

void zero_grads(ParamStore& store) {
    for (auto& item : store.items)
        std::fill(item.array->grad.begin(), item.array->grad.end(), 0.0);
}

void check_finite_params(const ParamStore& store) {
    for (const auto& item : store.items)
        for (double v : item.array->value)
            if (!std::isfinite(v)) fail("train: non-finite parameter in " + item.name);
}

struct StateSnapshot {
    std::vector<std::vector<double>> value, m, v;
    std::int64_t opt_step = 0;

    static StateSnapshot take(const Autoencoder& model) {
        StateSnapshot s;
        for (const auto& item : model.params().items) {
            s.value.push_back(item.array->value);
            s.m.push_back(item.array->m);
            s.v.push_back(item.array->v);
        }
        s.opt_step = model.opt_step();
        return s;
    }
    void restore(Autoencoder& model) const {
        auto& items = model.params().items;
        for (std::size_t i = 0; i < items.size(); ++i) {
            items[i].array->value = value[i];
            items[i].array->m = m[i];
            items[i].array->v = v[i];
        }
        model.set_opt_step(opt_step);
    }
};

} // namespace

double train_step(Autoencoder& model, const Batch& inputs, const Batch& targets,
                  const RegionMask& mask, const TrainConfig& cfg,
                  double* unpunished_sse, double* punished_sse) {
    const int nb = static_cast<int>(inputs.size());
    if (nb < 2) fail("train_step: batch size must be >= 2 (batchnorm)");
    Batch& pred = model.forward(inputs, Mode::Train, true);

    double loss = 0.0;
    const double gscale = 1.0 / nb;
    for (int b = 0; b < nb; ++b)
        loss += masked_mse(pred[b], targets[b], mask, true, gscale) / nb;
    if (!std::isfinite(loss)) fail("train: non-finite loss");

    if (punished_sse || unpunished_sse) {
        for (int b = 0; b < nb; ++b) {
            const double* p = pred[b].values.data();
            const double* t = targets[b].values.data();
            for (int i = 0; i < pred[b].length; ++i) {
                double d = (p[i] - t[i]) * (p[i] - t[i]);
                if (mask.flags[i]) {
                    if (punished_sse) *punished_sse += d;
                } else if (unpunished_sse) {
                    *unpunished_sse += d;
                }
            }
        }
    }

    zero_grads(model.params());
    model.backward();
    model.set_opt_step(model.opt_step() + 1);
    adam_step(model.params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, model.opt_step());
    check_finite_params(model.params());
    return loss;
}

TrainingHistory train(Autoencoder& model, const std::vector<SignalRecord>& dataset,
                      const TrainConfig& cfg) {
    const int n = static_cast<int>(dataset.size());
    const int L = model.input_length();
    if (cfg.epochs < 1) fail("train: epochs must be >= 1");
    if (cfg.batch_size < 2) fail("train: batch_size must be >= 2 (batchnorm)");
    if (n < cfg.batch_size) fail("train: dataset smaller than one batch");
    for (const auto& r : dataset)
        if (static_cast<int>(r.samples.size()) != L)
            fail("train: record " + r.id + " has length " +
                 std::to_string(r.samples.size()) + ", expected " + std::to_string(L));

    RegionMask mask = cfg.mask ? *cfg.mask : RegionMask::all_punished(L);
    if (mask.size() != L) fail("train: mask length != input_length");
    if (mask.punished_count() == 0) fail("train: mask has no punished samples");
    const bool have_unpunished = mask.unpunished_count() > 0;

    Batch all = records_to_batch(dataset);
    Rng shuffle_rng(derive_seed(cfg.seed, 0x5u));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainingHistory history;
    StateSnapshot last_good = StateSnapshot::take(model);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double punished_sse = 0.0, unpunished_sse = 0.0;
        long punished_n = 0, unpunished_n = 0;

        try {
            int at = 0;
            while (at < n) {
                int take = std::min(cfg.batch_size, n - at);
                if (take < 2) break; // a trailing single record cannot batchnorm
                Batch inputs(take);
                for (int i = 0; i < take; ++i) inputs[i] = all[order[at + i]];
                train_step(model, inputs, inputs, mask, cfg, &unpunished_sse, &punished_sse);
                punished_n += static_cast<long>(take) * mask.punished_count();
                unpunished_n += static_cast<long>(take) * mask.unpunished_count();
                at += take;
            }
        } catch (const Error&) {
            last_good.restore(model);
            throw;
        }

        EpochStats st;
        st.epoch = epoch;
        st.punished_mse = punished_n ? punished_sse / punished_n : 0.0;
        st.unpunished_mse = have_unpunished && unpunished_n
                                ? unpunished_sse / unpunished_n
                                : st.punished_mse;
        history.push_back(st);
        last_good = StateSnapshot::take(model);
    }
    return history;
}

Split split_dataset(const std::vector<SignalRecord>& dataset, double test_frac,
                    std::uint64_t seed) {
    std::vector<int> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return dataset[a].id < dataset[b].id; });
    Rng rng(derive_seed(seed, 0x51u));
    rng.shuffle(idx);
    std::size_t n_test = static_cast<std::size_t>(std::lround(test_frac * dataset.size()));
    Split s;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i < idx.size() - n_test)
            s.train.push_back(dataset[idx[i]]);
        else
            s.test.push_back(dataset[idx[i]]);
    }
    return s;
}

double reconstruction_mse(Autoencoder& model, const SignalRecord& rec) {
    SignalRecord out = model.decode(model.encode(rec));
    double sse = 0.0;
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        double d = out.samples[i] - rec.samples[i];
        sse += d * d;
    }
    return sse / static_cast<double>(rec.samples.size());
}

} // namespace qcprobe
