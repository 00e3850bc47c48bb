#include "qcprobe/network.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "qcprobe/error.hpp"

namespace qcprobe {

using nlohmann::json;

namespace {

LayerSpec conv(int k, int c) {
    LayerSpec s;
    s.kind = LayerSpec::Kind::Conv;
    s.kernel_size = k;
    s.out_channels = c;
    return s;
}
LayerSpec relu() { return {LayerSpec::Kind::Relu}; }
LayerSpec bn() { return {LayerSpec::Kind::BatchNorm}; }
LayerSpec pool() { return {LayerSpec::Kind::MaxPool}; }
LayerSpec dense(int units) {
    LayerSpec s;
    s.kind = LayerSpec::Kind::Dense;
    s.out_units = units;
    return s;
}

void push_block(std::vector<LayerSpec>& v, int k, int c, bool with_pool) {
    v.push_back(conv(k, c));
    v.push_back(relu());
    v.push_back(bn());
    if (with_pool) v.push_back(pool());
}

} // namespace

NetworkSpec paper_spec() {
    NetworkSpec s;
    s.input_length = 512;
    s.latent_dim = 30;
    push_block(s.encoder_layers, 100, 30, true);
    push_block(s.encoder_layers, 100, 15, true);
    push_block(s.encoder_layers, 30, 15, true);
    push_block(s.encoder_layers, 20, 5, true);
    s.encoder_layers.push_back(dense(30));
    return s;
}

NetworkSpec good_spec() {
    NetworkSpec s;
    s.input_length = 512;
    s.latent_dim = 30;
    push_block(s.encoder_layers, 100, 30, true);
    push_block(s.encoder_layers, 100, 15, true);
    push_block(s.encoder_layers, 30, 15, false);
    push_block(s.encoder_layers, 20, 5, false);
    s.encoder_layers.push_back(dense(30));
    return s;
}

NetworkSpec bad_spec() { return paper_spec(); }

NetworkSpec crop_probe_spec() {
    NetworkSpec s;
    s.input_length = 512;
    s.latent_dim = 30;
    push_block(s.encoder_layers, 25, 12, true);
    push_block(s.encoder_layers, 25, 8, true);
    push_block(s.encoder_layers, 15, 6, true);
    s.encoder_layers.push_back(dense(30));
    return s;
}

static const char* kind_name(LayerSpec::Kind k) {
    switch (k) {
    case LayerSpec::Kind::Conv: return "conv";
    case LayerSpec::Kind::Relu: return "relu";
    case LayerSpec::Kind::BatchNorm: return "batchnorm";
    case LayerSpec::Kind::MaxPool: return "maxpool";
    case LayerSpec::Kind::Upsample: return "upsample";
    case LayerSpec::Kind::Dense: return "dense";
    }
    return "?";
}

std::string network_spec_to_json(const NetworkSpec& spec) {
    json j;
    j["input_length"] = spec.input_length;
    j["latent_dim"] = spec.latent_dim;
    json layers = json::array();
    for (const auto& l : spec.encoder_layers) {
        json e;
        e["kind"] = kind_name(l.kind);
        switch (l.kind) {
        case LayerSpec::Kind::Conv:
            e["kernel"] = l.kernel_size;
            e["channels"] = l.out_channels;
            break;
        case LayerSpec::Kind::MaxPool: e["window"] = l.window; break;
        case LayerSpec::Kind::Upsample: e["factor"] = l.factor; break;
        case LayerSpec::Kind::Dense: e["units"] = l.out_units; break;
        default: break;
        }
        layers.push_back(e);
    }
    j["encoder"] = layers;
    return j.dump(2);
}

NetworkSpec network_spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("network spec: bad JSON: ") + e.what());
    }
    NetworkSpec spec;
    try {
        spec.input_length = j.at("input_length").get<int>();
        spec.latent_dim = j.at("latent_dim").get<int>();
        for (const auto& e : j.at("encoder")) {
            std::string kind = e.at("kind").get<std::string>();
            LayerSpec l;
            if (kind == "conv") {
                l.kind = LayerSpec::Kind::Conv;
                l.kernel_size = e.at("kernel").get<int>();
                l.out_channels = e.at("channels").get<int>();
            } else if (kind == "relu") {
                l.kind = LayerSpec::Kind::Relu;
            } else if (kind == "batchnorm") {
                l.kind = LayerSpec::Kind::BatchNorm;
            } else if (kind == "maxpool") {
                l.kind = LayerSpec::Kind::MaxPool;
                l.window = e.value("window", 2);
            } else if (kind == "dense") {
                l.kind = LayerSpec::Kind::Dense;
                l.out_units = e.at("units").get<int>();
            } else {
                fail("network spec: unknown layer kind '" + kind + "'");
            }
            spec.encoder_layers.push_back(l);
        }
    } catch (const json::exception& e) {
        fail(std::string("network spec: ") + e.what());
    }
    return spec;
}

NetworkSpec load_network_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open network spec " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return network_spec_from_json(text);
}

void save_network_spec(const NetworkSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write network spec " + path.string());
    out << network_spec_to_json(spec) << "\n";
}

std::vector<Shape> infer_encoder_shapes(const NetworkSpec& spec) {
    if (spec.input_length < 2) fail("network spec: input_length must be >= 2");
    if (spec.latent_dim < 1) fail("network spec: latent_dim must be >= 1");
    if (spec.encoder_layers.empty()) fail("network spec: empty encoder");

    std::vector<Shape> shapes;
    Shape cur{1, spec.input_length};
    shapes.push_back(cur);
    bool saw_dense = false;
    for (const auto& l : spec.encoder_layers) {
        if (saw_dense) fail("network spec: dense must be the final encoder layer");
        switch (l.kind) {
        case LayerSpec::Kind::Conv:
            if (l.kernel_size < 1 || l.out_channels < 1)
                fail("network spec: conv needs kernel >= 1 and channels >= 1");
            cur = {l.out_channels, cur.length};
            break;
        case LayerSpec::Kind::Relu:
        case LayerSpec::Kind::BatchNorm: break;
        case LayerSpec::Kind::MaxPool:
            if (l.window != 2) fail("network spec: only pooling window 2 is supported");
            if (cur.length % 2 != 0)
                fail("network spec: pooling does not divide length " +
                     std::to_string(cur.length));
            cur = {cur.channels, cur.length / 2};
            break;
        case LayerSpec::Kind::Upsample:
            fail("network spec: upsample is decoder-only");
        case LayerSpec::Kind::Dense:
            if (l.out_units != spec.latent_dim)
                fail("network spec: dense output " + std::to_string(l.out_units) +
                     " != latent_dim " + std::to_string(spec.latent_dim));
            cur = {spec.latent_dim, 1};
            saw_dense = true;
            break;
        }
        shapes.push_back(cur);
    }
    if (!saw_dense) fail("network spec: encoder must end with a dense layer");
    return shapes;
}

// ---- Autoencoder -----------------------------------------------------------

namespace {

struct ConvBlock {
    int kernel = 0;
    int in_channels = 0;
    bool has_bn = false;
    bool has_pool = false;
};

} // namespace

Autoencoder::Autoencoder(const NetworkSpec& spec, std::uint64_t seed)
    : spec_(spec), rng_(seed) {
    encoder_shapes_ = infer_encoder_shapes(spec);

    // encoder layers
    Shape cur{1, spec.input_length};
    std::vector<ConvBlock> blocks;
    Shape pre_dense = cur;
    for (const auto& l : spec.encoder_layers) {
        switch (l.kind) {
        case LayerSpec::Kind::Conv:
            blocks.push_back({l.kernel_size, cur.channels, false, false});
            layers_.push_back(std::make_unique<Conv1dSame>(cur.channels, l.out_channels,
                                                           l.kernel_size));
            cur = {l.out_channels, cur.length};
            break;
        case LayerSpec::Kind::Relu:
            layers_.push_back(std::make_unique<Relu>());
            break;
        case LayerSpec::Kind::BatchNorm:
            if (!blocks.empty()) blocks.back().has_bn = true;
            layers_.push_back(std::make_unique<BatchNormChannels>(cur.channels));
            break;
        case LayerSpec::Kind::MaxPool:
            if (!blocks.empty()) blocks.back().has_pool = true;
            layers_.push_back(std::make_unique<MaxPool2>());
            cur = {cur.channels, cur.length / 2};
            break;
        case LayerSpec::Kind::Dense:
            pre_dense = cur;
            layers_.push_back(std::make_unique<Dense>(cur, Shape{spec.latent_dim, 1}));
            cur = {spec.latent_dim, 1};
            break;
        default: break;
        }
    }
    n_encoder_layers_ = layers_.size();

    // decoder: dense back to the pre-dense shape, then mirrored conv blocks;
    // the final conv returns to 1 channel with no activation.
    decoder_shapes_.push_back(cur);
    layers_.push_back(std::make_unique<Dense>(cur, pre_dense));
    cur = pre_dense;
    decoder_shapes_.push_back(cur);
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        const bool final_block = std::next(it) == blocks.rend();
        if (it->has_pool) {
            layers_.push_back(std::make_unique<Upsample2>());
            cur = {cur.channels, cur.length * 2};
            decoder_shapes_.push_back(cur);
        }
        layers_.push_back(std::make_unique<Conv1dSame>(cur.channels, it->in_channels,
                                                       it->kernel));
        cur = {it->in_channels, cur.length};
        decoder_shapes_.push_back(cur);
        if (!final_block) {
            layers_.push_back(std::make_unique<Relu>());
            decoder_shapes_.push_back(cur);
            if (it->has_bn) {
                layers_.push_back(std::make_unique<BatchNormChannels>(cur.channels));
                decoder_shapes_.push_back(cur);
            }
        }
    }
    if (cur.channels != 1 || cur.length != spec.input_length)
        fail("internal: decoder output " + std::to_string(cur.channels) + "x" +
             std::to_string(cur.length) + " does not mirror the input");

    // deterministic init, layer by layer
    for (auto& l : layers_) l->init_params(rng_);

    // canonical parameter order: layer index, then name alphabetical
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        auto ps = layers_[i]->params();
        std::sort(ps.begin(), ps.end(),
                  [](const ParamArray* a, const ParamArray* b) { return a->name < b->name; });
        for (ParamArray* p : ps)
            store_.items.push_back({static_cast<int>(i),
                                    "L" + std::to_string(i) + "." + p->name, p});
    }

    acts_.resize(layers_.size() + 1);
}

std::size_t ParamStore::total_values() const {
    std::size_t n = 0;
    for (const auto& it : items) n += it.array->value.size();
    return n;
}

std::size_t ParamStore::trainable_values() const {
    std::size_t n = 0;
    for (const auto& it : items)
        if (it.array->trainable) n += it.array->value.size();
    return n;
}

Batch& Autoencoder::forward(const Batch& input, Mode mode, bool update_running) {
    if (input.empty()) fail("forward: empty batch");
    for (const auto& t : input)
        if (t.channels != 1 || t.length != spec_.input_length)
            fail("forward: input must be 1x" + std::to_string(spec_.input_length) +
                 ", got " + std::to_string(t.channels) + "x" + std::to_string(t.length));
    acts_[0] = input;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->forward(acts_[i], acts_[i + 1], mode, update_running);
    return acts_.back();
}

void Autoencoder::backward() {
    for (std::size_t i = layers_.size(); i-- > 0;)
        layers_[i]->backward(acts_[i], acts_[i + 1]);
}

std::vector<double> Autoencoder::encode(const SignalRecord& rec) {
    if (static_cast<int>(rec.samples.size()) != spec_.input_length)
        fail("encode: record length " + std::to_string(rec.samples.size()) +
             " != input_length " + std::to_string(spec_.input_length));
    Batch cur(1);
    cur[0].resize(1, spec_.input_length);
    std::copy(rec.samples.begin(), rec.samples.end(), cur[0].values.begin());
    Batch next;
    for (std::size_t i = 0; i < n_encoder_layers_; ++i) {
        layers_[i]->forward(cur, next, Mode::Eval, false);
        std::swap(cur, next);
    }
    return cur[0].values;
}

SignalRecord Autoencoder::decode(const std::vector<double>& z) {
    if (static_cast<int>(z.size()) != spec_.latent_dim)
        fail("decode: latent size " + std::to_string(z.size()) + " != latent_dim " +
             std::to_string(spec_.latent_dim));
    Batch cur(1);
    cur[0].resize(spec_.latent_dim, 1);
    std::copy(z.begin(), z.end(), cur[0].values.begin());
    Batch next;
    for (std::size_t i = n_encoder_layers_; i < layers_.size(); ++i) {
        layers_[i]->forward(cur, next, Mode::Eval, false);
        std::swap(cur, next);
    }
    SignalRecord rec;
    rec.samples = cur[0].values;
    rec.fs = sample_rate;
    rec.source = SignalSource::Synthetic;
    rec.label = "decoded";
    rec.id = "decoded";
    return rec;
}

} // namespace qcprobe
