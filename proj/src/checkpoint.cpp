#include "qcprobe/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "qcprobe/error.hpp"

namespace qcprobe {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'Q', 'C', 'A', 'E'};
constexpr std::uint16_t kVersion = 1;

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void append_doubles(std::string& out, const std::vector<double>& v) {
    static_assert(std::endian::native == std::endian::little,
                  "payload is little-endian; big-endian hosts are unsupported");
    std::size_t at = out.size();
    out.resize(at + v.size() * sizeof(double));
    std::memcpy(out.data() + at, v.data(), v.size() * sizeof(double));
}

void read_doubles(const std::string& in, std::size_t& at, std::vector<double>& v) {
    std::size_t bytes = v.size() * sizeof(double);
    if (at + bytes > in.size()) fail("checkpoint: truncated payload");
    std::memcpy(v.data(), in.data() + at, bytes);
    at += bytes;
}

json cfg_to_json(const TrainConfig& cfg) {
    json j;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["lr"] = cfg.lr;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["eps"] = cfg.eps;
    j["seed"] = cfg.seed;
    if (cfg.mask) {
        json flags = json::array();
        for (auto f : cfg.mask->flags) flags.push_back(static_cast<int>(f));
        j["mask"] = flags;
    }
    return j;
}

TrainConfig cfg_from_json(const json& j) {
    TrainConfig cfg;
    cfg.epochs = j.at("epochs").get<int>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.lr = j.at("lr").get<double>();
    cfg.beta1 = j.at("beta1").get<double>();
    cfg.beta2 = j.at("beta2").get<double>();
    cfg.eps = j.at("eps").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mask")) {
        RegionMask m;
        for (const auto& f : j.at("mask")) m.flags.push_back(f.get<int>() != 0);
        cfg.mask = m;
    }
    return cfg;
}

} // namespace

void save_checkpoint(const Autoencoder& model, const TrainConfig& cfg, int epoch,
                     const std::filesystem::path& path) {
    std::string payload;
    json layout = json::array();
    for (const auto& item : model.params().items) {
        const ParamArray& p = *item.array;
        json e;
        e["name"] = item.name;
        e["size"] = p.value.size();
        e["trainable"] = p.trainable;
        layout.push_back(e);
        append_doubles(payload, p.value);
        if (p.trainable) {
            append_doubles(payload, p.m);
            append_doubles(payload, p.v);
        }
    }

    json meta;
    meta["format_version"] = kVersion;
    meta["spec"] = json::parse(network_spec_to_json(model.spec()));
    meta["input_length"] = model.input_length();
    meta["latent_dim"] = model.latent_dim();
    meta["train"] = cfg_to_json(cfg);
    meta["epoch"] = epoch;
    meta["opt_step"] = model.opt_step();
    meta["sample_rate"] = model.sample_rate;
    meta["rng"] = model.rng_state();
    meta["param_layout"] = layout;
    meta["payload_bytes"] = payload.size();
    meta["payload_checksum"] =
        hex64(fnv1a64(reinterpret_cast<const unsigned char*>(payload.data()), payload.size()));
    std::string meta_text = meta.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write checkpoint " + path.string());
    out.write(kMagic, 4);
    std::uint16_t ver = kVersion;
    out.write(reinterpret_cast<const char*>(&ver), 2);
    std::uint32_t mlen = static_cast<std::uint32_t>(meta_text.size());
    out.write(reinterpret_cast<const char*>(&mlen), 4);
    out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) fail("write failed: " + path.string());
}

std::string read_checkpoint_meta(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open checkpoint " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        fail("checkpoint: bad magic, not a QCAE file: " + path.string());
    std::uint16_t ver = 0;
    if (!in.read(reinterpret_cast<char*>(&ver), 2)) fail("checkpoint: truncated header");
    if (ver != kVersion)
        fail("checkpoint: unsupported format version " + std::to_string(ver));
    std::uint32_t mlen = 0;
    if (!in.read(reinterpret_cast<char*>(&mlen), 4)) fail("checkpoint: truncated header");
    std::string meta(mlen, '\0');
    if (!in.read(meta.data(), mlen)) fail("checkpoint: truncated metadata");
    return meta;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::string meta_text = read_checkpoint_meta(path);
    json meta;
    try {
        meta = json::parse(meta_text);
    } catch (const json::exception& e) {
        fail(std::string("checkpoint: bad metadata: ") + e.what());
    }

    std::ifstream in(path, std::ios::binary);
    in.seekg(4 + 2 + 4 + static_cast<std::streamoff>(meta_text.size()));
    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const std::size_t expect = meta.at("payload_bytes").get<std::size_t>();
    if (payload.size() != expect)
        fail("checkpoint: truncated payload (" + std::to_string(payload.size()) + " of " +
             std::to_string(expect) + " bytes)");
    std::string sum =
        hex64(fnv1a64(reinterpret_cast<const unsigned char*>(payload.data()), payload.size()));
    if (sum != meta.at("payload_checksum").get<std::string>())
        fail("checkpoint: checksum failure");

    Checkpoint ck;
    NetworkSpec spec = network_spec_from_json(meta.at("spec").dump());
    ck.model = std::make_unique<Autoencoder>(spec, 0);
    ck.cfg = cfg_from_json(meta.at("train"));
    ck.epoch = meta.at("epoch").get<int>();
    ck.model->set_opt_step(meta.at("opt_step").get<std::int64_t>());
    ck.model->sample_rate = meta.at("sample_rate").get<double>();
    ck.model->set_rng_state(meta.at("rng").get<std::string>());

    const json& layout = meta.at("param_layout");
    auto& items = ck.model->params().items;
    if (layout.size() != items.size()) fail("checkpoint: parameter layout mismatch");
    std::size_t at = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        ParamArray& p = *items[i].array;
        if (layout[i].at("name").get<std::string>() != items[i].name ||
            layout[i].at("size").get<std::size_t>() != p.value.size())
            fail("checkpoint: parameter layout mismatch at " + items[i].name);
        read_doubles(payload, at, p.value);
        if (p.trainable) {
            read_doubles(payload, at, p.m);
            read_doubles(payload, at, p.v);
        }
    }
    if (at != payload.size()) fail("checkpoint: payload size mismatch");
    return ck;
}

} // namespace qcprobe
