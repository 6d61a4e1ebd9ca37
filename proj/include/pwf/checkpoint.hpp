#pragma once
// Checkpoint container: "PWFN1" magic, little-endian uint32 JSON header
// length, JSON header (model config + tensor manifest), float32 LE payload.

#include "pwf/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace pwf::ckpt {

using json = nlohmann::json;

inline json config_to_json(const model::ModelConfig& c) {
    return json{{"base_channels", c.base_channels},
                {"blocks_per_level", c.blocks_per_level},
                {"family", c.family},
                {"mixer_kernel", c.mixer_kernel},
                {"seed", c.seed},
                {"io_channels", c.io_channels}};
}

inline model::ModelConfig config_from_json(const json& j) {
    model::ModelConfig c;
    c.base_channels = j.at("base_channels").get<int>();
    auto b = j.at("blocks_per_level").get<std::vector<int>>();
    if (b.size() != 3) throw ContractError("checkpoint: blocks_per_level must have 3 entries");
    c.blocks_per_level = {b[0], b[1], b[2]};
    c.family = j.at("family").get<std::string>();
    c.mixer_kernel = j.at("mixer_kernel").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.io_channels = j.at("io_channels").get<int>();
    c.validate();
    return c;
}

template <class T>
void save_checkpoint(const std::string& path, const model::Model<T>& m, long long iteration) {
    json manifest = json::array();
    std::size_t offset = 0;
    for (const auto& p : m.params()) {
        manifest.push_back({{"name", p->name}, {"shape", p->value.shape}, {"offset", offset}});
        offset += p->value.numel();
    }
    json header{{"format", "PWFN1"},
                {"model", config_to_json(m.cfg)},
                {"iteration", iteration},
                {"tensors", manifest}};
    const std::string hs = header.dump();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot write checkpoint: " + path);
    f.write("PWFN1", 5);
    const std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
    unsigned char le[4] = {static_cast<unsigned char>(hlen), static_cast<unsigned char>(hlen >> 8),
                           static_cast<unsigned char>(hlen >> 16),
                           static_cast<unsigned char>(hlen >> 24)};
    f.write(reinterpret_cast<const char*>(le), 4);
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    std::vector<float> payload;
    payload.reserve(offset);
    for (const auto& p : m.params())
        for (auto v : p->value.data) payload.push_back(static_cast<float>(v));
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!f) throw ContractError("checkpoint write failed: " + path);
}

struct LoadedCheckpoint {
    model::ModelConfig cfg;
    long long iteration = 0;
    json header;
    std::vector<float> payload;
};

inline LoadedCheckpoint read_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot open checkpoint: " + path);
    char magic[5];
    f.read(magic, 5);
    if (!f || std::memcmp(magic, "PWFN1", 5) != 0)
        throw ContractError("bad checkpoint magic (want PWFN1): " + path);
    unsigned char le[4];
    f.read(reinterpret_cast<char*>(le), 4);
    const std::uint32_t hlen = std::uint32_t(le[0]) | (std::uint32_t(le[1]) << 8) |
                               (std::uint32_t(le[2]) << 16) | (std::uint32_t(le[3]) << 24);
    std::string hs(hlen, '\0');
    f.read(hs.data(), hlen);
    if (!f) throw ContractError("truncated checkpoint header: " + path);
    LoadedCheckpoint lc;
    lc.header = json::parse(hs);
    if (lc.header.at("format").get<std::string>() != "PWFN1")
        throw ContractError("bad checkpoint format field: " + path);
    lc.cfg = config_from_json(lc.header.at("model"));
    lc.iteration = lc.header.at("iteration").get<long long>();
    std::size_t total = 0;
    for (const auto& t : lc.header.at("tensors")) {
        std::size_t numel = 1;
        for (int d : t.at("shape").get<std::vector<int>>()) numel *= static_cast<std::size_t>(d);
        if (t.at("offset").get<std::size_t>() != total)
            throw ContractError("checkpoint manifest offsets not contiguous: " + path);
        total += numel;
    }
    lc.payload.resize(total);
    f.read(reinterpret_cast<char*>(lc.payload.data()),
           static_cast<std::streamsize>(total * sizeof(float)));
    if (!f) throw ContractError("truncated checkpoint payload: " + path);
    return lc;
}

template <class T>
model::Model<T> load_checkpoint(const std::string& path, long long* iteration = nullptr) {
    LoadedCheckpoint lc = read_checkpoint(path);
    model::Model<T> m(lc.cfg);
    std::size_t idx = 0;
    for (const auto& t : lc.header.at("tensors")) {
        const std::string name = t.at("name").get<std::string>();
        auto& p = m.p(name);
        const auto shape = t.at("shape").get<std::vector<int>>();
        if (Shape(shape) != p.value.shape)
            throw ContractError("checkpoint tensor shape mismatch: " + name);
        for (auto& v : p.value.data) v = static_cast<T>(lc.payload[idx++]);
    }
    if (idx != lc.payload.size()) throw ContractError("checkpoint payload size mismatch: " + path);
    if (iteration) *iteration = lc.iteration;
    return m;
}

} // namespace pwf::ckpt
