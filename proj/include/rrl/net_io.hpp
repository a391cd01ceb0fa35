#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrl/errors.hpp"
#include "rrl/mlp.hpp"

namespace rrl {

static_assert(std::endian::native == std::endian::little,
              "parameter blobs are little-endian; big-endian hosts need a "
              "byte swap here");

inline constexpr char kBlobMagic[4] = {'R', 'R', 'L', '1'};
inline constexpr int kBlobVersion = 1;

// Writes <base>.bin (magic "RRL1" + flat little-endian f64 parameters, per
// layer weights row-major then biases) and <base>.json (layer shapes and
// activation tags).
inline void save_net(const Mlp& net, const std::filesystem::path& base) {
    nlohmann::json side;
    side["format"] = "RRL1";
    side["version"] = kBlobVersion;
    side["layers"] = nlohmann::json::array();
    for (const auto& l : net.layers()) {
        nlohmann::json jl;
        jl["in"] = l.in;
        jl["out"] = l.out;
        jl["activation"] = activation_name(l.act);
        if (l.act == Activation::ScaledSigmoid) {
            jl["lo"] = l.lo;
            jl["hi"] = l.hi;
        }
        side["layers"].push_back(jl);
    }

    std::filesystem::path json_path = base;
    json_path += ".json";
    std::ofstream js(json_path);
    if (!js) throw IoFailure("save_net: cannot write " + json_path.string());
    js << side.dump(2) << "\n";

    std::filesystem::path bin_path = base;
    bin_path += ".bin";
    std::ofstream bs(bin_path, std::ios::binary);
    if (!bs) throw IoFailure("save_net: cannot write " + bin_path.string());
    bs.write(kBlobMagic, 4);
    net.for_each_param([&](const double& p, const double&) {
        bs.write(reinterpret_cast<const char*>(&p), sizeof(double));
    });
    if (!bs) throw IoFailure("save_net: short write to " + bin_path.string());
}

inline Mlp load_net(const std::filesystem::path& base) {
    std::filesystem::path json_path = base;
    json_path += ".json";
    std::ifstream js(json_path);
    if (!js) throw IoFailure("load_net: cannot read " + json_path.string());
    nlohmann::json side;
    try {
        js >> side;
    } catch (const nlohmann::json::exception& e) {
        throw BadConfig("load_net: malformed sidecar " + json_path.string() +
                        ": " + e.what());
    }
    if (side.value("format", "") != "RRL1")
        throw BadConfig("load_net: sidecar " + json_path.string() +
                        " is not an RRL1 parameter file");
    if (side.value("version", -1) != kBlobVersion)
        throw BadConfig("load_net: unsupported version in " +
                        json_path.string());

    std::vector<LayerSpec> specs;
    for (const auto& jl : side.at("layers")) {
        LayerSpec s;
        s.in = jl.at("in").get<std::size_t>();
        s.out = jl.at("out").get<std::size_t>();
        s.act = activation_from_name(jl.at("activation").get<std::string>());
        if (s.act == Activation::ScaledSigmoid) {
            s.lo = jl.at("lo").get<double>();
            s.hi = jl.at("hi").get<double>();
        }
        specs.push_back(s);
    }

    Mlp net(specs);
    std::filesystem::path bin_path = base;
    bin_path += ".bin";
    std::ifstream bs(bin_path, std::ios::binary);
    if (!bs) throw IoFailure("load_net: cannot read " + bin_path.string());
    char magic[4];
    bs.read(magic, 4);
    if (!bs || std::memcmp(magic, kBlobMagic, 4) != 0)
        throw BadConfig("load_net: bad magic in " + bin_path.string());
    net.for_each_param([&](double& p, double&) {
        bs.read(reinterpret_cast<char*>(&p), sizeof(double));
    });
    if (!bs)
        throw BadConfig("load_net: blob " + bin_path.string() +
                        " shorter than sidecar shapes require");
    char extra;
    if (bs.read(&extra, 1))
        throw BadConfig("load_net: blob " + bin_path.string() +
                        " longer than sidecar shapes require");
    return net;
}

}  // namespace rrl
