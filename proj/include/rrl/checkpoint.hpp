#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrl/agent.hpp"
#include "rrl/errors.hpp"
#include "rrl/net_io.hpp"

namespace rrl {

// A checkpoint is a directory holding the four network parameter blobs plus
// a manifest with the noise state and the RNG stream position. The replay
// buffer is excluded unless asked for.
inline void save_checkpoint(Agent& agent, const std::filesystem::path& dir,
                            bool include_buffer = false) {
    std::filesystem::create_directories(dir);
    save_net(agent.actor(), dir / "actor");
    save_net(agent.critic(), dir / "critic");
    save_net(agent.actor_target(), dir / "actor_target");
    save_net(agent.critic_target(), dir / "critic_target");

    nlohmann::json man;
    man["format"] = "RRL1";
    man["version"] = kBlobVersion;
    man["noise"] = {{"x", agent.noise().x()}, {"sigma", agent.noise().sigma()}};
    man["rng"] = agent.rng().state();
    man["buffer_included"] = include_buffer;
    std::ofstream ms(dir / "manifest.json");
    if (!ms)
        throw IoFailure("save_checkpoint: cannot write " +
                        (dir / "manifest.json").string());
    ms << man.dump(2) << "\n";

    if (include_buffer) {
        std::ofstream bs(dir / "buffer.bin", std::ios::binary);
        if (!bs)
            throw IoFailure("save_checkpoint: cannot write " +
                            (dir / "buffer.bin").string());
        bs.write(kBlobMagic, 4);
        const std::uint64_t n = agent.buffer().size();
        bs.write(reinterpret_cast<const char*>(&n), sizeof(n));
        for (std::size_t k = 0; k < n; ++k) {
            const Transition& t = agent.buffer()[k];
            const double row[8] = {t.s.pi_prev, t.s.belief_prev, t.s.m_prev,
                                   t.a,         t.r,
                                   t.s_next.pi_prev, t.s_next.belief_prev,
                                   t.s_next.m_prev};
            bs.write(reinterpret_cast<const char*>(row), sizeof(row));
        }
    }
}

// Restores an agent from `dir`. The network shapes must match what `cfg`
// prescribes; a mismatch is a configuration error, not a fallback.
inline Agent load_checkpoint(const std::filesystem::path& dir,
                             const AgentConfig& cfg) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream ms(manifest_path);
    if (!ms)
        throw IoFailure("load_checkpoint: cannot read " +
                        manifest_path.string());
    nlohmann::json man;
    try {
        ms >> man;
    } catch (const nlohmann::json::exception& e) {
        throw BadConfig("load_checkpoint: malformed manifest: " +
                        std::string(e.what()));
    }
    if (man.value("format", "") != "RRL1")
        throw BadConfig("load_checkpoint: " + manifest_path.string() +
                        " is not an RRL1 checkpoint manifest");

    Mlp actor = load_net(dir / "actor");
    Mlp critic = load_net(dir / "critic");
    Mlp actor_target = load_net(dir / "actor_target");
    Mlp critic_target = load_net(dir / "critic_target");

    auto check_shape = [](const Mlp& net, const std::vector<LayerSpec>& want,
                          const char* name) {
        const auto got = net.specs();
        bool ok = got.size() == want.size();
        for (std::size_t k = 0; ok && k < got.size(); ++k)
            ok = got[k].in == want[k].in && got[k].out == want[k].out &&
                 got[k].act == want[k].act;
        if (!ok)
            throw BadConfig(std::string("load_checkpoint: ") + name +
                            " architecture does not match the configured "
                            "network shape");
    };
    check_shape(actor, cfg.actor_specs(), "actor");
    check_shape(critic, cfg.critic_specs(), "critic");
    check_shape(actor_target, cfg.actor_specs(), "actor_target");
    check_shape(critic_target, cfg.critic_specs(), "critic_target");

    Agent agent(cfg, {std::move(actor), std::move(critic)}, 0);
    agent.set_targets(std::move(actor_target), std::move(critic_target));
    agent.noise().set_state(man.at("noise").at("x").get<double>(),
                            man.at("noise").at("sigma").get<double>());
    agent.rng().restore(man.at("rng").get<std::string>());

    if (man.value("buffer_included", false)) {
        std::ifstream bs(dir / "buffer.bin", std::ios::binary);
        if (!bs)
            throw IoFailure("load_checkpoint: manifest promises a buffer but " +
                            (dir / "buffer.bin").string() + " is unreadable");
        char magic[4];
        bs.read(magic, 4);
        std::uint64_t n = 0;
        bs.read(reinterpret_cast<char*>(&n), sizeof(n));
        if (!bs || std::memcmp(magic, kBlobMagic, 4) != 0)
            throw BadConfig("load_checkpoint: bad buffer blob header");
        for (std::uint64_t k = 0; k < n; ++k) {
            double row[8];
            bs.read(reinterpret_cast<char*>(row), sizeof(row));
            if (!bs) throw BadConfig("load_checkpoint: truncated buffer blob");
            Transition t;
            t.s = {row[0], row[1], row[2]};
            t.a = row[3];
            t.r = row[4];
            t.s_next = {row[5], row[6], row[7]};
            agent.buffer().push(t);
        }
    }
    return agent;
}

}  // namespace rrl
