#pragma once

// Agent checkpoints: JSON with parameter blocks stored as base64 of
// little-endian 64-bit floats.

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <json.hpp>

#include "rlvqsd/ddqn.hpp"

namespace rlvqsd {

inline constexpr const char* kCheckpointFormat = "rlvqsd-checkpoint";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline std::string base64_encode(const std::string& bytes) {
    using namespace boost::archive::iterators;
    using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
    std::string out(It(bytes.begin()), It(bytes.end()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

inline std::string base64_decode(std::string text) {
    using namespace boost::archive::iterators;
    using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
    if (text.size() % 4 != 0) throw std::invalid_argument("base64 length is not a multiple of 4");
    std::size_t pad = 0;
    while (!text.empty() && text.back() == '=') {
        text.pop_back();
        ++pad;
    }
    if (pad > 2) throw std::invalid_argument("bad base64 padding");
    for (char ch : text)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '+' || ch == '/')) throw std::invalid_argument("bad base64 character");
    text.append(pad, 'A');
    std::string out(It(text.begin()), It(text.end()));
    out.resize(out.size() - pad);
    return out;
}

inline std::string encode_doubles(const std::vector<double>& v) {
    std::string bytes(v.size() * 8, '\0');
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint64_t u = std::bit_cast<std::uint64_t>(v[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>((u >> (8 * b)) & 0xff);
    }
    return base64_encode(bytes);
}

inline std::vector<double> decode_doubles(const std::string& text) {
    const std::string bytes = base64_decode(text);
    if (bytes.size() % 8 != 0) throw std::invalid_argument("parameter block is not a whole number of doubles");
    std::vector<double> v(bytes.size() / 8);
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= std::uint64_t{static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(b)])} << (8 * b);
        v[i] = std::bit_cast<double>(u);
    }
    return v;
}

}  // namespace detail

/// Networks, Adam moments, exploration state, counters and RNG state. The
/// replay buffer is not saved.
inline nlohmann::json save_checkpoint(DdqnAgent& agent) {
    std::ostringstream rng;
    rng << agent.rng();
    const auto& adam = agent.adam();
    return {{"format", kCheckpointFormat},
            {"version", kCheckpointVersion},
            {"layer_sizes", agent.policy().layer_sizes()},
            {"policy", detail::encode_doubles(agent.policy().params())},
            {"target", detail::encode_doubles(agent.target().params())},
            {"adam",
             {{"learning_rate", adam.learning_rate},
              {"beta1", adam.beta1},
              {"beta2", adam.beta2},
              {"eps", adam.eps},
              {"t", adam.t},
              {"m", detail::encode_doubles(adam.m)},
              {"v", detail::encode_doubles(adam.v)}}},
            {"epsilon", agent.epsilon()},
            {"actions", agent.actions_taken()},
            {"updates", agent.updates()},
            {"rng", rng.str()}};
}

/// Restores a checkpoint into an agent of the same architecture.
inline void load_checkpoint(const nlohmann::json& j, DdqnAgent& agent) {
    if (j.at("format") != kCheckpointFormat) throw std::invalid_argument("not an rlvqsd checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) throw std::invalid_argument("unsupported checkpoint version");
    if (j.at("layer_sizes").get<std::vector<std::size_t>>() != agent.policy().layer_sizes())
        throw std::invalid_argument("checkpoint architecture differs from the agent");
    auto policy = detail::decode_doubles(j.at("policy").get<std::string>());
    auto target = detail::decode_doubles(j.at("target").get<std::string>());
    if (policy.size() != agent.policy().params().size() || target.size() != policy.size())
        throw std::invalid_argument("checkpoint parameter count mismatch");
    const auto& ja = j.at("adam");
    Adam adam;
    adam.learning_rate = ja.at("learning_rate").get<double>();
    adam.beta1 = ja.at("beta1").get<double>();
    adam.beta2 = ja.at("beta2").get<double>();
    adam.eps = ja.at("eps").get<double>();
    adam.t = ja.at("t").get<std::size_t>();
    adam.m = detail::decode_doubles(ja.at("m").get<std::string>());
    adam.v = detail::decode_doubles(ja.at("v").get<std::string>());
    if (adam.m.size() != adam.v.size() || (!adam.m.empty() && adam.m.size() != policy.size()))
        throw std::invalid_argument("checkpoint Adam moments have the wrong size");
    std::istringstream rng(j.at("rng").get<std::string>());
    Rng restored;
    rng >> restored;
    if (rng.fail()) throw std::invalid_argument("checkpoint RNG state is malformed");

    agent.policy().params() = std::move(policy);
    agent.target().params() = std::move(target);
    agent.adam() = std::move(adam);
    agent.set_epsilon(j.at("epsilon").get<double>());
    agent.set_counters(j.at("actions").get<std::size_t>(), j.at("updates").get<std::size_t>());
    agent.rng() = restored;
}

}  // namespace rlvqsd
