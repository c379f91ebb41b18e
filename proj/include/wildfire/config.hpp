#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wildfire/agents.hpp"
#include "wildfire/fire.hpp"
#include "wildfire/frameworks.hpp"
#include "wildfire/lm.hpp"
#include "wildfire/terrain.hpp"

namespace wildfire {

// Missing keys keep the value already in the target, so partial documents
// override defaults.
void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);
void to_json(nlohmann::json& j, const FireConfig& c);
void from_json(const nlohmann::json& j, FireConfig& c);
void to_json(nlohmann::json& j, const KindParams& c);
void from_json(const nlohmann::json& j, KindParams& c);
void to_json(nlohmann::json& j, const AgentParams& c);
void from_json(const nlohmann::json& j, AgentParams& c);
void to_json(nlohmann::json& j, const FrameworkConfig& c);
void from_json(const nlohmann::json& j, FrameworkConfig& c);
void to_json(nlohmann::json& j, const HttpLmConfig& c);
void from_json(const nlohmann::json& j, HttpLmConfig& c);

struct LevelSelection
{
    std::string name;
    std::vector<std::uint64_t> seeds;

    friend bool operator==(const LevelSelection&, const LevelSelection&) = default;
};

struct HarnessConfig
{
    GenConfig gen;
    FireConfig fire;
    AgentParams agents;
    FrameworkConfig framework;
    std::string framework_name = "do_nothing";
    std::string lm = "mock:idle";
    HttpLmConfig http;
    std::vector<LevelSelection> levels; // defaults to every catalog row with its canonical seeds
    std::optional<int> max_steps;
    std::string out = "runs";

    // Throws std::invalid_argument on unknown levels, empty seed lists or bad sub-configs.
    void validate() const;

    friend bool operator==(const HarnessConfig&, const HarnessConfig&) = default;
};

HarnessConfig default_harness_config();
nlohmann::json config_to_json(const HarnessConfig& c);
HarnessConfig config_from_json(const nlohmann::json& j);
HarnessConfig load_config(const std::string& path);

} // namespace wildfire
