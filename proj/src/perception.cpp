#include "wildfire/perception.hpp"

#include <algorithm>

namespace wildfire {

std::string Minimap::render() const
{
    std::string out;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        if (r > 0) out.push_back('\n');
        for (std::size_t c = 0; c < cells[r].size(); ++c) {
            if (c > 0) out.push_back(' ');
            out += cells[r][c];
        }
    }
    return out;
}

char perceived_char(const WorldMap& world, std::size_t i)
{
    if (world.visible_now(i)) return ground_truth_char(world, i);
    if (!world.revealed[i]) return '-';
    switch (world.land[i]) {
    case LandType::Water: return 'w';
    case LandType::Building: return 'B';
    default: return static_cast<char>('0' + std::min<int>(world.known_trees[i], 9));
    }
}

Minimap encode_minimap(const WorldMap& world, const Agent& agent, const std::vector<Agent>& all)
{
    Minimap mm;
    const int r = agent.vision_radius;
    mm.self = agent.pos;
    mm.x0 = std::max(0, agent.pos.x - r);
    mm.x1 = std::min(world.width - 1, agent.pos.x + r);
    mm.y0 = std::max(0, agent.pos.y - r);
    mm.y1 = std::min(world.height - 1, agent.pos.y + r);
    for (int y = mm.y0; y <= mm.y1; ++y) {
        auto& row = mm.cells.emplace_back();
        for (int x = mm.x0; x <= mm.x1; ++x) {
            const auto i = world.index({x, y});
            const bool self = Cell{x, y} == agent.pos;
            const bool live = self || world.visible_now(i);
            std::string cell(1, live ? ground_truth_char(world, i) : perceived_char(world, i));
            if (live && world.wet[i] > 0) cell = "'" + cell + "'";
            if (self) cell = "*" + cell + "*";
            row.push_back(std::move(cell));
        }
    }
    for (const auto& other : all) {
        if (other.id == agent.id || !other.alive) continue;
        if (chebyshev(other.pos, agent.pos) > r) continue;
        mm.nearby.push_back({other.id, other.kind, other.pos});
    }
    return mm;
}

std::string describe_cell(const WorldMap& world, Cell c)
{
    const auto i = world.index(c);
    std::string out;
    switch (world.land[i]) {
    case LandType::Water: out = "water source"; break;
    case LandType::Building: out = "building"; break;
    case LandType::Rock: out = "rock"; break;
    case LandType::Brush: out = "brush"; break;
    case LandType::LightForest: out = "light forest"; break;
    case LandType::MediumForest: out = "medium forest"; break;
    case LandType::DenseForest: out = "dense forest"; break;
    }
    const int trees = world.trees[i];
    out += trees == 0 ? " (no trees)" : trees == 1 ? " (1 tree)" : " (" + std::to_string(trees) + " trees)";
    switch (world.fire[i]) {
    case FireState::Ignited: out += ", ignited"; break;
    case FireState::Burning: out += ", on fire"; break;
    case FireState::Extinguishing: out += ", extinguishing"; break;
    case FireState::Extinguished: out += ", fully extinguished"; break;
    case FireState::None: break;
    }
    if (world.wet[i] > 0) out += ", wet";
    return out;
}

std::string build_perception_prompt(const Agent& agent, const Minimap& mm, const WorldMap& world)
{
    const std::string pos = to_string(agent.pos);
    std::string p;
    p += "You are " + agent.name() + ", and your current location is " + pos +
         ", and thus your minimap view will be the range X:[" + std::to_string(mm.x0) + "-" + std::to_string(mm.x1) +
         "], Y:[" + std::to_string(mm.y0) + "-" + std::to_string(mm.y1) +
         "] with the top corner of the map being (0,0).\n\n";
    p += "This is your minimap view:\n\n";
    p += mm.render() + "\n\n";
    p += "Each cell is represented by a character corresponding to the type of terrain:\n";
    p += "0: brush (no trees)\n";
    p += "1: light forest (1 tree)\n";
    p += "2: medium forest (2 trees)\n";
    p += "3: dense forest (3 trees)\n";
    p += "i: Ignited\n";
    p += "f: On Fire\n";
    p += "e: Extinguishing\n";
    p += "x: Fully Extinguished\n";
    p += "w: Water Source Cell (no trees)\n";
    p += "B: building (no trees)\n\n";
    p += "IGNORE ALL \"-\". Those are unrevealed cells. They will reveal themselves when you get closer to them.\n\n";
    p += "The cells in single quotations are wet cells. 'C' cells are civilians.\n\n";
    p += "The bolded cell is shown wrapped in asterisks, for example *2*.\n\n";
    p += "The bolded cell is the current cell you are in. It is a " + describe_cell(world, agent.pos) + " cell at " +
         pos + ". There are other nearby agents at:\n\n";
    if (mm.nearby.empty()) {
        p += "none\n\n";
    } else {
        for (const auto& n : mm.nearby) {
            p += "AGENT_" + std::to_string(n.id) + " (" + std::string(kind_name(n.kind)) + ") at " + to_string(n.pos) +
                 "\n";
        }
        p += "\n";
    }
    p += "Your job is to process and understand your surroundings.\n";
    p += "Do not directly report explicit information from the minimap, but rather spatially understand your "
         "surroundings.\n";
    p += "Do not refer to character representations of the minimap, only what they actually represent.\n";
    p += "Report general observations in general directions.\n";
    p += "Also report if there are specific cells of interest, such as fires, civilians, water, etc.\n";
    p += "If there are any, calculate their exact locations by explicitly counting cells.\n";
    p += "You should return a detailed but concise text summary paragraph of all relevant information, including "
         "location, surroundings, and presence of important cells.\n";
    return p;
}

Perception perceive(LanguageModel& lm, const Agent& agent, const WorldMap& world, const std::vector<Agent>& all)
{
    Perception out;
    out.prompt = build_perception_prompt(agent, encode_minimap(world, agent, all), world);
    auto c = lm.complete(out.prompt, CallPurpose::Perception);
    out.text = std::move(c.text);
    out.input_tokens = c.input_tokens;
    out.output_tokens = c.output_tokens;
    return out;
}

} // namespace wildfire
