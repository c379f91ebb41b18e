#include "wildfire/translator.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>
#include <sstream>

#include <json.hpp>

namespace wildfire {

namespace {

CatalogRow coord_row(int code, PrimitiveKind p, std::string title, Action example)
{
    return {code, p, ParamUse::Coordinate, std::move(title), "x coordinate of location", "y coordinate of location",
            std::move(example)};
}

CatalogRow plain_row(int code, PrimitiveKind p, std::string title, std::string example_desc)
{
    return {code, p, ParamUse::None, std::move(title), "not used, set to 0", "not used, set to 0",
            Action{code, 0, 0, std::move(example_desc)}};
}

ActionCatalog make_default_catalog()
{
    ActionCatalog c;
    c.firefighter = {
        coord_row(1, PrimitiveKind::MoveToLocation,
                  "Move to any coordinate location in one step regardless of distance",
                  {1, 500, 500, "move to coordinate location of (500, 500)"}),
        {2, PrimitiveKind::CutXTrees, ParamUse::Count, "Cut X trees in the current cell", "number of trees to cut",
         "not used, set to 0", Action{2, 2, 0, "cut 2 trees in current cell"}},
        plain_row(3, PrimitiveKind::CutAllTrees, "Cut all trees in the current cell", "cut all trees in current cell"),
        plain_row(4, PrimitiveKind::PickUpCivilian, "Pick up the closest civilian", "pick up civilian"),
        plain_row(5, PrimitiveKind::DropOffCivilian, "Drop off the carried civilian in the current cell",
                  "drop off civilian"),
        coord_row(6, PrimitiveKind::SprayWaterCone, "Spray a cone of water toward a target location",
                  {6, 12, 7, "spray water toward (12, 7)"}),
        plain_row(7, PrimitiveKind::RefillWater, "Refill water when next to a water cell", "refill water"),
    };
    c.bulldozer = {
        coord_row(1, PrimitiveKind::DriveNoCut, "Drive to any coordinate location with the plow raised",
                  {1, 40, 25, "drive to (40, 25) without cutting"}),
        coord_row(2, PrimitiveKind::DriveClearPath,
                  "Drive to any coordinate location with the plow lowered, clearing every cell on the way",
                  {2, 40, 25, "drive to (40, 25) clearing a path"}),
    };
    c.drone = {
        coord_row(1, PrimitiveKind::FlyToLocation, "Fly to any coordinate location",
                  {1, 80, 15, "fly to (80, 15)"}),
    };
    c.helicopter = {
        coord_row(1, PrimitiveKind::FlyToLocation, "Fly to any coordinate location",
                  {1, 80, 15, "fly to (80, 15)"}),
        plain_row(2, PrimitiveKind::PickUpFirefighters, "Load the firefighters next to you", "pick up firefighters"),
        plain_row(3, PrimitiveKind::DropOffFirefighters, "Unload all carried firefighters in the current cell",
                  "drop off firefighters"),
        plain_row(4, PrimitiveKind::RefillWater, "Refill the water tank when next to a water cell", "refill water"),
        plain_row(5, PrimitiveKind::DropWater, "Drop one water payload on the current location", "drop water"),
    };
    return c;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view param_use_name(ParamUse p)
{
    switch (p) {
    case ParamUse::None: return "none";
    case ParamUse::Coordinate: return "coordinate";
    case ParamUse::Count: return "count";
    }
    return "none";
}

ParamUse parse_param_use(std::string_view s)
{
    if (s == "coordinate") return ParamUse::Coordinate;
    if (s == "count") return ParamUse::Count;
    if (s == "none") return ParamUse::None;
    throw std::invalid_argument("bad parameter use: " + std::string(s));
}

} // namespace

const std::vector<CatalogRow>& ActionCatalog::rows(AgentKind k) const noexcept
{
    switch (k) {
    case AgentKind::Firefighter: return firefighter;
    case AgentKind::Bulldozer: return bulldozer;
    case AgentKind::Drone: return drone;
    case AgentKind::Helicopter: return helicopter;
    }
    return firefighter;
}

const CatalogRow* ActionCatalog::find(AgentKind k, int code) const noexcept
{
    for (const auto& r : rows(k)) {
        if (r.code == code) return &r;
    }
    return nullptr;
}

const CatalogRow* ActionCatalog::find(AgentKind k, PrimitiveKind p) const noexcept
{
    for (const auto& r : rows(k)) {
        if (r.primitive == p) return &r;
    }
    return nullptr;
}

const ActionCatalog& default_catalog()
{
    static const ActionCatalog catalog = make_default_catalog();
    return catalog;
}

std::string catalog_to_tsv(const ActionCatalog& catalog)
{
    std::string out = "kind\tcode\tprimitive\tparams\ttitle\tparam1\tparam2\texample\n";
    for (auto k : kAllAgentKinds) {
        for (const auto& r : catalog.rows(k)) {
            out += std::string(kind_name(k)) + "\t" + std::to_string(r.code) + "\t" +
                   std::string(primitive_name(r.primitive)) + "\t" + std::string(param_use_name(r.params)) + "\t" +
                   r.title + "\t" + r.param1 + "\t" + r.param2 + "\t" + format_action(r.example) + "\n";
        }
    }
    return out;
}

ActionCatalog catalog_from_tsv(std::string_view text)
{
    ActionCatalog c;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find('\t', start)) != std::string::npos; start = pos + 1) {
            f.push_back(line.substr(start, pos - start));
        }
        f.push_back(line.substr(start));
        if (f.size() != 8) throw std::invalid_argument("catalog line needs 8 fields: " + line);
        CatalogRow r;
        const auto kind = parse_kind(f[0]);
        r.code = std::stoi(f[1]);
        const auto prim = parse_primitive_name(f[2]);
        if (!prim) throw std::invalid_argument("unknown primitive in catalog: " + f[2]);
        r.primitive = *prim;
        r.params = parse_param_use(f[3]);
        r.title = f[4];
        r.param1 = f[5];
        r.param2 = f[6];
        r.example = parse_structured_action(f[7]);
        switch (kind) {
        case AgentKind::Firefighter: c.firefighter.push_back(r); break;
        case AgentKind::Bulldozer: c.bulldozer.push_back(r); break;
        case AgentKind::Drone: c.drone.push_back(r); break;
        case AgentKind::Helicopter: c.helicopter.push_back(r); break;
        }
    }
    return c;
}

std::optional<AgentKind> kind_from_catalog_size(std::size_t n, const ActionCatalog& catalog)
{
    for (auto k : kAllAgentKinds) {
        if (catalog.rows(k).size() == n) return k;
    }
    return std::nullopt;
}

namespace {

constexpr std::string_view kActionMarker = "Here is the action we want to perform\n\n";
constexpr std::string_view kAfterAction = "\n\nYour job is to convert the action into an executable format.";

} // namespace

std::string build_translation_prompt(std::string_view action_text, AgentKind kind, const ActionCatalog& catalog)
{
    const auto& rows = catalog.rows(kind);
    std::string p;
    p += "You are the controller of a highly trained agent within a grid forest world.\n";
    p += "Your job is to convert a single text action into a structured format for robotic control.\n\n";
    p += kActionMarker;
    p += action_text;
    p += kAfterAction;
    p += " Do not change the actions, just translate them.\n\n";
    p += "This is the executable action format:\n\n";
    p += "Action{\n";
    p += "    int \"type\": type of action being performed\n";
    p += "    int \"param 1\": parameter 1 of action if applicable\n";
    p += "    int \"param 2\": parameter 2 of action if applicable\n";
    p += "    string \"description\": description of action\n";
    p += "}\n\n";
    p += "You have " + std::to_string(rows.size()) + " distinct types of actions. You MUST choose one of them:\n";
    for (const auto& r : rows) {
        p += "\n    " + std::to_string(r.code) + ". " + r.title + ":\n\n";
        p += "        \"type\": " + std::to_string(r.code) + "\n";
        p += "        \"param 1\": " + r.param1 + "\n";
        p += "        \"param 2\": " + r.param2 + "\n";
        p += "        \"description\": description of action\n\n";
        p += "        Example Action:\n";
        p += "        " + format_action(r.example) + "\n";
    }
    return p;
}

std::string translation_prompt_action(std::string_view prompt)
{
    const auto a = prompt.find(kActionMarker);
    if (a == std::string_view::npos) return {};
    const auto start = a + kActionMarker.size();
    const auto b = prompt.find(kAfterAction, start);
    if (b == std::string_view::npos) return {};
    return std::string(prompt.substr(start, b - start));
}

std::string format_action(const Action& a)
{
    std::string desc;
    for (char ch : a.description) {
        if (ch == '"' || ch == '\\') desc.push_back('\\');
        desc.push_back(ch);
    }
    return "[" + std::to_string(a.type) + ", " + std::to_string(a.param1) + ", " + std::to_string(a.param2) + ", \"" +
           desc + "\"]";
}

namespace {

struct Field
{
    bool is_int = false;
    long long value = 0;
    std::string text;
};

class BracketParser
{
  public:
    BracketParser(std::string_view s, std::size_t pos) : s_(s), i_(pos) {}

    // Fills fields on success; returns an error string otherwise.
    std::string run(std::vector<Field>& fields)
    {
        ++i_; // '['
        skip_ws();
        if (peek() == ']') return "empty brackets";
        while (true) {
            Field f;
            if (auto err = field(f); !err.empty()) return err;
            fields.push_back(std::move(f));
            skip_ws();
            if (peek() == ',') {
                ++i_;
                skip_ws();
                continue;
            }
            if (peek() == ']') return {};
            return "malformed list";
        }
    }

  private:
    char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
    void skip_ws()
    {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    std::string field(Field& f)
    {
        const char c = peek();
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            const auto* begin = s_.data() + i_;
            const auto* end = s_.data() + s_.size();
            auto [ptr, ec] = std::from_chars(begin, end, f.value);
            if (ec != std::errc{}) return "bad integer";
            i_ += static_cast<std::size_t>(ptr - begin);
            f.is_int = true;
            return {};
        }
        if (c == '"' || c == '\'') return quoted(f, c);
        if (c == '`' && i_ + 1 < s_.size() && s_[i_ + 1] == '`') {
            i_ += 2;
            const auto end = s_.find("''", i_);
            if (end == std::string_view::npos) return "unterminated string";
            f.text = std::string(s_.substr(i_, end - i_));
            i_ = end + 2;
            return {};
        }
        return "unexpected token";
    }

    std::string quoted(Field& f, char q)
    {
        ++i_;
        while (i_ < s_.size()) {
            const char ch = s_[i_++];
            if (ch == '\\' && i_ < s_.size()) {
                f.text.push_back(s_[i_++]);
                continue;
            }
            if (ch == q) {
                // A single quote inside a word is an apostrophe, not a terminator.
                if (q == '\'' && i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) {
                    f.text.push_back(ch);
                    continue;
                }
                return {};
            }
            f.text.push_back(ch);
        }
        return "unterminated string";
    }

    std::string_view s_;
    std::size_t i_;
};

std::optional<Action> from_fields(const std::vector<Field>& f, std::string& err)
{
    if (f.size() != 4) {
        err = "expected 4 fields [type, param 1, param 2, description], found " + std::to_string(f.size());
        return std::nullopt;
    }
    if (!f[0].is_int || !f[1].is_int || !f[2].is_int) {
        err = "type and parameters must be integers";
        return std::nullopt;
    }
    if (f[3].is_int) {
        err = "description must be a string";
        return std::nullopt;
    }
    return Action{static_cast<int>(f[0].value), static_cast<int>(f[1].value), static_cast<int>(f[2].value), f[3].text};
}

std::optional<Action> from_json_object(std::string_view text, std::size_t pos)
{
    int depth = 0;
    for (std::size_t j = pos; j < text.size(); ++j) {
        if (text[j] == '{') ++depth;
        if (text[j] == '}' && --depth == 0) {
            const auto obj = nlohmann::json::parse(text.substr(pos, j - pos + 1), nullptr, false);
            if (obj.is_discarded() || !obj.is_object()) return std::nullopt;
            auto get_int = [&](std::initializer_list<const char*> keys) -> std::optional<int> {
                for (const char* k : keys) {
                    if (obj.contains(k) && obj[k].is_number_integer()) return obj[k].get<int>();
                }
                return std::nullopt;
            };
            const auto type = get_int({"type"});
            const auto p1 = get_int({"param 1", "param1", "param_1"});
            const auto p2 = get_int({"param 2", "param2", "param_2"});
            if (!type || !p1 || !p2 || !obj.contains("description") || !obj["description"].is_string()) {
                return std::nullopt;
            }
            return Action{*type, *p1, *p2, obj["description"].get<std::string>()};
        }
    }
    return std::nullopt;
}

} // namespace

Action parse_structured_action(std::string_view text)
{
    std::string first_error;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '[') {
            std::vector<Field> fields;
            BracketParser parser(text, i);
            std::string err = parser.run(fields);
            if (err.empty()) {
                if (auto a = from_fields(fields, err)) return *a;
            }
            if (first_error.empty() && !fields.empty()) first_error = err;
        } else if (text[i] == '{') {
            if (auto a = from_json_object(text, i)) return *a;
        }
    }
    if (first_error.empty()) first_error = "no structured action found";
    throw ParseError(first_error, std::string(text));
}

std::string validate_action(const Action& a, AgentKind kind, Bounds bounds, const ActionCatalog& catalog)
{
    const auto* row = catalog.find(kind, a.type);
    if (!row) {
        return "type " + std::to_string(a.type) + " is not an action of a " + std::string(kind_name(kind)) +
               "; valid types are 1 to " + std::to_string(catalog.rows(kind).size());
    }
    switch (row->params) {
    case ParamUse::Coordinate:
        if (a.param1 < 0 || a.param2 < 0 || a.param1 >= bounds.width || a.param2 >= bounds.height) {
            return "location (" + std::to_string(a.param1) + ", " + std::to_string(a.param2) +
                   ") is outside the map; x must be in [0, " + std::to_string(bounds.width - 1) + "] and y in [0, " +
                   std::to_string(bounds.height - 1) + "]";
        }
        break;
    case ParamUse::Count:
        if (a.param1 < 1) return "tree count must be at least 1";
        break;
    case ParamUse::None: break;
    }
    return {};
}

Primitive to_primitive(const Action& a, AgentKind kind, const ActionCatalog& catalog)
{
    const auto* row = catalog.find(kind, a.type);
    if (!row) throw std::invalid_argument("action type not in catalog");
    Primitive p{row->primitive, 0, 0};
    if (row->params == ParamUse::Coordinate) {
        p.p1 = a.param1;
        p.p2 = a.param2;
    } else if (row->params == ParamUse::Count) {
        p.p1 = a.param1;
    }
    return p;
}

Action from_primitive(const Primitive& p, AgentKind kind, const ActionCatalog& catalog)
{
    const auto* row = catalog.find(kind, p.kind);
    if (!row) throw std::invalid_argument("primitive not available to this agent kind");
    Action a{row->code, 0, 0, lower(describe(p))};
    if (row->params == ParamUse::Coordinate) {
        a.param1 = p.p1;
        a.param2 = p.p2;
    } else if (row->params == ParamUse::Count) {
        a.param1 = p.p1;
    }
    return a;
}

Translation translate(LanguageModel& lm, std::string_view action_text, AgentKind kind, Bounds bounds,
                      int max_retries, const ActionCatalog& catalog, std::vector<TranslationCall>* transcript)
{
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    const std::string base = build_translation_prompt(action_text, kind, catalog);
    Translation result;
    std::string prompt = base;
    std::string last_error;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        TranslationCall call;
        call.prompt = prompt;
        call.output = lm.complete(prompt, CallPurpose::Translate).text;
        try {
            const Action a = parse_structured_action(call.output);
            call.error = validate_action(a, kind, bounds, catalog);
            if (call.error.empty()) {
                result.action = a;
                result.primitive = to_primitive(a, kind, catalog);
                result.calls.push_back(call);
                if (transcript) transcript->push_back(std::move(call));
                return result;
            }
        } catch (const ParseError& e) {
            call.error = e.what();
        }
        last_error = call.error;
        prompt = base + "\nYour previous answer was:\n" + call.output + "\nIt was rejected: " + call.error +
                 ".\nAnswer again with exactly one action in the format [type, param 1, param 2, \"description\"].\n";
        result.calls.push_back(call);
        if (transcript) transcript->push_back(std::move(call));
    }
    throw TranslationFailed("translation failed after " + std::to_string(max_retries + 1) + " calls: " + last_error,
                            max_retries + 1);
}

bool is_idle_text(std::string_view text)
{
    std::string t = lower(trim(text));
    while (!t.empty() && (t.front() == '\'' || t.front() == '"' || t.front() == '`')) t.erase(t.begin());
    while (!t.empty() && (t.back() == '\'' || t.back() == '"' || t.back() == '.' || t.back() == '`')) t.pop_back();
    t = std::string(trim(t));
    return t.empty() || t == "wait" || t == "no action" || t == "noaction" || t == "none" || t == "idle" ||
           t.rfind("do nothing", 0) == 0;
}

std::optional<Primitive> primitive_from_text(std::string_view text, AgentKind kind)
{
    const std::string t = lower(text);
    static const std::regex coord_re(R"(\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\))");
    static const std::regex count_re(R"(cut\s+(\d+)\s+trees?)");
    std::smatch m;
    std::optional<Cell> at;
    if (std::regex_search(t, m, coord_re)) at = Cell{std::stoi(m[1].str()), std::stoi(m[2].str())};
    auto has = [&](std::string_view w) { return t.find(w) != std::string::npos; };

    std::optional<Primitive> p;
    if (has("cut all")) {
        p = Primitive{PrimitiveKind::CutAllTrees, 0, 0};
    } else if (std::regex_search(t, m, count_re)) {
        p = Primitive{PrimitiveKind::CutXTrees, std::stoi(m[1].str()), 0};
    } else if (has("pick up civilian") || has("pick up the civilian")) {
        p = Primitive{PrimitiveKind::PickUpCivilian, 0, 0};
    } else if (has("drop off civilian") || has("drop off the civilian")) {
        p = Primitive{PrimitiveKind::DropOffCivilian, 0, 0};
    } else if (has("pick up firefighter")) {
        p = Primitive{PrimitiveKind::PickUpFirefighters, 0, 0};
    } else if (has("drop off firefighter")) {
        p = Primitive{PrimitiveKind::DropOffFirefighters, 0, 0};
    } else if (has("spray") && at) {
        p = Primitive{PrimitiveKind::SprayWaterCone, at->x, at->y};
    } else if (has("drop water")) {
        p = Primitive{PrimitiveKind::DropWater, 0, 0};
    } else if (has("refill")) {
        p = Primitive{PrimitiveKind::RefillWater, 0, 0};
    } else if (at && (has("clearing") || has("clear path") || has("plow lowered"))) {
        p = Primitive{PrimitiveKind::DriveClearPath, at->x, at->y};
    } else if (at && has("drive")) {
        p = Primitive{PrimitiveKind::DriveNoCut, at->x, at->y};
    } else if (at && (has("move") || has("go to") || has("fly") || has("head") || has("travel"))) {
        PrimitiveKind k = PrimitiveKind::MoveToLocation;
        if (kind == AgentKind::Bulldozer) k = PrimitiveKind::DriveNoCut;
        if (is_air(kind)) k = PrimitiveKind::FlyToLocation;
        p = Primitive{k, at->x, at->y};
    }
    if (!p || !allowed_for(kind, p->kind)) return std::nullopt;
    return p;
}

} // namespace wildfire
