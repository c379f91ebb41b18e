#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wildfire/agents.hpp"
#include "wildfire/lm.hpp"

namespace wildfire {

struct Action
{
    int type = 0;
    int param1 = 0;
    int param2 = 0;
    std::string description;

    friend bool operator==(const Action&, const Action&) = default;
};

enum class ParamUse : std::uint8_t
{
    None,
    Coordinate, // param1 = x, param2 = y
    Count,      // param1 = positive count, param2 unused
};

struct CatalogRow
{
    int code = 0;
    PrimitiveKind primitive = PrimitiveKind::Wait;
    ParamUse params = ParamUse::None;
    std::string title;
    std::string param1;
    std::string param2;
    Action example;
};

struct ActionCatalog
{
    std::vector<CatalogRow> firefighter;
    std::vector<CatalogRow> bulldozer;
    std::vector<CatalogRow> drone;
    std::vector<CatalogRow> helicopter;

    const std::vector<CatalogRow>& rows(AgentKind k) const noexcept;
    const CatalogRow* find(AgentKind k, int code) const noexcept;
    const CatalogRow* find(AgentKind k, PrimitiveKind p) const noexcept;
};

const ActionCatalog& default_catalog();

// Tab-separated form: kind, code, primitive, params, title, param1, param2, example.
std::string catalog_to_tsv(const ActionCatalog& catalog);
ActionCatalog catalog_from_tsv(std::string_view text);

// Inverse of rows(k).size(); the four kinds have distinct row counts.
std::optional<AgentKind> kind_from_catalog_size(std::size_t n, const ActionCatalog& catalog = default_catalog());

std::string build_translation_prompt(std::string_view action_text, AgentKind kind,
                                     const ActionCatalog& catalog = default_catalog());

// Bracketed form [type, p1, p2, "description"].
std::string format_action(const Action& a);

class ParseError : public std::runtime_error
{
  public:
    ParseError(const std::string& what, std::string raw) : std::runtime_error(what), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

  private:
    std::string raw_;
};

// Accepts the bracketed form or a keyed JSON object anywhere in the text.
Action parse_structured_action(std::string_view text);

struct Bounds
{
    int width = 0;
    int height = 0;
};

// Empty string when valid, otherwise the reason.
std::string validate_action(const Action& a, AgentKind kind, Bounds bounds,
                            const ActionCatalog& catalog = default_catalog());

Primitive to_primitive(const Action& a, AgentKind kind, const ActionCatalog& catalog = default_catalog());
Action from_primitive(const Primitive& p, AgentKind kind, const ActionCatalog& catalog = default_catalog());

class TranslationFailed : public std::runtime_error
{
  public:
    TranslationFailed(const std::string& what, int calls) : std::runtime_error(what), calls_(calls) {}
    int calls() const noexcept { return calls_; }

  private:
    int calls_;
};

struct TranslationCall
{
    std::string prompt;
    std::string output;
    std::string error; // empty when this output was accepted
};

struct Translation
{
    Action action;
    Primitive primitive;
    std::vector<TranslationCall> calls;
};

// Prompts, parses and validates; on failure re-prompts with the error appended.
// At most max_retries + 1 calls. Throws TranslationFailed when all fail.
Translation translate(LanguageModel& lm, std::string_view action_text, AgentKind kind, Bounds bounds,
                      int max_retries, const ActionCatalog& catalog = default_catalog(),
                      std::vector<TranslationCall>* transcript = nullptr);

// Text the agent wants to idle with ("do nothing", "wait", ...).
bool is_idle_text(std::string_view text);

// Parses the canonical primitive descriptions produced by describe(), plus a
// few loose movement phrasings ("move towards (x, y)").
std::optional<Primitive> primitive_from_text(std::string_view text, AgentKind kind);

// Action text in a translation prompt, between the fixed markers.
std::string translation_prompt_action(std::string_view prompt);

} // namespace wildfire
