#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wildfire/levels.hpp"
#include "wildfire/lm.hpp"
#include "wildfire/simulation.hpp"

namespace wildfire {

enum class FrameworkKind : std::uint8_t
{
    DoNothing,
    Camon,
    Coela,
    Embodied,
    Hmas2,
};

std::string_view framework_name(FrameworkKind k);
FrameworkKind parse_framework(std::string_view s);

struct FrameworkConfig
{
    int embodied_rounds = 1;     // communication rounds C
    int hmas_iteration_cap = 3;  // plan/review rounds per step
    int hmas_history_window = 5; // steps of StepHistory shown to the planner
    int max_retries = 2;         // translator re-prompts and LM transport retries
    unsigned lm_threads = 1;     // concurrent calls within one phase
    unsigned fire_threads = 1;
    bool log_prompts = true;

    friend bool operator==(const FrameworkConfig&, const FrameworkConfig&) = default;
};

// Tag parsing for plan markup.
struct TaggedText
{
    int agent = 0; // 0 for GLOBAL
    std::string text;
};

// First <name>...</name> body, trimmed and unquoted; empty when missing.
std::string extract_tag(std::string_view text, std::string_view name);

// <AGENT_3-action>...</AGENT_3-action> style tags; suffix is "action" or "message".
// The closing tag may omit the slash. AGENT_3, AGENT 3 and AGENT3 all match.
std::vector<TaggedText> extract_agent_tags(std::string_view text, std::string_view suffix);

// <AGENT_3>...</AGENT_3> and, when include_global, <GLOBAL>...</GLOBAL>.
std::vector<TaggedText> extract_recipient_tags(std::string_view text, bool include_global);

std::string strip_quotes(std::string_view s);

// Per-step record accumulated while the framework runs.
struct CallRecord
{
    int agent = 0;
    CallPurpose purpose = CallPurpose::Action;
    std::string prompt;
    std::string output;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

struct StepRecord
{
    std::int64_t t = 0;
    std::vector<Assignment> assignments;
    std::vector<CallRecord> calls;
    std::vector<std::string> messages;
    std::vector<std::string> notes;
    EventList events;
    FireDelta fire;
    Score score;
    TelemetrySnapshot telemetry; // this step only
    std::string digest;
};

struct EpisodeResult
{
    Score final_score;
    TerminationReason reason = TerminationReason::None;
    std::int64_t steps = 0;
    TelemetrySnapshot telemetry;
    bool op_precondition = false;
    bool aborted = false;
    std::string abort_reason;
    std::uint64_t log_digest = 0; // over every serialized log line
    std::vector<TelemetrySnapshot> per_step;
};

// World + agents digest, the value checked by replay.
std::uint64_t state_digest(const WorldMap& world, const std::vector<Agent>& agents);

class RunLogWriter
{
  public:
    explicit RunLogWriter(std::ostream* out) : out_(out) {}
    void write(const nlohmann::json& record);
    std::uint64_t digest() const noexcept { return digest_.value(); }

  private:
    std::ostream* out_;
    Digest digest_;
};

nlohmann::json header_record(FrameworkKind fw, const Episode& ep, std::string_view lm, const FrameworkConfig& cfg);
nlohmann::json step_record(const StepRecord& s, bool log_prompts);
nlohmann::json footer_record(const EpisodeResult& r);

// Runs a framework until the level terminates, writing the RunLog when
// `log` is non-null.
EpisodeResult run_episode(FrameworkKind fw, Episode& ep, LanguageModel* lm, const FrameworkConfig& cfg,
                          std::ostream* log = nullptr, std::string_view lm_spec = "none");

struct ReplayReport
{
    std::int64_t steps = 0;
    std::int64_t verified = 0;
    std::vector<std::string> mismatches;
    bool footer_ok = false;

    bool ok() const noexcept { return mismatches.empty() && footer_ok && verified == steps; }
};

// Rebuilds the level from the header and reapplies recorded assignments.
ReplayReport replay_log(std::istream& log);

} // namespace wildfire
