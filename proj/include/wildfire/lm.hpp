#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wildfire {

struct Episode;

enum class CallPurpose : std::uint8_t
{
    Perception,
    Message,
    Action,
    Translate,
    Plan,
    Review,
    Propose,
};

inline constexpr std::size_t kPurposeCount = 7;

std::string_view purpose_name(CallPurpose p);

struct Completion
{
    std::string text;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

// Transport or backend failure. Retriable errors may succeed on a later call.
class LmError : public std::runtime_error
{
  public:
    LmError(const std::string& what, bool retriable) : std::runtime_error(what), retriable_(retriable) {}
    bool retriable() const noexcept { return retriable_; }

  private:
    bool retriable_;
};

struct TelemetrySnapshot
{
    std::int64_t api_calls = 0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::array<std::int64_t, kPurposeCount> calls_by_purpose{};

    TelemetrySnapshot operator-(const TelemetrySnapshot& o) const;
    std::int64_t calls(CallPurpose p) const noexcept { return calls_by_purpose[static_cast<std::size_t>(p)]; }
    friend bool operator==(const TelemetrySnapshot&, const TelemetrySnapshot&) = default;
};

class Telemetry
{
  public:
    void record(CallPurpose purpose, std::int64_t in, std::int64_t out) noexcept;
    TelemetrySnapshot snapshot() const noexcept;

  private:
    std::atomic<std::int64_t> calls_{0};
    std::atomic<std::int64_t> input_{0};
    std::atomic<std::int64_t> output_{0};
    std::array<std::atomic<std::int64_t>, kPurposeCount> by_purpose_{};
};

// Temperature 0, one completion per call. complete() is safe to call from
// several threads; every call, failed or not, counts toward api_calls.
class LanguageModel
{
  public:
    virtual ~LanguageModel() = default;

    Completion complete(const std::string& prompt, CallPurpose purpose);
    const Telemetry& telemetry() const noexcept { return telemetry_; }
    virtual std::string describe() const = 0;

  protected:
    virtual Completion do_complete(const std::string& prompt) = 0;

  private:
    Telemetry telemetry_;
};

// Whitespace-separated token count.
std::int64_t count_tokens(std::string_view text) noexcept;

// Which template a prompt came from, recognized by fixed template phrases.
enum class PromptKind : std::uint8_t
{
    Unknown,
    Perception,
    Translate,
    CamonPlan,
    CamonPropose,
    CamonReview,
    CoelaMessage,
    CoelaAction,
    EmbodiedMessages,
    EmbodiedAction,
    HmasPlan,
    HmasFeedback,
};

PromptKind classify_prompt(std::string_view prompt);
std::string_view prompt_kind_name(PromptKind k);

// Agent id from "You are AGENT_<n>", or 0.
int prompt_agent_id(std::string_view prompt);

using Responder = std::function<std::string(const std::string& prompt, PromptKind kind, std::int64_t call_index)>;

// Deterministic mock. Tokens are counted with count_tokens.
class MockLm : public LanguageModel
{
  public:
    MockLm(std::string name, Responder responder);
    std::string describe() const override { return "mock:" + name_; }

  protected:
    Completion do_complete(const std::string& prompt) override;

  private:
    std::string name_;
    Responder responder_;
    std::mutex mutex_;
    std::int64_t calls_ = 0;
};

// Reply a cooperative but inactive agent would give to each template.
std::string idle_reply(PromptKind kind, const std::string& prompt);

// Builds a mock from a script spec:
//   idle | echo | omniscient | fixed:<text> | fail_first:<n>
//   transcript:<json array file> | rules:<json file>
// omniscient needs the episode it should solve.
std::unique_ptr<LanguageModel> make_mock_lm(std::string_view script, const Episode* episode = nullptr);

struct HttpLmConfig
{
    std::string endpoint = "https://api.openai.com"; // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string key_env = "WILDFIRE_LM_API_KEY";
    int timeout_seconds = 120;

    friend bool operator==(const HttpLmConfig&, const HttpLmConfig&) = default;
};

// OpenAI-style chat completion client. The key is read from the environment.
std::unique_ptr<LanguageModel> make_http_lm(const HttpLmConfig& cfg);

// "mock:<script>" or "http".
std::unique_ptr<LanguageModel> make_lm(std::string_view spec, const HttpLmConfig& http, const Episode* episode = nullptr);

} // namespace wildfire
