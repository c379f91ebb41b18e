#include "wildfire/lm.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#ifdef WILDFIRE_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "wildfire/levels.hpp"
#include "wildfire/translator.hpp"

namespace wildfire {

std::string_view purpose_name(CallPurpose p)
{
    switch (p) {
    case CallPurpose::Perception: return "perception";
    case CallPurpose::Message: return "message";
    case CallPurpose::Action: return "action";
    case CallPurpose::Translate: return "translate";
    case CallPurpose::Plan: return "plan";
    case CallPurpose::Review: return "review";
    case CallPurpose::Propose: return "propose";
    }
    return "unknown";
}

TelemetrySnapshot TelemetrySnapshot::operator-(const TelemetrySnapshot& o) const
{
    TelemetrySnapshot d;
    d.api_calls = api_calls - o.api_calls;
    d.input_tokens = input_tokens - o.input_tokens;
    d.output_tokens = output_tokens - o.output_tokens;
    for (std::size_t i = 0; i < kPurposeCount; ++i) d.calls_by_purpose[i] = calls_by_purpose[i] - o.calls_by_purpose[i];
    return d;
}

void Telemetry::record(CallPurpose purpose, std::int64_t in, std::int64_t out) noexcept
{
    calls_.fetch_add(1, std::memory_order_relaxed);
    input_.fetch_add(in, std::memory_order_relaxed);
    output_.fetch_add(out, std::memory_order_relaxed);
    by_purpose_[static_cast<std::size_t>(purpose)].fetch_add(1, std::memory_order_relaxed);
}

TelemetrySnapshot Telemetry::snapshot() const noexcept
{
    TelemetrySnapshot s;
    s.api_calls = calls_.load(std::memory_order_relaxed);
    s.input_tokens = input_.load(std::memory_order_relaxed);
    s.output_tokens = output_.load(std::memory_order_relaxed);
    for (std::size_t i = 0; i < kPurposeCount; ++i) s.calls_by_purpose[i] = by_purpose_[i].load(std::memory_order_relaxed);
    return s;
}

Completion LanguageModel::complete(const std::string& prompt, CallPurpose purpose)
{
    Completion c;
    try {
        c = do_complete(prompt);
    } catch (...) {
        telemetry_.record(purpose, 0, 0);
        throw;
    }
    telemetry_.record(purpose, c.input_tokens, c.output_tokens);
    return c;
}

std::int64_t count_tokens(std::string_view text) noexcept
{
    std::int64_t n = 0;
    bool in_word = false;
    for (char ch : text) {
        const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

PromptKind classify_prompt(std::string_view p)
{
    auto has = [&](std::string_view s) { return p.find(s) != std::string_view::npos; };
    if (has("Your job is to process and understand your surroundings.")) return PromptKind::Perception;
    if (has("convert a single text action into a structured format")) return PromptKind::Translate;
    if (has("review this action and ACCEPT or REJECT")) return PromptKind::CamonReview;
    if (has("Your job is to propose your next action.")) return PromptKind::CamonPropose;
    if (has("currently acting as the leader")) return PromptKind::CamonPlan;
    if (has("propose a message to send")) return PromptKind::CoelaMessage;
    if (has("Include 'SEND MESSAGE'")) return PromptKind::CoelaAction;
    if (has("generate a list of short messages")) return PromptKind::EmbodiedMessages;
    if (has("ONE and only ONE")) return PromptKind::EmbodiedAction;
    if (has("You are central planner")) return PromptKind::HmasPlan;
    if (has("provide feedback to the action plan")) return PromptKind::HmasFeedback;
    return PromptKind::Unknown;
}

std::string_view prompt_kind_name(PromptKind k)
{
    switch (k) {
    case PromptKind::Unknown: return "unknown";
    case PromptKind::Perception: return "perception";
    case PromptKind::Translate: return "translate";
    case PromptKind::CamonPlan: return "camon_plan";
    case PromptKind::CamonPropose: return "camon_propose";
    case PromptKind::CamonReview: return "camon_review";
    case PromptKind::CoelaMessage: return "coela_message";
    case PromptKind::CoelaAction: return "coela_action";
    case PromptKind::EmbodiedMessages: return "embodied_messages";
    case PromptKind::EmbodiedAction: return "embodied_action";
    case PromptKind::HmasPlan: return "hmas_plan";
    case PromptKind::HmasFeedback: return "hmas_feedback";
    }
    return "unknown";
}

int prompt_agent_id(std::string_view prompt)
{
    static const std::regex re(R"(You are (?:the communicator module of )?AGENT_(\d+))");
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(prompt.begin(), prompt.end(), m, re)) return std::stoi(m[1].str());
    return 0;
}

MockLm::MockLm(std::string name, Responder responder) : name_(std::move(name)), responder_(std::move(responder)) {}

Completion MockLm::do_complete(const std::string& prompt)
{
    std::int64_t index = 0;
    {
        std::lock_guard lock(mutex_);
        index = calls_++;
    }
    Completion c;
    c.text = responder_(prompt, classify_prompt(prompt), index);
    c.input_tokens = count_tokens(prompt);
    c.output_tokens = count_tokens(c.text);
    return c;
}

std::string idle_reply(PromptKind kind, const std::string& prompt)
{
    switch (kind) {
    case PromptKind::Perception: return "Nothing nearby needs attention.";
    case PromptKind::Translate: return "[0, 0, 0, \"" + translation_prompt_action(prompt) + "\"]";
    case PromptKind::CamonPlan:
    case PromptKind::CamonPropose:
    case PromptKind::CoelaAction:
    case PromptKind::EmbodiedAction: return "<reasoning>Holding position.</reasoning>\n<action>Do nothing</action>";
    case PromptKind::CamonReview:
        return "<reasoning>Holding position.</reasoning>\n<decision>ACCEPT</decision>\n<action>Do nothing</action>\n"
               "<message>Hold position.</message>";
    case PromptKind::CoelaMessage: return "<reasoning>Nothing to share.</reasoning>\n<message>Holding position.</message>";
    case PromptKind::EmbodiedMessages: return "<reasoning>Nothing to share.</reasoning>";
    case PromptKind::HmasPlan: return "<reasoning>Everyone holds position.</reasoning>";
    case PromptKind::HmasFeedback: return "<reasoning>Fine.</reasoning>\n<feedback>ACCEPT</feedback>";
    case PromptKind::Unknown: break;
    }
    return "Do nothing";
}

namespace {

std::string last_line(const std::string& prompt)
{
    std::size_t end = prompt.size();
    while (end > 0) {
        const auto start = prompt.rfind('\n', end - 1);
        const auto b = start == std::string::npos ? 0 : start + 1;
        std::string line = prompt.substr(b, end - b);
        bool blank = true;
        for (char ch : line) blank = blank && std::isspace(static_cast<unsigned char>(ch));
        if (!blank) return line;
        if (start == std::string::npos) break;
        end = start;
    }
    return {};
}

// Answers a translation prompt whose action text is in canonical form.
std::string mock_translate(const std::string& prompt)
{
    static const std::regex count_re(R"(You have (\d+) distinct types)");
    std::smatch m;
    const std::string text = translation_prompt_action(prompt);
    if (std::regex_search(prompt, m, count_re)) {
        if (auto kind = kind_from_catalog_size(std::stoul(m[1].str()))) {
            if (auto p = primitive_from_text(text, *kind)) return format_action(from_primitive(*p, *kind));
        }
    }
    return "[0, 0, 0, \"" + text + "\"]";
}

std::string plan_text(const std::vector<Assignment>& plan, int agent)
{
    for (const auto& a : plan) {
        if (a.agent == agent) return describe(a.prim);
    }
    return "Do nothing";
}

std::string omniscient_reply(const Episode& ep, const std::string& prompt, PromptKind kind)
{
    const auto plan = omniscient_plan(ep);
    const int self = prompt_agent_id(prompt);
    switch (kind) {
    case PromptKind::Perception: return "Ground truth is available to the planner.";
    case PromptKind::Translate: return mock_translate(prompt);
    case PromptKind::CamonPlan: {
        std::string out = "<reasoning>Assigning nearest open targets.</reasoning>\n<action>" + plan_text(plan, self) +
                          "</action>\n";
        for (const auto& a : plan) {
            if (a.agent == self) continue;
            const auto tag = "AGENT_" + std::to_string(a.agent) + "-action";
            out += "<" + tag + ">" + describe(a.prim) + "</" + tag + ">\n";
        }
        return out;
    }
    case PromptKind::CamonPropose:
    case PromptKind::CoelaAction:
    case PromptKind::EmbodiedAction:
        return "<reasoning>Nearest open target.</reasoning>\n<action>" + plan_text(plan, self) + "</action>";
    case PromptKind::CamonReview: {
        static const std::regex re(R"(Your teammate AGENT_(\d+))");
        std::smatch m;
        const int other = std::regex_search(prompt, m, re) ? std::stoi(m[1].str()) : 0;
        return "<reasoning>Checked against open targets.</reasoning>\n<decision>ACCEPT</decision>\n<action>" +
               plan_text(plan, other) + "</action>\n<message>Go ahead.</message>";
    }
    case PromptKind::HmasPlan: {
        std::string out = "<reasoning>Assigning nearest open targets.</reasoning>\n";
        for (const auto& a : plan) {
            const auto tag = "AGENT_" + std::to_string(a.agent);
            out += "<" + tag + ">" + describe(a.prim) + "</" + tag + ">\n";
        }
        return out;
    }
    default: return idle_reply(kind, prompt);
    }
}

nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mock script file: " + path);
    return nlohmann::json::parse(in);
}

} // namespace

std::unique_ptr<LanguageModel> make_mock_lm(std::string_view script, const Episode* episode)
{
    const auto colon = script.find(':');
    const std::string head(script.substr(0, colon));
    const std::string arg = colon == std::string_view::npos ? std::string() : std::string(script.substr(colon + 1));
    const std::string name(script);

    if (head == "idle") {
        return std::make_unique<MockLm>(name, [](const std::string& p, PromptKind k, std::int64_t) {
            return k == PromptKind::Translate ? mock_translate(p) : idle_reply(k, p);
        });
    }
    if (head == "echo") {
        return std::make_unique<MockLm>(name, [](const std::string& p, PromptKind, std::int64_t) { return last_line(p); });
    }
    if (head == "fixed") {
        return std::make_unique<MockLm>(name, [arg](const std::string&, PromptKind, std::int64_t) { return arg; });
    }
    if (head == "fail_first") {
        const auto n = std::stoll(arg.empty() ? "1" : arg);
        return std::make_unique<MockLm>(name, [n](const std::string& p, PromptKind k, std::int64_t i) -> std::string {
            if (i < n) throw LmError("scripted transport failure", true);
            return k == PromptKind::Translate ? mock_translate(p) : idle_reply(k, p);
        });
    }
    if (head == "omniscient") {
        if (!episode) throw std::invalid_argument("mock:omniscient needs an episode");
        return std::make_unique<MockLm>(name, [episode](const std::string& p, PromptKind k, std::int64_t) {
            return omniscient_reply(*episode, p, k);
        });
    }
    if (head == "transcript") {
        auto doc = read_json_file(arg);
        std::vector<std::string> replies = doc.get<std::vector<std::string>>();
        return std::make_unique<MockLm>(name, [replies](const std::string& p, PromptKind k, std::int64_t i) {
            if (i < static_cast<std::int64_t>(replies.size())) return replies[static_cast<std::size_t>(i)];
            return k == PromptKind::Translate ? mock_translate(p) : idle_reply(k, p);
        });
    }
    if (head == "rules") {
        struct Rule
        {
            std::string kind;
            std::string contains;
            std::string reply;
        };
        std::vector<Rule> rules;
        for (const auto& r : read_json_file(arg)) {
            rules.push_back({r.value("kind", ""), r.value("contains", ""), r.at("reply").get<std::string>()});
        }
        return std::make_unique<MockLm>(name, [rules](const std::string& p, PromptKind k, std::int64_t) {
            for (const auto& r : rules) {
                if (!r.kind.empty() && r.kind != prompt_kind_name(k)) continue;
                if (!r.contains.empty() && p.find(r.contains) == std::string::npos) continue;
                return r.reply;
            }
            return k == PromptKind::Translate ? mock_translate(p) : idle_reply(k, p);
        });
    }
    throw std::invalid_argument("unknown mock script '" + name +
                                "'; expected idle, echo, omniscient, fixed:<text>, fail_first:<n>, "
                                "transcript:<file> or rules:<file>");
}

namespace {

class HttpLm : public LanguageModel
{
  public:
    explicit HttpLm(HttpLmConfig cfg) : cfg_(std::move(cfg)) {}
    std::string describe() const override { return "http:" + cfg_.endpoint + cfg_.path + "#" + cfg_.model; }

  protected:
    Completion do_complete(const std::string& prompt) override
    {
        const char* key = std::getenv(cfg_.key_env.c_str());
        if (!key || !*key) throw LmError("environment variable " + cfg_.key_env + " is not set", false);

        nlohmann::json body = {
            {"model", cfg_.model},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", 0},
            {"n", 1},
        };
        httplib::Client client(cfg_.endpoint);
        client.set_read_timeout(cfg_.timeout_seconds, 0);
        client.set_write_timeout(cfg_.timeout_seconds, 0);
        const httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
        auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
        if (!res) throw LmError("request failed: " + httplib::to_string(res.error()), true);
        if (res->status == 429 || res->status >= 500) {
            throw LmError("server returned " + std::to_string(res->status), true);
        }
        if (res->status != 200) {
            throw LmError("server returned " + std::to_string(res->status) + ": " + res->body, false);
        }
        const auto doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty()) {
            throw LmError("malformed completion response", true);
        }
        Completion c;
        c.text = doc["choices"][0]["message"].value("content", "");
        if (doc.contains("usage")) {
            c.input_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
            c.output_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
        } else {
            c.input_tokens = count_tokens(prompt);
            c.output_tokens = count_tokens(c.text);
        }
        return c;
    }

  private:
    HttpLmConfig cfg_;
};

} // namespace

std::unique_ptr<LanguageModel> make_http_lm(const HttpLmConfig& cfg)
{
    return std::make_unique<HttpLm>(cfg);
}

std::unique_ptr<LanguageModel> make_lm(std::string_view spec, const HttpLmConfig& http, const Episode* episode)
{
    if (spec == "http") return make_http_lm(http);
    if (spec.rfind("mock:", 0) == 0) return make_mock_lm(spec.substr(5), episode);
    throw std::invalid_argument("unknown LM '" + std::string(spec) + "'; use mock:<script> or http");
}

} // namespace wildfire
