#include "wildfire/frameworks.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <regex>
#include <set>
#include <sstream>

#include "wildfire/config.hpp"
#include "wildfire/parallel.hpp"
#include "wildfire/perception.hpp"
#include "wildfire/translator.hpp"

namespace wildfire {

using nlohmann::json;

std::string_view framework_name(FrameworkKind k)
{
    switch (k) {
    case FrameworkKind::DoNothing: return "do_nothing";
    case FrameworkKind::Camon: return "camon";
    case FrameworkKind::Coela: return "coela";
    case FrameworkKind::Embodied: return "embodied";
    case FrameworkKind::Hmas2: return "hmas2";
    }
    return "do_nothing";
}

FrameworkKind parse_framework(std::string_view s)
{
    std::string t;
    for (char ch : s) {
        if (ch == '-' || ch == '_' || ch == ' ') continue;
        t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    if (t == "donothing" || t == "none") return FrameworkKind::DoNothing;
    if (t == "camon") return FrameworkKind::Camon;
    if (t == "coela") return FrameworkKind::Coela;
    if (t == "embodied") return FrameworkKind::Embodied;
    if (t == "hmas2" || t == "hmas") return FrameworkKind::Hmas2;
    throw std::invalid_argument("unknown framework '" + std::string(s) +
                                "'; expected do_nothing, camon, coela, embodied or hmas2");
}

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string upper(std::string s)
{
    for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
}

std::string regex_escape(std::string_view s)
{
    std::string out;
    for (char ch : s) {
        if (std::string_view(R"(\^$.|?*+()[]{})").find(ch) != std::string_view::npos) out.push_back('\\');
        out.push_back(ch);
    }
    return out;
}

} // namespace

std::string strip_quotes(std::string_view s)
{
    std::string t = trim(s);
    while (t.size() >= 2) {
        const char f = t.front();
        const char b = t.back();
        if ((f == '\'' || f == '"' || f == '`') && f == b) {
            t = trim(std::string_view(t).substr(1, t.size() - 2));
        } else {
            break;
        }
    }
    if (t.size() == 1 && (t[0] == '\'' || t[0] == '"')) t.clear();
    return t;
}

std::string extract_tag(std::string_view text, std::string_view name)
{
    const std::regex re("<\\s*" + regex_escape(name) + "\\s*>([\\s\\S]*?)<\\s*/?\\s*" + regex_escape(name) + "\\s*>",
                        std::regex::icase);
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(text.begin(), text.end(), m, re)) return {};
    return strip_quotes(m[1].str());
}

std::vector<TaggedText> extract_agent_tags(std::string_view text, std::string_view suffix)
{
    const std::string sfx = regex_escape(suffix);
    const std::regex re("<\\s*AGENT[ _]?(\\d+)\\s*-\\s*" + sfx + "\\s*>([\\s\\S]*?)<\\s*/?\\s*AGENT[ _]?\\1\\s*-\\s*" +
                            sfx + "\\s*>",
                        std::regex::icase);
    std::vector<TaggedText> out;
    for (std::regex_iterator<std::string_view::const_iterator> it(text.begin(), text.end(), re), end; it != end; ++it) {
        out.push_back({std::stoi((*it)[1].str()), strip_quotes((*it)[2].str())});
    }
    return out;
}

std::vector<TaggedText> extract_recipient_tags(std::string_view text, bool include_global)
{
    static const std::regex agent_re(R"(<\s*AGENT[ _]?(\d+)\s*>([\s\S]*?)<\s*/?\s*AGENT[ _]?\1\s*>)", std::regex::icase);
    static const std::regex global_re(R"(<\s*GLOBAL\s*>([\s\S]*?)<\s*/?\s*GLOBAL\s*>)", std::regex::icase);
    struct Found
    {
        std::ptrdiff_t pos;
        TaggedText tag;
    };
    std::vector<Found> found;
    for (std::regex_iterator<std::string_view::const_iterator> it(text.begin(), text.end(), agent_re), end; it != end;
         ++it) {
        found.push_back({it->position(0), {std::stoi((*it)[1].str()), strip_quotes((*it)[2].str())}});
    }
    if (include_global) {
        for (std::regex_iterator<std::string_view::const_iterator> it(text.begin(), text.end(), global_re), end;
             it != end; ++it) {
            found.push_back({it->position(0), {0, strip_quotes((*it)[1].str())}});
        }
    }
    std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) { return a.pos < b.pos; });
    std::vector<TaggedText> out;
    for (auto& f : found) out.push_back(std::move(f.tag));
    return out;
}

std::uint64_t state_digest(const WorldMap& world, const std::vector<Agent>& agents)
{
    Digest d;
    digest_world(d, world);
    digest_agents(d, agents);
    return d.value();
}

void RunLogWriter::write(const json& record)
{
    const std::string line = record.dump();
    digest_.add_bytes(std::as_bytes(std::span(line.data(), line.size())));
    if (out_) *out_ << line << '\n';
}

namespace {

json roster_json(const Roster& r)
{
    return {{"firefighters", r.firefighters}, {"bulldozers", r.bulldozers}, {"drones", r.drones}, {"helicopters", r.helicopters}};
}

Roster roster_from_json(const json& j)
{
    Roster r;
    r.firefighters = j.value("firefighters", 0);
    r.bulldozers = j.value("bulldozers", 0);
    r.drones = j.value("drones", 0);
    r.helicopters = j.value("helicopters", 0);
    return r;
}

json components_json(const ScoreComponents& c)
{
    return {{"trees_cut_correct", c.trees_cut_correct}, {"drones_over_fire", c.drones_over_fire},
            {"agents_at_target", c.agents_at_target},   {"civilians_at_target", c.civilians_at_target},
            {"trees_destroyed", c.trees_destroyed},     {"agents_lost", c.agents_lost},
            {"civilians_lost", c.civilians_lost}};
}

json telemetry_json(const TelemetrySnapshot& t)
{
    json by = json::object();
    for (std::size_t i = 0; i < kPurposeCount; ++i) {
        if (t.calls_by_purpose[i] > 0) by[std::string(purpose_name(static_cast<CallPurpose>(i)))] = t.calls_by_purpose[i];
    }
    return {{"api_calls", t.api_calls}, {"input_tokens", t.input_tokens}, {"output_tokens", t.output_tokens}, {"by_purpose", by}};
}

json assignment_json(const Assignment& a)
{
    return {{"agent", a.agent}, {"primitive", primitive_name(a.prim.kind)}, {"p1", a.prim.p1}, {"p2", a.prim.p2}};
}

Assignment assignment_from_json(const json& j)
{
    Assignment a;
    a.agent = j.at("agent").get<int>();
    const auto kind = parse_primitive_name(j.at("primitive").get<std::string>());
    if (!kind) throw std::runtime_error("unknown primitive in log: " + j.at("primitive").get<std::string>());
    a.prim = {*kind, j.value("p1", 0), j.value("p2", 0)};
    return a;
}

} // namespace

json header_record(FrameworkKind fw, const Episode& ep, std::string_view lm, const FrameworkConfig& cfg)
{
    return {{"type", "header"},
            {"version", 1},
            {"level", ep.level.spec.name},
            {"seed", ep.level.seed},
            {"framework", framework_name(fw)},
            {"lm", lm},
            {"max_steps", ep.level.spec.max_steps},
            {"roster", roster_json(ep.level.spec.roster)},
            {"task", ep.level.task_description()},
            {"gen", ep.gen},
            {"fire", ep.fire},
            {"agents", ep.params},
            {"framework_config", cfg},
            {"initial_digest", hex_digest(state_digest(ep.world, ep.agents))}};
}

json step_record(const StepRecord& s, bool log_prompts)
{
    json assignments = json::array();
    for (const auto& a : s.assignments) assignments.push_back(assignment_json(a));
    json calls = json::array();
    for (const auto& c : s.calls) {
        json j{{"agent", c.agent},
               {"purpose", purpose_name(c.purpose)},
               {"output", c.output},
               {"input_tokens", c.input_tokens},
               {"output_tokens", c.output_tokens}};
        if (log_prompts) j["prompt"] = c.prompt;
        calls.push_back(std::move(j));
    }
    json events = json::array();
    for (const auto& e : s.events) {
        json j{{"type", event_name(e.type)}, {"agent", e.agent}, {"x", e.cell.x}, {"y", e.cell.y}, {"count", e.count}};
        if (!e.detail.empty()) j["detail"] = e.detail;
        events.push_back(std::move(j));
    }
    return {{"type", "step"},
            {"t", s.t},
            {"assignments", assignments},
            {"calls", calls},
            {"messages", s.messages},
            {"notes", s.notes},
            {"events", events},
            {"fire",
             {{"ignitions", s.fire.ignitions.size()},
              {"transitions", s.fire.transitions.size()},
              {"trees_destroyed", s.fire.trees_destroyed}}},
            {"score", s.score.value},
            {"components", components_json(s.score.components)},
            {"telemetry", telemetry_json(s.telemetry)},
            {"digest", s.digest}};
}

json footer_record(const EpisodeResult& r)
{
    return {{"type", "footer"},
            {"final_score", r.final_score.value},
            {"components", components_json(r.final_score.components)},
            {"termination", termination_name(r.reason)},
            {"steps", r.steps},
            {"telemetry", telemetry_json(r.telemetry)},
            {"op_precondition", r.op_precondition},
            {"aborted", r.aborted},
            {"abort_reason", r.abort_reason}};
}

namespace {

// Where the current thread's LM calls are attributed.
struct CallContext
{
    int agent = 0;
    CallPurpose purpose = CallPurpose::Action;
    std::vector<CallRecord>* sink = nullptr;
};

thread_local CallContext* t_context = nullptr;

class ContextScope
{
  public:
    explicit ContextScope(CallContext& c) : prev_(t_context) { t_context = &c; }
    ~ContextScope() { t_context = prev_; }
    ContextScope(const ContextScope&) = delete;
    ContextScope& operator=(const ContextScope&) = delete;

  private:
    CallContext* prev_;
};

// Forwards to the real model with the purpose from the calling context,
// retries transient failures and records every attempt.
class TapLm : public LanguageModel
{
  public:
    TapLm(LanguageModel& inner, int retries, bool keep_prompts)
        : inner_(inner), retries_(retries), keep_prompts_(keep_prompts)
    {
    }
    std::string describe() const override { return inner_.describe(); }

  protected:
    Completion do_complete(const std::string& prompt) override
    {
        CallContext fallback;
        CallContext& ctx = t_context ? *t_context : fallback;
        for (int attempt = 0;; ++attempt) {
            CallRecord rec;
            rec.agent = ctx.agent;
            rec.purpose = ctx.purpose;
            if (keep_prompts_) rec.prompt = prompt;
            try {
                Completion c = inner_.complete(prompt, ctx.purpose);
                rec.output = c.text;
                rec.input_tokens = c.input_tokens;
                rec.output_tokens = c.output_tokens;
                if (ctx.sink) ctx.sink->push_back(std::move(rec));
                return c;
            } catch (const LmError& e) {
                rec.output = std::string("[call failed: ") + e.what() + "]";
                if (ctx.sink) ctx.sink->push_back(std::move(rec));
                if (!e.retriable() || attempt >= retries_) throw;
            }
        }
    }

  private:
    LanguageModel& inner_;
    int retries_;
    bool keep_prompts_;
};

std::string join_lines(const std::vector<std::string>& v, std::size_t last = 0)
{
    if (v.empty()) return "none";
    const std::size_t from = last > 0 && v.size() > last ? v.size() - last : 0;
    std::string out;
    for (std::size_t i = from; i < v.size(); ++i) {
        if (!out.empty()) out += "\n";
        out += v[i];
    }
    return out;
}

std::string kind_label(AgentKind k)
{
    return std::string(kind_name(k));
}

std::string replace_all(std::string s, std::string_view from, std::string_view to)
{
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string fill(std::string tpl, std::initializer_list<std::pair<std::string_view, std::string>> slots)
{
    for (const auto& [key, value] : slots) tpl = replace_all(std::move(tpl), key, value);
    return tpl;
}

// Template text is kept as data; {SLOT} markers are filled per call.
constexpr std::string_view kCamonPlan = R"(You are {NAME}, an {TYPE} Agent, currently acting as the leader in a cooperative multi-agent robotic task.
This is your team composition, (including yourself):

{TEAM}
---

Your team's current task is:

{TASK}
---

Your past actions were:

{PAST}
---

This is your chat history with agents in your team:

{CHAT}
---

This is your team's (including you) collective observations, locations, current actions, and past actions of all agents.

{GLOBAL}
---

Now your job is to provide the next best action for yourself, and OPTIONALLY: the next best action for any other agents.
Remember, you are {NAME} an {TYPE} Agent, located at {POS}.

These are all the possible actions for each type of agent. This is a comprehensive list, so the action MUST be one of these types. NO other responses are allowed.

{ABILITIES}

Provide your output in the following format:

<reasoning>(any reasoning or calculations)</reasoning>

<action>'MY NEXT ACTION'</action>

OPTIONAL-for other agents:

<AGENT ID-action>(AGENT ID'S NEXT ACTION)<AGENT ID-action>
<AGENT ID-message>(message to AGENT ID)<AGENT ID-message>

For example:
<AGENT A-action>'action'<AGENT A-action>
<AGENT A-message>'action'<AGENT A-message>
)";

constexpr std::string_view kCamonPropose = R"(You are {NAME}, an embodied {TYPE} agent within a {W} by {H} forest grid world and part of a collaborative team of {N} Agents.

This is your team's composition (including yourself):

{TEAM}
---

These are your current observations:

{PERCEPTION}
---

This is your team's overall task:

{TASK}
---

Your past actions were:

{PAST}
---

This is your chat history with agents in your team:

{CHAT}
---

Your job is to propose your next action. These are your possible actions:

{ABILITIES}

This is a comprehensive list, so your action MUST be one of these types. NO other responses are allowed.

Provide your output in the following format:

<reasoning>(any reasoning or calculations)</reasoning>
<action>'MY NEXT ACTION'</action>
)";

constexpr std::string_view kCamonReview = R"(You are {NAME}, currently acting as the leader in a cooperative multi-agent robotic task.

This is your team composition (including yourself):

{TEAM}
---

Your team's current task is:

{TASK}
---

This is your teams'(including you) collective observations, locations, current actions, and past actions of all agents. Only you have all of this data.

{GLOBAL}
---

Your teammate {OTHER}, an {OTHER_TYPE} Agent, is proposing a new action for itself:

{PROPOSAL}
---

Your job is to review this action and ACCEPT or REJECT it.

Then provide the next best action for {OTHER}, choosing a better one if REJECT or repeating/rewriting the proposed one if ACCEPT.
Also send a message to {OTHER} describing your choice.

Additionally, you may announce information to other agents in your team with information.
You may also choose to override actions for other agents as well. You must send a message to that agent if you do so. This interrupts their action, so only do this if you want to change their current action.

These are all the possible actions for each type of agent. This is a comprehensive list, so the action MUST be one of these types. NO other responses are allowed.

{ABILITIES}

Provide your output in the following format:
<reasoning>(any reasoning or calculations)</reasoning>
<decision> ACCEPT OR REJECT </decision>
<action> {OTHER}'s next action </action>
<message> message to {OTHER}</message>

OPTIONAL-for other agents:
<AGENT ID-action>(AGENTID'S NEXT ACTION)<AGENT ID-action>
<AGENT ID-message>(message to AGENTID)<AGENT ID-message>

For example: <AGENT A-action>'action'</AGENT A-action>
)";

constexpr std::string_view kCoelaMessage = R"(You are the communicator module of {NAME}, a {TYPE} Agent in a cooperative multi-agent robotic task.

This is your team composition, including you:

{TEAM}
---

Your team's task is:

{TASK}
---

Your status and observations:

{PERCEPTION}
---

Your chat history:

{CHAT}
---

Your past actions:

{PAST}
---

Your job is to propose a message to send to the chat/groupchat.

Provide your output in the following format:

<reasoning>(any reasoning or calculations)</reasoning>

<message>'MESSAGE'</message>

Note: The generated message should be accurate, helpful, and brief. Do not generate repetitive messages
)";

constexpr std::string_view kCoelaAction = R"(You are {NAME}, an {TYPE} Agent in a cooperative multi-agent robotic task.

This is your team composition, including you:

{TEAM}
---

Your team's task is:

{TASK}
---

Your status and observations:

{PERCEPTION}
---

Your chat history:

{CHAT}
---

Your past actions:

{PAST}
---

Now your job is to provide the next best action for yourself. Remember, you are {NAME} an {TYPE} Agent, located at {POS}.

These are all the possible actions for each type of agent. This is a comprehensive list, so the action MUST be one of these types. NO other responses are allowed. Note that sending messages has a cost so think about the necessity of it.

- [send message to groupchat] {PROPOSED}
{ABILITIES}

Provide your output in the following format:

<reasoning>(any reasoning or calculations)</reasoning>

<action>'MY NEXT ACTION'</action>

Include 'SEND MESSAGE' in all caps like so, if and only if your action is to send the message. For example:

<action>SEND MESSAGE 'proposed message'</action>
)";

constexpr std::string_view kEmbodiedMessages = R"(You are {NAME}, a {TYPE} Agent in a cooperative multi-agent robotic task.

Given your shared goal, chat history, and your progress and previous actions, please generate a list of short messages to members of your team in order to achieve the goal as possible.

This is your team composition, including you:

{TEAM}
---

Your team's task is:

{TASK}
---

Your status and observations:

{PERCEPTION}
---

Your past actions:

{PAST}
---

Your chats:

{CHAT}
---

You may send messages to individual agents or in a global channel. Think about the necessity of sending a message. There are costs to send messages. Provide your output in the following format. All names should be in all caps:

<reasoning>(any reasoning or calculations)</reasoning>

<RECIPIENT>'MESSAGE'</RECIPIENT>
<GLOBAL>'MESSAGE'</GLOBAL>

For Example:

<AGENT A>message</AGENT A>,
<AGENT C>message</AGENT C>,
<GLOBAL>message</GLOBAL>
)";

constexpr std::string_view kEmbodiedAction = R"(You are {NAME}, an {TYPE} Agent in a cooperative multi-agent robotic task.

Your team's task is:

{TASK}
---

Your status and observations:

{PERCEPTION}
---

Your chat history:

{CHAT}
---

Your past actions:

{PAST}
---

Now your job is to provide the next best action for yourself.
Remember, you are {NAME} an {TYPE} Agent, located at {POS}.

These are all the possible actions for each type of agent. This is a comprehensive list, so the action MUST be ONE and only ONE of these types. NO other responses are allowed.

{ABILITIES}

Provide your output in the following format:

<reasoning>(any reasoning or calculations)</reasoning>

<action>'MY NEXT ACTION'</action>

Make sure you include enough details in your action such as explicit target coordinate locations. For example:

<action>Move towards (500,500)</action>
)";

constexpr std::string_view kHmasPlan = R"(You are central planner directing agents in a cooperative multi-agent robotic task.

Your team's task is:

{TASK}
---

Your team's previous state action pairs at each step are:

{HISTORY}
---

Your team's current state and available actions are:

{STATE}
---
{REVIEW}
Now your job is to provide the next best action for each agent. You must provide a single action for each agent. These actions must be exactly ONE of the agent's available actions, including the 'do nothing' action. Do not propose multiple actions per agent.

Specify your action plan in the following format with agent names in all caps:

<reasoning>(any reasoning or calculations)</reasoning>

<AGENT>'MY NEXT ACTION'</AGENT>

For example:

<AGENT A>'action'</AGENT A>
<AGENT B>'action'</AGENT B>

Make sure you include enough details in each action such as explicit target coordinate locations.
)";

constexpr std::string_view kHmasFeedback = R"(You are {NAME}, an {TYPE} Agent in a cooperative multi-agent robotic task.

Your team's task is:

{TASK}
---

Your team's previous state action pairs at each step are:

{HISTORY}
---

Your team's current state and available actions are:

{STATE}
---

The initial action plan from the central planner is:

{PLAN}
---

Now your job is to provide feedback to the action plan specifically regarding your agent.
If the plan is satisfactory, the feedback should only be 'ACCEPT'.

Remember, you are {NAME} an {TYPE} Agent, located at {POS}.

<reasoning>(any reasoning or calculations)</reasoning>

<feedback>'feedback'</feedback>
)";

struct Task
{
    int agent = 0;
    std::string text;
};

class Runner
{
  public:
    Runner(FrameworkKind fw, Episode& ep, LanguageModel* lm, const FrameworkConfig& cfg)
        : fw_(fw), ep_(ep), cfg_(cfg), perception_(ep.agents.size() + 1, "none"),
          inbox_(ep.agents.size() + 1)
    {
        if (fw != FrameworkKind::DoNothing) {
            if (!lm) throw std::invalid_argument(std::string(framework_name(fw)) + " needs a language model");
            inner_ = lm;
            tap_ = std::make_unique<TapLm>(*lm, cfg.max_retries, cfg.log_prompts);
        }
        for (const auto& a : ep.agents) {
            if (a.alive) {
                leader_ = a.id;
                break;
            }
        }
    }

    TelemetrySnapshot telemetry() const { return inner_ ? inner_->telemetry().snapshot() : TelemetrySnapshot{}; }

    // Runs the framework's planning for one tick and assigns primitives.
    void plan(StepRecord& rec)
    {
        rec_ = &rec;
        switch (fw_) {
        case FrameworkKind::DoNothing: break;
        case FrameworkKind::Camon: camon(); break;
        case FrameworkKind::Coela: coela(); break;
        case FrameworkKind::Embodied: embodied(); break;
        case FrameworkKind::Hmas2: hmas(); break;
        }
        rec_ = nullptr;
    }

  private:
    Agent& agent(int id) { return ep_.agents[static_cast<std::size_t>(id) - 1]; }
    const Agent& agent(int id) const { return ep_.agents[static_cast<std::size_t>(id) - 1]; }
    bool valid_id(int id) const { return id >= 1 && id <= static_cast<int>(ep_.agents.size()); }

    std::vector<int> planners() const
    {
        std::vector<int> out;
        for (const auto& a : ep_.agents) {
            if (a.idle() && a.aboard == 0) out.push_back(a.id);
        }
        return out;
    }

    // Runs fn(id) for each id with calls attributed to that agent. Calls are
    // merged into the step record in id order.
    template <class Fn>
    auto phase(const std::vector<int>& ids, CallPurpose purpose, Fn&& fn)
    {
        using R = decltype(fn(0));
        std::vector<R> results(ids.size());
        std::vector<std::vector<CallRecord>> sinks(ids.size());
        std::vector<std::exception_ptr> errors(ids.size());
        parallel_chunks(ids.size(), cfg_.lm_threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                CallContext ctx{ids[i], purpose, &sinks[i]};
                ContextScope scope(ctx);
                try {
                    results[i] = fn(ids[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (auto& c : sinks[i]) rec_->calls.push_back(std::move(c));
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        return results;
    }

    std::string call(int id, CallPurpose purpose, const std::string& prompt)
    {
        CallContext ctx{id, purpose, &rec_->calls};
        ContextScope scope(ctx);
        return tap_->complete(prompt, purpose).text;
    }

    // Called from inside a phase, so the context is already set.
    std::string call_in_phase(CallPurpose purpose, const std::string& prompt)
    {
        t_context->purpose = purpose;
        return tap_->complete(prompt, purpose).text;
    }

    void refresh_perceptions(const std::vector<int>& ids)
    {
        auto texts = phase(ids, CallPurpose::Perception, [&](int id) {
            const auto& a = agent(id);
            const auto prompt = build_perception_prompt(a, encode_minimap(ep_.world, a, ep_.agents), ep_.world);
            return call_in_phase(CallPurpose::Perception, prompt);
        });
        for (std::size_t i = 0; i < ids.size(); ++i) perception_[static_cast<std::size_t>(ids[i])] = trim(texts[i]);
    }

    // Translates in parallel, then assigns in id order. Idle text becomes Wait
    // without a translation call; a failed translation becomes Wait with a note.
    void apply(std::vector<Task> tasks)
    {
        std::stable_sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) { return a.agent < b.agent; });
        struct Out
        {
            Primitive prim;
            std::string note;
        };
        const Bounds bounds{ep_.world.width, ep_.world.height};
        std::vector<int> slots(tasks.size());
        for (std::size_t i = 0; i < tasks.size(); ++i) slots[i] = static_cast<int>(i);
        auto outs = phase(slots, CallPurpose::Translate, [&](int slot) {
            const auto& t = tasks[static_cast<std::size_t>(slot)];
            t_context->agent = t.agent;
            Out o;
            if (is_idle_text(t.text)) return o;
            try {
                o.prim = translate(*tap_, t.text, agent(t.agent).kind, bounds, cfg_.max_retries).primitive;
            } catch (const TranslationFailed& e) {
                o.note = "AGENT_" + std::to_string(t.agent) + " translation failed: " + e.what();
            }
            return o;
        });
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            auto& a = agent(tasks[i].agent);
            if (!a.alive) continue;
            if (!outs[i].note.empty()) rec_->notes.push_back(outs[i].note);
            assign_primitive(a, outs[i].prim);
            rec_->assignments.push_back({a.id, outs[i].prim});
        }
    }

    std::string team() const
    {
        std::string out;
        for (const auto& a : ep_.agents) {
            if (!out.empty()) out += "\n";
            out += a.name() + ": " + kind_label(a.kind) + " Agent";
            if (!a.alive) out += " (lost)";
        }
        return out;
    }

    static std::string abilities(AgentKind k)
    {
        std::string out;
        for (const auto& row : default_catalog().rows(k)) out += "- " + row.title + "\n";
        out += "- Do nothing";
        return out;
    }

    std::string team_abilities() const
    {
        std::string out;
        for (auto k : kAllAgentKinds) {
            if (ep_.level.spec.roster.count(k) == 0) continue;
            if (!out.empty()) out += "\n\n";
            out += kind_label(k) + " Agent:\n" + abilities(k);
        }
        return out;
    }

    std::string current_action(const Agent& a) const
    {
        if (!a.alive) return "lost";
        if (!a.active) return "none";
        return describe(a.active->prim);
    }

    std::string global_data() const
    {
        std::string out;
        for (const auto& a : ep_.agents) {
            if (!out.empty()) out += "\n\n";
            out += a.name() + ", a " + kind_label(a.kind) + " Agent at " + to_string(a.pos) + "\n";
            out += "Observations: " + perception_[static_cast<std::size_t>(a.id)] + "\n";
            out += "Current action: " + current_action(a) + "\n";
            out += "Past actions: " + (a.action_history.empty() ? std::string("none") : join_lines(a.action_history, 5));
        }
        return out;
    }

    std::string global_state() const
    {
        std::string out;
        for (const auto& a : ep_.agents) {
            if (!out.empty()) out += "\n\n";
            out += a.name() + ", a " + kind_label(a.kind) + " Agent at " + to_string(a.pos) + "\n";
            if (!a.alive) {
                out += "Status: lost";
                continue;
            }
            out += "Observations: " + perception_[static_cast<std::size_t>(a.id)] + "\n";
            out += "Current action: " + current_action(a) + "\n";
            out += "Available actions:\n" + abilities(a.kind);
        }
        return out;
    }

    std::string history_text() const
    {
        if (step_history_.empty()) return "none";
        std::string out;
        for (const auto& h : step_history_) {
            if (!out.empty()) out += "\n\n";
            out += h;
        }
        return out;
    }

    void deliver(int from, int to, const std::string& msg)
    {
        const std::string line = "AGENT_" + std::to_string(from) + " to AGENT_" + std::to_string(to) + ": " + msg;
        inbox_[static_cast<std::size_t>(from)].push_back(line);
        if (to != from) inbox_[static_cast<std::size_t>(to)].push_back(line);
        agent(from).message_history.push_back(line);
        if (to != from) agent(to).message_history.push_back(line);
        rec_->messages.push_back(line);
    }

    void note_unknown(int id)
    {
        rec_->notes.push_back("unknown agent id " + std::to_string(id) + " dropped");
    }

    // <AGENT_k-action> overrides and <AGENT_k-message> lines from a leader reply.
    void leader_extras(int leader, const std::string& reply, int skip, std::vector<Task>& tasks)
    {
        for (const auto& t : extract_agent_tags(reply, "action")) {
            if (!valid_id(t.agent)) {
                note_unknown(t.agent);
                continue;
            }
            if (t.agent == skip || !agent(t.agent).alive) continue;
            tasks.push_back({t.agent, t.text});
        }
        for (const auto& t : extract_agent_tags(reply, "message")) {
            if (!valid_id(t.agent)) {
                note_unknown(t.agent);
                continue;
            }
            if (!t.text.empty()) deliver(leader, t.agent, t.text);
        }
    }

    int live_leader()
    {
        if (valid_id(leader_) && agent(leader_).alive) return leader_;
        for (const auto& a : ep_.agents) {
            if (a.alive) {
                rec_->notes.push_back("leader AGENT_" + std::to_string(leader_) + " lost; AGENT_" + std::to_string(a.id) +
                                      " takes over");
                leader_ = a.id;
                return leader_;
            }
        }
        return 0;
    }

    std::string chat_of(int id) const { return join_lines(inbox_[static_cast<std::size_t>(id)]); }

    void camon()
    {
        const auto ids = planners();
        if (ids.empty()) return;
        refresh_perceptions(ids);
        const std::string task = ep_.level.task_description();
        for (int id : ids) {
            auto& a = agent(id);
            if (!a.idle() || a.aboard != 0) continue; // assigned earlier this tick
            const int leader = live_leader();
            if (leader == 0) return;
            std::vector<Task> tasks;
            if (id == leader) {
                const auto prompt = fill(std::string(kCamonPlan),
                                         {{"{NAME}", a.name()},
                                          {"{TYPE}", kind_label(a.kind)},
                                          {"{TEAM}", team()},
                                          {"{TASK}", task},
                                          {"{PAST}", join_lines(a.action_history)},
                                          {"{CHAT}", chat_of(id)},
                                          {"{GLOBAL}", global_data()},
                                          {"{POS}", to_string(a.pos)},
                                          {"{ABILITIES}", team_abilities()}});
                const auto reply = call(id, CallPurpose::Plan, prompt);
                tasks.push_back({id, extract_tag(reply, "action")});
                leader_extras(id, reply, id, tasks);
            } else {
                const auto propose = fill(std::string(kCamonPropose),
                                          {{"{NAME}", a.name()},
                                           {"{TYPE}", kind_label(a.kind)},
                                           {"{W}", std::to_string(ep_.world.width)},
                                           {"{H}", std::to_string(ep_.world.height)},
                                           {"{N}", std::to_string(ep_.agents.size())},
                                           {"{TEAM}", team()},
                                           {"{PERCEPTION}", perception_[static_cast<std::size_t>(id)]},
                                           {"{TASK}", task},
                                           {"{PAST}", join_lines(a.action_history)},
                                           {"{CHAT}", chat_of(id)},
                                           {"{ABILITIES}", abilities(a.kind)}});
                const auto proposal = extract_tag(call(id, CallPurpose::Propose, propose), "action");
                const auto& lead = agent(leader);
                const auto review = fill(std::string(kCamonReview),
                                         {{"{NAME}", lead.name()},
                                          {"{TEAM}", team()},
                                          {"{TASK}", task},
                                          {"{GLOBAL}", global_data()},
                                          {"{OTHER_TYPE}", kind_label(a.kind)},
                                          {"{OTHER}", a.name()},
                                          {"{PROPOSAL}", proposal.empty() ? std::string("none") : proposal},
                                          {"{ABILITIES}", team_abilities()}});
                const auto reply = call(leader, CallPurpose::Review, review);
                const auto decision = upper(extract_tag(reply, "decision"));
                auto action = extract_tag(reply, "action");
                const bool accept = decision.find("ACCEPT") != std::string::npos;
                if (action.empty() && accept) action = proposal;
                rec_->notes.push_back("AGENT_" + std::to_string(leader) + " " + (accept ? "accepted" : "rejected") +
                                      " AGENT_" + std::to_string(id) + " proposal");
                tasks.push_back({id, action});
                const auto msg = extract_tag(reply, "message");
                if (!msg.empty()) deliver(leader, id, msg);
                leader_extras(leader, reply, id, tasks);
                leader_ = id;
            }
            apply(std::move(tasks));
        }
    }

    void coela()
    {
        const auto ids = planners();
        if (ids.empty()) return;
        refresh_perceptions(ids);
        const std::string task = ep_.level.task_description();
        const std::string chat = join_lines(chat_);
        const std::string composition = team();
        auto proposals = phase(ids, CallPurpose::Message, [&](int id) {
            const auto& a = agent(id);
            const auto prompt = fill(std::string(kCoelaMessage), {{"{NAME}", a.name()},
                                                                  {"{TYPE}", kind_label(a.kind)},
                                                                  {"{TEAM}", composition},
                                                                  {"{TASK}", task},
                                                                  {"{PERCEPTION}", perception_[static_cast<std::size_t>(id)]},
                                                                  {"{CHAT}", chat},
                                                                  {"{PAST}", join_lines(a.action_history)}});
            return extract_tag(call_in_phase(CallPurpose::Message, prompt), "message");
        });
        auto chosen = phase(ids, CallPurpose::Action, [&](int id) {
            const auto& a = agent(id);
            const std::size_t k = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
            const auto prompt = fill(std::string(kCoelaAction), {{"{NAME}", a.name()},
                                                                 {"{TYPE}", kind_label(a.kind)},
                                                                 {"{TEAM}", composition},
                                                                 {"{TASK}", task},
                                                                 {"{PERCEPTION}", perception_[static_cast<std::size_t>(id)]},
                                                                 {"{CHAT}", chat},
                                                                 {"{PAST}", join_lines(a.action_history)},
                                                                 {"{POS}", to_string(a.pos)},
                                                                 {"{PROPOSED}", proposals[k]},
                                                                 {"{ABILITIES}", abilities(a.kind)}});
            return extract_tag(call_in_phase(CallPurpose::Action, prompt), "action");
        });
        std::vector<Task> tasks;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (chosen[i].find("SEND MESSAGE") != std::string::npos) {
                const std::string line = "AGENT_" + std::to_string(ids[i]) + ": " + proposals[i];
                chat_.push_back(line);
                rec_->messages.push_back(line);
                for (auto& a : ep_.agents) a.message_history.push_back(line);
                tasks.push_back({ids[i], "Do nothing"});
            } else {
                tasks.push_back({ids[i], chosen[i]});
            }
        }
        apply(std::move(tasks));
    }

    void embodied()
    {
        const auto ids = planners();
        if (ids.empty()) return;
        refresh_perceptions(ids);
        const std::string task = ep_.level.task_description();
        const std::string composition = team();
        for (int round = 0; round < cfg_.embodied_rounds; ++round) {
            auto replies = phase(ids, CallPurpose::Message, [&](int id) {
                const auto& a = agent(id);
                const auto prompt = fill(std::string(kEmbodiedMessages),
                                         {{"{NAME}", a.name()},
                                          {"{TYPE}", kind_label(a.kind)},
                                          {"{TEAM}", composition},
                                          {"{TASK}", task},
                                          {"{PERCEPTION}", perception_[static_cast<std::size_t>(id)]},
                                          {"{PAST}", join_lines(a.action_history)},
                                          {"{CHAT}", chat_of(id)}});
                return call_in_phase(CallPurpose::Message, prompt);
            });
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const int from = ids[i];
                for (const auto& t : extract_recipient_tags(replies[i], true)) {
                    if (t.text.empty()) continue;
                    if (t.agent == 0) {
                        const std::string line = "AGENT_" + std::to_string(from) + " to GLOBAL: " + t.text;
                        for (auto& a : ep_.agents) {
                            inbox_[static_cast<std::size_t>(a.id)].push_back(line);
                            a.message_history.push_back(line);
                        }
                        rec_->messages.push_back(line);
                    } else if (!valid_id(t.agent)) {
                        note_unknown(t.agent);
                    } else {
                        deliver(from, t.agent, t.text);
                    }
                }
            }
        }
        auto actions = phase(ids, CallPurpose::Action, [&](int id) {
            const auto& a = agent(id);
            const auto prompt = fill(std::string(kEmbodiedAction),
                                     {{"{NAME}", a.name()},
                                      {"{TYPE}", kind_label(a.kind)},
                                      {"{TASK}", task},
                                      {"{PERCEPTION}", perception_[static_cast<std::size_t>(id)]},
                                      {"{CHAT}", chat_of(id)},
                                      {"{PAST}", join_lines(a.action_history)},
                                      {"{POS}", to_string(a.pos)},
                                      {"{ABILITIES}", abilities(a.kind)}});
            return extract_tag(call_in_phase(CallPurpose::Action, prompt), "action");
        });
        std::vector<Task> tasks;
        for (std::size_t i = 0; i < ids.size(); ++i) tasks.push_back({ids[i], actions[i]});
        apply(std::move(tasks));
    }

    void hmas()
    {
        const auto ids = planners();
        if (ids.empty()) return;
        refresh_perceptions(ids);
        const int leader = live_leader();
        if (leader == 0) return;
        const std::string task = ep_.level.task_description();
        const std::string state = global_state();
        const std::string history = history_text();
        std::vector<int> reviewers;
        for (const auto& a : ep_.agents) {
            if (a.alive) reviewers.push_back(a.id);
        }
        std::vector<std::string> review;
        std::string plan;
        bool valid = false;
        for (int round = 0; round < cfg_.hmas_iteration_cap && !valid; ++round) {
            std::string review_block;
            if (!review.empty()) review_block = "\nFeedback on your previous plan:\n\n" + join_lines(review) + "\n---\n";
            plan = call(leader, CallPurpose::Plan,
                        fill(std::string(kHmasPlan),
                             {{"{TASK}", task}, {"{HISTORY}", history}, {"{STATE}", state}, {"{REVIEW}", review_block}}));
            review.clear();
            auto feedback = phase(reviewers, CallPurpose::Review, [&](int id) {
                const auto& a = agent(id);
                const auto prompt = fill(std::string(kHmasFeedback), {{"{NAME}", a.name()},
                                                                      {"{TYPE}", kind_label(a.kind)},
                                                                      {"{TASK}", task},
                                                                      {"{HISTORY}", history},
                                                                      {"{STATE}", state},
                                                                      {"{PLAN}", plan},
                                                                      {"{POS}", to_string(a.pos)}});
                const auto reply = call_in_phase(CallPurpose::Review, prompt);
                const auto tag = extract_tag(reply, "feedback");
                return tag.empty() ? strip_quotes(reply) : tag;
            });
            valid = true;
            for (std::size_t i = 0; i < reviewers.size(); ++i) {
                if (upper(feedback[i]).rfind("ACCEPT", 0) == 0) continue;
                valid = false;
                review.push_back("AGENT_" + std::to_string(reviewers[i]) + ": " + feedback[i]);
            }
        }
        if (!valid) rec_->notes.push_back("plan_cap_reached");
        const std::set<int> idle(ids.begin(), ids.end());
        std::vector<Task> tasks;
        std::string actions_line;
        for (const auto& t : extract_recipient_tags(plan, false)) {
            if (!valid_id(t.agent)) {
                note_unknown(t.agent);
                continue;
            }
            if (!idle.count(t.agent)) continue;
            tasks.push_back({t.agent, t.text});
            actions_line += "\nAGENT_" + std::to_string(t.agent) + ": " + t.text;
        }
        apply(std::move(tasks));
        std::string entry = "Step " + std::to_string(ep_.world.step) + "\nState:";
        for (const auto& a : ep_.agents) {
            entry += "\n" + a.name() + " at " + to_string(a.pos) + ": " + perception_[static_cast<std::size_t>(a.id)];
        }
        entry += "\nActions:" + (actions_line.empty() ? std::string("\nnone") : actions_line);
        step_history_.push_back(std::move(entry));
        const auto window = static_cast<std::size_t>(std::max(0, cfg_.hmas_history_window));
        while (step_history_.size() > window) step_history_.erase(step_history_.begin());
    }

    FrameworkKind fw_;
    Episode& ep_;
    const FrameworkConfig& cfg_;
    LanguageModel* inner_ = nullptr;
    std::unique_ptr<TapLm> tap_;
    StepRecord* rec_ = nullptr;
    std::vector<std::string> perception_;
    std::vector<std::vector<std::string>> inbox_; // per-agent M_a
    std::vector<std::string> chat_;               // shared COELA M
    std::vector<std::string> step_history_;
    int leader_ = 1;
};

bool any_busy(const std::vector<Agent>& agents)
{
    return std::any_of(agents.begin(), agents.end(), [](const Agent& a) { return a.alive && a.active.has_value(); });
}

} // namespace

EpisodeResult run_episode(FrameworkKind fw, Episode& ep, LanguageModel* lm, const FrameworkConfig& cfg,
                          std::ostream* log, std::string_view lm_spec)
{
    RunLogWriter writer(log);
    writer.write(header_record(fw, ep, lm_spec, cfg));
    Runner runner(fw, ep, lm, cfg);
    StepOptions opts;
    opts.fire_exec.threads = cfg.fire_threads;

    EpisodeResult result;
    const auto start = runner.telemetry();
    Score s = score(ep.level, ep.world);
    result.op_precondition = op_precondition(ep.world, ep.agents);
    while (true) {
        const auto reason = termination_reason(ep.level, ep.world, s, ep.world.step, any_busy(ep.agents));
        if (reason != TerminationReason::None) {
            result.reason = reason;
            break;
        }
        StepRecord rec;
        rec.t = ep.world.step;
        const auto before = runner.telemetry();
        try {
            runner.plan(rec);
        } catch (const LmError& e) {
            result.aborted = true;
            result.abort_reason = e.what();
            result.reason = TerminationReason::Aborted;
            break;
        }
        auto step = world_step(ep.world, ep.agents, ep.fire, ep.params, opts);
        s = score(ep.level, ep.world);
        rec.events = std::move(step.events);
        rec.fire = std::move(step.fire);
        rec.score = s;
        rec.telemetry = runner.telemetry() - before;
        rec.digest = hex_digest(state_digest(ep.world, ep.agents));
        result.per_step.push_back(rec.telemetry);
        result.op_precondition = result.op_precondition || op_precondition(ep.world, ep.agents);
        writer.write(step_record(rec, cfg.log_prompts));
    }
    result.final_score = s;
    result.steps = ep.world.step;
    result.telemetry = runner.telemetry() - start;
    writer.write(footer_record(result));
    result.log_digest = writer.digest();
    return result;
}

ReplayReport replay_log(std::istream& in)
{
    ReplayReport report;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty run log");
    const auto header = json::parse(line);
    if (header.value("type", "") != "header") throw std::runtime_error("run log does not start with a header record");

    LevelOverrides ov;
    GenConfig gen;
    from_json(header.at("gen"), gen);
    FireConfig fire;
    from_json(header.at("fire"), fire);
    AgentParams params;
    from_json(header.at("agents"), params);
    ov.gen = gen;
    ov.fire = fire;
    ov.agents = params;
    ov.max_steps = header.at("max_steps").get<int>();
    ov.roster = roster_from_json(header.at("roster"));
    FrameworkConfig fcfg;
    if (header.contains("framework_config")) from_json(header.at("framework_config"), fcfg);

    Episode ep = build_level(header.at("level").get<std::string>(), header.at("seed").get<std::uint64_t>(), ov);
    if (hex_digest(state_digest(ep.world, ep.agents)) != header.value("initial_digest", "")) {
        report.mismatches.push_back("initial state differs from the header digest");
    }
    StepOptions opts;
    opts.fire_exec.threads = fcfg.fire_threads;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto rec = json::parse(line);
        const auto type = rec.value("type", "");
        if (type == "footer") {
            const Score s = score(ep.level, ep.world);
            const double logged = rec.at("final_score").get<double>();
            report.footer_ok = std::abs(logged - s.value) < 1e-9 && rec.value("steps", std::int64_t{-1}) == ep.world.step;
            if (!report.footer_ok) report.mismatches.push_back("footer score or step count differs");
            break;
        }
        if (type != "step") continue;
        ++report.steps;
        const auto t = rec.at("t").get<std::int64_t>();
        if (t != ep.world.step) {
            report.mismatches.push_back("step " + std::to_string(t) + " out of order");
            continue;
        }
        for (const auto& aj : rec.at("assignments")) {
            const auto asg = assignment_from_json(aj);
            if (asg.agent < 1 || asg.agent > static_cast<int>(ep.agents.size())) {
                report.mismatches.push_back("step " + std::to_string(t) + " assigns unknown agent");
                continue;
            }
            assign_primitive(ep.agents[static_cast<std::size_t>(asg.agent) - 1], asg.prim);
        }
        world_step(ep.world, ep.agents, ep.fire, ep.params, opts);
        if (hex_digest(state_digest(ep.world, ep.agents)) == rec.at("digest").get<std::string>()) {
            ++report.verified;
        } else {
            report.mismatches.push_back("digest mismatch at step " + std::to_string(t));
        }
    }
    return report;
}

} // namespace wildfire
