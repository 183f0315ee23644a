#ifndef BEETS_AGENT_HPP
#define BEETS_AGENT_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "beets/expr.hpp"

namespace beets {

struct TsSelector {
    std::string space;
    Pattern pattern;
};
struct SensorSelector {
    std::string sensor;
    std::optional<Expr> condition;
};
struct TimerSelector {
    std::int64_t period_ms;
};
struct InitSelector {};

using Selector = std::variant<TsSelector, SensorSelector, TimerSelector, InitSelector>;

struct AgentAction {
    enum Kind { Out, Notify, Log, Set } kind;
    std::string space;            // Out/Notify target space
    std::vector<Expr> tuple;      // Out/Notify/Log template
    std::string var;              // Set
    std::optional<Expr> expr;     // Set
};

struct AgentRule {
    Selector selector;
    std::optional<Expr> condition;
    std::vector<AgentAction> actions;
    std::variant<bool, Expr> consume{false};
    std::string raw;  // original JSON, kept for serialization
};

struct AgentDefinition {
    std::string name;
    std::map<std::string, Scalar> vars;
    std::vector<AgentRule> rules;
};

struct AgentEvent {
    enum Class { Ts, Sensor, Timer, Init } cls;
    std::string space;  // ts events
    std::optional<Tuple> tuple;
    std::string from;
    double rssi = 0;
    std::int64_t time = 0;
    std::string sensor_name;  // sensor events
    double sensor = 0, sensor0 = 0;
};

// The closed action vocabulary: agents can only emit tuples on named
// spaces, log, and mutate their own variables.
class AgentHost {
public:
    virtual ~AgentHost() = default;
    virtual void agent_out(const std::string& space, const Tuple& t, std::int64_t now) = 0;
    virtual void agent_notify(const std::string& space, const Tuple& t, std::int64_t now) = 0;
    virtual void agent_log(const std::string& line) = 0;
};

// Parses the JSON agent document: {name, vars, rules:[{on, if, do, consume}]}.
AgentDefinition parse_agent(const std::string& doc);

struct DispatchResult {
    int actions_performed = 0;
    bool consumed = false;
};

class AgentInstance {
public:
    AgentInstance(AgentDefinition def, AgentHost& host);

    // Fires init rules exactly once and arms timers.
    void start(std::int64_t now);

    DispatchResult dispatch_event(const AgentEvent& ev);

    // Fires due timer rules.
    void tick(std::int64_t now);

    // Snapshot with current variable values; parse_agent accepts it.
    std::string serialize() const;

    const std::string& name() const { return def_.name; }
    const std::map<std::string, Scalar>& vars() const { return vars_; }
    const AgentDefinition& definition() const { return def_; }

    bool match_selector(const AgentRule& rule, std::size_t rule_index,
                        const AgentEvent& ev) const;

private:
    ExprEnv make_env(const AgentEvent& ev) const;
    bool run_rule(const AgentRule& rule, const AgentEvent& ev, DispatchResult& res);

    AgentDefinition def_;
    AgentHost& host_;
    std::map<std::string, Scalar> vars_;
    bool started_ = false;
    bool init_fired_ = false;
    std::map<std::size_t, std::int64_t> timer_next_;  // rule index -> next fire
};

}  // namespace beets

#endif
