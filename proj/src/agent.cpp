#include "beets/agent.hpp"

#include "beets/space.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace beets {

namespace {

using nlohmann::json;

Pattern parse_pattern_elems(const std::string& inner, const std::string& where) {
    Pattern p;
    std::size_t i = 0;
    auto next_elem = [&]() -> std::string {
        std::string e;
        bool quoted = false;
        while (i < inner.size()) {
            char c = inner[i];
            if (c == '\'') quoted = !quoted;
            if (c == ',' && !quoted) {
                ++i;
                return e;
            }
            e.push_back(c);
            ++i;
        }
        return e;
    };
    while (i < inner.size()) {
        std::string e = next_elem();
        // trim
        while (!e.empty() && std::isspace(static_cast<unsigned char>(e.front()))) e.erase(e.begin());
        while (!e.empty() && std::isspace(static_cast<unsigned char>(e.back()))) e.pop_back();
        if (e.empty()) throw std::runtime_error("empty pattern element in " + where);
        if (e == "?") {
            p.emplace_back(Formal{});
        } else if (e.size() >= 2 && e.front() == '\'' && e.back() == '\'') {
            p.emplace_back(e.substr(1, e.size() - 2));
        } else {
            try {
                std::size_t end;
                double d = std::stod(e, &end);
                if (end == e.size()) {
                    p.push_back(classify_value(d));
                    continue;
                }
            } catch (const std::exception&) {
            }
            p.emplace_back(e);  // bare word = string literal
        }
    }
    if (p.empty() || p.size() > 4)
        throw std::runtime_error("pattern arity out of range in " + where);
    return p;
}

Selector parse_selector(const json& on, const std::string& where) {
    if (on.is_number()) {
        std::int64_t period = on.get<std::int64_t>();
        if (period <= 0) throw std::runtime_error("timer period must be > 0 in " + where);
        return TimerSelector{period};
    }
    if (!on.is_string()) throw std::runtime_error("selector must be string or number in " + where);
    std::string s = on.get<std::string>();
    if (s == "init") return InitSelector{};
    if (s.rfind("ts.", 0) == 0) {
        std::size_t colon = s.find(':');
        if (colon == std::string::npos || colon == 3)
            throw std::runtime_error("bad ts selector '" + s + "' in " + where);
        std::string space = s.substr(3, colon - 3);
        std::string rest = s.substr(colon + 1);
        if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')')
            throw std::runtime_error("bad ts selector pattern '" + s + "' in " + where);
        return TsSelector{space, parse_pattern_elems(rest.substr(1, rest.size() - 2), where)};
    }
    if (s.rfind("sensor.", 0) == 0) {
        std::size_t colon = s.find(':');
        SensorSelector sel;
        if (colon == std::string::npos) {
            sel.sensor = s.substr(7);
        } else {
            sel.sensor = s.substr(7, colon - 7);
            sel.condition = Expr::parse(s.substr(colon + 1));
        }
        if (sel.sensor.empty()) throw std::runtime_error("bad sensor selector '" + s + "' in " + where);
        return sel;
    }
    throw std::runtime_error("unknown selector '" + s + "' in " + where);
}

AgentAction parse_action(const json& a, const std::string& where) {
    if (!a.is_object() || !a.contains("type"))
        throw std::runtime_error("action must be an object with 'type' in " + where);
    std::string type = a.at("type").get<std::string>();
    AgentAction act;
    auto parse_template = [&](const json& tpl) {
        if (!tpl.is_array()) throw std::runtime_error("'tuple' must be an array in " + where);
        for (const json& e : tpl) {
            if (e.is_number())
                act.tuple.push_back(Expr::parse(e.dump()));
            else if (e.is_string())
                act.tuple.push_back(Expr::parse(e.get<std::string>()));
            else
                throw std::runtime_error("template element must be number or expression in " + where);
        }
    };
    if (type == "out" || type == "notify") {
        act.kind = type == "out" ? AgentAction::Out : AgentAction::Notify;
        act.space = a.at("space").get<std::string>();
        parse_template(a.at("tuple"));
        if (act.tuple.empty() || act.tuple.size() > 4)
            throw std::runtime_error("template arity out of range in " + where);
    } else if (type == "log") {
        act.kind = AgentAction::Log;
        parse_template(a.at("tuple"));
    } else if (type == "set") {
        act.kind = AgentAction::Set;
        act.var = a.at("var").get<std::string>();
        act.expr = Expr::parse(a.at("expr").get<std::string>());
    } else {
        throw std::runtime_error("unknown action type '" + type + "' in " + where);
    }
    return act;
}

Scalar json_to_scalar(const json& v, const std::string& where) {
    if (v.is_boolean()) return Scalar(v.get<bool>());
    if (v.is_number()) return Scalar(v.get<double>());
    if (v.is_string()) return Scalar(v.get<std::string>());
    throw std::runtime_error("variable must be scalar in " + where);
}

json scalar_to_json(const Scalar& s) {
    switch (s.index()) {
        case 0: return json(std::get<bool>(s));
        case 1: return json(std::get<double>(s));
        default: return json(std::get<std::string>(s));
    }
}

}  // namespace

AgentDefinition parse_agent(const std::string& doc) {
    json j;
    try {
        j = json::parse(doc);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("agent document is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("agent document must be an object");
    AgentDefinition def;
    def.name = j.value("name", "");
    if (def.name.empty()) throw std::runtime_error("agent needs a non-empty 'name'");
    if (j.contains("vars")) {
        if (!j.at("vars").is_object()) throw std::runtime_error("'vars' must be an object");
        for (auto& [k, v] : j.at("vars").items())
            def.vars[k] = json_to_scalar(v, "vars." + k);
    }
    if (!j.contains("rules") || !j.at("rules").is_array())
        throw std::runtime_error("agent needs a 'rules' array");
    std::size_t idx = 0;
    for (const json& r : j.at("rules")) {
        std::string where = "rules[" + std::to_string(idx++) + "]";
        if (!r.is_object() || !r.contains("on"))
            throw std::runtime_error(where + " must be an object with 'on'");
        AgentRule rule;
        rule.selector = parse_selector(r.at("on"), where);
        if (r.contains("if")) rule.condition = Expr::parse(r.at("if").get<std::string>());
        if (r.contains("do"))
            for (const json& a : r.at("do")) rule.actions.push_back(parse_action(a, where));
        if (r.contains("consume")) {
            const json& c = r.at("consume");
            if (c.is_boolean())
                rule.consume = c.get<bool>();
            else
                rule.consume = Expr::parse(c.get<std::string>());
        }
        rule.raw = r.dump();
        def.rules.push_back(std::move(rule));
    }
    return def;
}

AgentInstance::AgentInstance(AgentDefinition def, AgentHost& host)
    : def_(std::move(def)), host_(host), vars_(def_.vars) {}

void AgentInstance::start(std::int64_t now) {
    if (started_) return;
    started_ = true;
    for (std::size_t i = 0; i < def_.rules.size(); ++i)
        if (auto* t = std::get_if<TimerSelector>(&def_.rules[i].selector))
            timer_next_[i] = now + t->period_ms;
    AgentEvent ev;
    ev.cls = AgentEvent::Init;
    ev.time = now;
    dispatch_event(ev);
    init_fired_ = true;
}

ExprEnv AgentInstance::make_env(const AgentEvent& ev) const {
    ExprEnv env;
    env.vars = vars_;
    env.vars["time"] = Scalar(static_cast<double>(ev.time));
    if (ev.cls == AgentEvent::Ts) {
        env.vars["from"] = Scalar(ev.from);
        env.vars["rssi"] = Scalar(ev.rssi);
    }
    if (ev.cls == AgentEvent::Sensor) {
        env.vars["sensor"] = Scalar(ev.sensor);
        env.vars["sensor0"] = Scalar(ev.sensor0);
    }
    if (ev.tuple) env.tuple = &*ev.tuple;
    return env;
}

bool AgentInstance::match_selector(const AgentRule& rule, std::size_t rule_index,
                                   const AgentEvent& ev) const {
    switch (ev.cls) {
        case AgentEvent::Ts: {
            auto* sel = std::get_if<TsSelector>(&rule.selector);
            return sel && sel->space == ev.space && ev.tuple &&
                   beets::match_pattern(sel->pattern, *ev.tuple);
        }
        case AgentEvent::Sensor: {
            auto* sel = std::get_if<SensorSelector>(&rule.selector);
            if (!sel || sel->sensor != ev.sensor_name) return false;
            if (!sel->condition) return true;
            try {
                return scalar_truthy(sel->condition->eval(make_env(ev)));
            } catch (const std::exception&) {
                return false;  // eval error counts as no match
            }
        }
        case AgentEvent::Timer:
            // timer rules are matched by index from tick()
            return false;
        case AgentEvent::Init:
            return !init_fired_ && std::holds_alternative<InitSelector>(rule.selector);
    }
    return false;
}

bool AgentInstance::run_rule(const AgentRule& rule, const AgentEvent& ev,
                             DispatchResult& res) {
    ExprEnv env = make_env(ev);
    try {
        if (rule.condition && !scalar_truthy(rule.condition->eval(env))) return false;
    } catch (const std::exception& e) {
        host_.agent_log(def_.name + ": condition error: " + e.what());
        return false;
    }
    try {
        for (const AgentAction& act : rule.actions) {
            switch (act.kind) {
                case AgentAction::Out:
                case AgentAction::Notify: {
                    Tuple t;
                    for (const Expr& e : act.tuple) t.push_back(scalar_to_value(e.eval(env)));
                    if (act.kind == AgentAction::Out)
                        host_.agent_out(act.space, t, ev.time);
                    else
                        host_.agent_notify(act.space, t, ev.time);
                    break;
                }
                case AgentAction::Log: {
                    std::string line = def_.name + ":";
                    for (const Expr& e : act.tuple)
                        line += " " + scalar_to_string(e.eval(env));
                    host_.agent_log(line);
                    break;
                }
                case AgentAction::Set: {
                    Scalar v = act.expr->eval(env);
                    vars_[act.var] = v;
                    env.vars[act.var] = v;
                    break;
                }
            }
            ++res.actions_performed;
        }
    } catch (const std::exception& e) {
        // eval error aborts only this rule
        host_.agent_log(def_.name + ": action error: " + e.what());
        return true;
    }
    if (std::holds_alternative<TsSelector>(rule.selector)) {
        if (auto* flag = std::get_if<bool>(&rule.consume)) {
            res.consumed = res.consumed || *flag;
        } else {
            try {
                res.consumed = res.consumed ||
                               scalar_truthy(std::get<Expr>(rule.consume).eval(env));
            } catch (const std::exception& e) {
                host_.agent_log(def_.name + ": consume error: " + e.what());
            }
        }
    }
    return true;
}

DispatchResult AgentInstance::dispatch_event(const AgentEvent& ev) {
    DispatchResult res;
    for (std::size_t i = 0; i < def_.rules.size(); ++i) {
        const AgentRule& rule = def_.rules[i];
        if (!match_selector(rule, i, ev)) continue;
        run_rule(rule, ev, res);
    }
    return res;
}

void AgentInstance::tick(std::int64_t now) {
    if (!started_) return;
    for (auto& [idx, next] : timer_next_) {
        const AgentRule& rule = def_.rules[idx];
        std::int64_t period = std::get<TimerSelector>(rule.selector).period_ms;
        while (now >= next) {
            AgentEvent ev;
            ev.cls = AgentEvent::Timer;
            ev.time = next;
            DispatchResult res;
            run_rule(rule, ev, res);
            next += period;
        }
    }
}

std::string AgentInstance::serialize() const {
    json j;
    j["name"] = def_.name;
    json vars = json::object();
    for (const auto& [k, v] : vars_) vars[k] = scalar_to_json(v);
    j["vars"] = vars;
    json rules = json::array();
    for (const AgentRule& r : def_.rules) rules.push_back(json::parse(r.raw));
    j["rules"] = rules;
    return j.dump();
}

}  // namespace beets
