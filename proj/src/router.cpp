#include "beets/router.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

#include "beets/space.hpp"

namespace beets {

using nlohmann::json;

std::vector<RouteDecision> Router::apply_routes(const Tuple& t, const std::string& source,
                                                std::int64_t now) const {
    std::lock_guard lk(mu_);
    for (const RouteRule& r : rules_) {
        if (r.from_space != source || !match_pattern(r.pattern, t)) continue;
        RouteDecision d;
        d.to_space = r.to_space;
        d.mode = r.mode;
        if (r.transform.empty()) {
            d.tuple = t;
        } else {
            ExprEnv env;
            env.tuple = &t;
            env.vars["time"] = Scalar(static_cast<double>(now));
            try {
                for (const Expr& e : r.transform) d.tuple.push_back(scalar_to_value(e.eval(env)));
            } catch (const std::exception& e) {
                if (log_) log_("route " + r.id + ": transform error: " + e.what());
                return {};
            }
            if (d.tuple.empty() || d.tuple.size() > 4) {
                if (log_) log_("route " + r.id + ": transform arity out of range");
                return {};
            }
        }
        return {d};  // first match only
    }
    return {};
}

void Router::add_rule(RouteRule rule) {
    if (rule.from_space == rule.to_space)
        throw std::runtime_error("route must connect two different spaces");
    std::lock_guard lk(mu_);
    for (const RouteRule& r : rules_)
        if (r.id == rule.id) throw std::runtime_error("duplicate rule id '" + rule.id + "'");
    rules_.push_back(std::move(rule));
    std::stable_sort(rules_.begin(), rules_.end(), [](const RouteRule& a, const RouteRule& b) {
        return a.priority != b.priority ? a.priority < b.priority : a.id < b.id;
    });
}

void Router::remove_rule(const std::string& id) {
    std::lock_guard lk(mu_);
    auto it = std::find_if(rules_.begin(), rules_.end(),
                           [&](const RouteRule& r) { return r.id == id; });
    if (it == rules_.end()) throw std::runtime_error("no such rule");
    rules_.erase(it);
}

std::vector<RouteRule> Router::list_rules() const {
    std::lock_guard lk(mu_);
    return rules_;
}

RouteRule Router::parse_rule(const std::string& doc) {
    json j = json::parse(doc);
    RouteRule r;
    r.id = j.at("id").get<std::string>();
    r.from_space = j.at("from").get<std::string>();
    r.to_space = j.at("to").get<std::string>();
    std::string mode = j.value("mode", "copy");
    if (mode == "copy")
        r.mode = RouteRule::Copy;
    else if (mode == "move")
        r.mode = RouteRule::Move;
    else
        throw std::runtime_error("mode must be copy or move");
    r.priority = j.value("priority", 0);
    for (const json& e : j.at("pattern")) {
        if (e.is_string()) {
            std::string s = e.get<std::string>();
            if (s == "?")
                r.pattern.emplace_back(Formal{});
            else
                r.pattern.emplace_back(s);
        } else if (e.is_number()) {
            r.pattern.push_back(classify_value(e.get<double>()));
        } else {
            throw std::runtime_error("pattern element must be string or number");
        }
    }
    if (r.pattern.empty() || r.pattern.size() > 4)
        throw std::runtime_error("pattern arity out of range");
    if (j.contains("transform"))
        for (const json& e : j.at("transform"))
            r.transform.push_back(Expr::parse(e.is_string() ? e.get<std::string>() : e.dump()));
    return r;
}

}  // namespace beets
