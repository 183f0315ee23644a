#ifndef BEETS_ROUTER_HPP
#define BEETS_ROUTER_HPP

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "beets/expr.hpp"

namespace beets {

struct RouteRule {
    std::string id;
    std::string from_space;
    Pattern pattern;
    std::string to_space;
    enum Mode { Copy, Move } mode = Copy;
    int priority = 0;  // lower first
    std::vector<Expr> transform;  // optional rewrite template
};

struct RouteDecision {
    std::string to_space;
    Tuple tuple;
    RouteRule::Mode mode;
};

// First-match (priority, then id) rule-based routing between spaces.
// Mutations are serialized with routing decisions.
class Router {
public:
    // Applies the first matching rule; empty when none matches or the
    // transform misbehaves (logged via the log hook).
    std::vector<RouteDecision> apply_routes(const Tuple& t, const std::string& source,
                                            std::int64_t now) const;

    void add_rule(RouteRule rule);             // error on duplicate id
    void remove_rule(const std::string& id);   // error on unknown id
    std::vector<RouteRule> list_rules() const;

    void set_log(std::function<void(const std::string&)> log) { log_ = std::move(log); }

    // Parses {id, from, pattern, to, mode, priority, transform} JSON.
    static RouteRule parse_rule(const std::string& doc);

private:
    mutable std::mutex mu_;
    std::vector<RouteRule> rules_;  // kept sorted by (priority, id)
    std::function<void(const std::string&)> log_;
};

}  // namespace beets

#endif
