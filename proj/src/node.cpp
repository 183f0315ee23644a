#include "beets/node.hpp"

#include <stdexcept>

namespace beets {

RpcCore& Node::attach_space(const std::string& space_name, Backend& backend,
                            const std::string& key, std::int64_t remote_lifetime_ms) {
    if (spaces_.count(space_name)) throw std::runtime_error("space already attached");
    SpaceCtx ctx;
    ctx.space = std::make_unique<TupleSpace>(space_name);
    RpcConfig cfg;
    cfg.node_id = id_;
    cfg.key = key;
    cfg.remote_lifetime_ms = remote_lifetime_ms;
    ctx.rpc = std::make_unique<RpcCore>(*ctx.space, backend, cfg);
    ctx.rpc->set_agent_filter([this, space_name](const Tuple& t, const ReceiveEnvelope& env) {
        return offer_to_agents(space_name, t, env);
    });
    ctx.rpc->set_route_hook([this, space_name](const Tuple& t, const ReceiveEnvelope& env) {
        return route_arrival(space_name, t, env.received_at);
    });
    auto [it, ok] = spaces_.emplace(space_name, std::move(ctx));
    return *it->second.rpc;
}

TupleSpace& Node::space(const std::string& name) {
    auto it = spaces_.find(name);
    if (it == spaces_.end()) throw std::runtime_error("no such space '" + name + "'");
    return *it->second.space;
}

RpcCore& Node::rpc(const std::string& name) {
    auto it = spaces_.find(name);
    if (it == spaces_.end()) throw std::runtime_error("no such space '" + name + "'");
    return *it->second.rpc;
}

std::uint64_t Node::submit(const std::string& space_name, Opcode op, const Tuple& t,
                           const RpcOptions& opts, RpcCore::Deliver deliver,
                           std::int64_t now) {
    return rpc(space_name).submit_request(op, t, opts, std::move(deliver), now);
}

void Node::host_out(const std::string& space_name, const Tuple& t, std::int64_t now) {
    space(space_name).out(t, -1, now, "local");
}

void Node::add_agent(const std::string& doc, std::int64_t now) {
    auto inst = std::make_unique<AgentInstance>(parse_agent(doc), *this);
    inst->start(now);
    agents_.push_back(std::move(inst));
}

AgentInstance* Node::agent(const std::string& name) {
    for (auto& a : agents_)
        if (a->name() == name) return a.get();
    return nullptr;
}

void Node::migrate_agent(const std::string& agent_name, const std::string& space_name,
                         std::int64_t now) {
    AgentInstance* a = agent(agent_name);
    if (!a) throw std::runtime_error("no such agent '" + agent_name + "'");
    Tuple t{Value(std::string("AGENT")), Value(agent_name), Value(a->serialize())};
    try {
        submit(space_name, Opcode::OUT, t, {}, nullptr, now);
    } catch (const std::exception& e) {
        if (std::string(e.what()) == "oversize message")
            throw std::runtime_error("agent too large for transport");
        throw;
    }
}

bool Node::offer_to_agents(const std::string& space_name, const Tuple& t,
                           const ReceiveEnvelope& env) {
    // active tuple: install the carried agent instead of storing it
    if (install_agents_ && t.size() == 3 &&
        std::holds_alternative<std::string>(t[0]) && std::get<std::string>(t[0]) == "AGENT" &&
        std::holds_alternative<std::string>(t[1]) && std::holds_alternative<std::string>(t[2])) {
        try {
            add_agent(std::get<std::string>(t[2]), env.received_at);
            return true;
        } catch (const std::exception& e) {
            log(id_ + ": agent install failed: " + e.what());
            return false;
        }
    }
    AgentEvent ev;
    ev.cls = AgentEvent::Ts;
    ev.space = space_name;
    ev.tuple = t;
    ev.from = env.sender;
    ev.rssi = env.rssi;
    ev.time = env.received_at;
    bool consumed = false;
    for (auto& a : agents_)
        consumed = a->dispatch_event(ev).consumed || consumed;
    return consumed;
}

bool Node::route_arrival(const std::string& space_name, const Tuple& t, std::int64_t now) {
    bool moved = false;
    for (const RouteDecision& d : router_.apply_routes(t, space_name, now)) {
        auto it = spaces_.find(d.to_space);
        if (it == spaces_.end()) {
            log(id_ + ": route to unknown space '" + d.to_space + "'");
            continue;
        }
        it->second.space->out(d.tuple, it->second.rpc->config().remote_lifetime_ms, now,
                              "router");
        if (rebroadcast_routes_) {
            try {
                it->second.rpc->submit_request(Opcode::OUT, d.tuple, {}, nullptr, now);
            } catch (const std::exception& e) {
                log(id_ + ": route rebroadcast failed: " + e.what());
            }
        }
        if (d.mode == RouteRule::Move) moved = true;
    }
    return moved;
}

void Node::inject_sensor(const std::string& sensor, double value, std::int64_t now) {
    AgentEvent ev;
    ev.cls = AgentEvent::Sensor;
    ev.sensor_name = sensor;
    ev.sensor = value;
    auto it = sensor_prev_.find(sensor);
    ev.sensor0 = it == sensor_prev_.end() ? value : it->second;
    ev.time = now;
    sensor_prev_[sensor] = value;
    for (auto& a : agents_) a->dispatch_event(ev);
}

void Node::tick(std::int64_t now) {
    for (auto& [name, ctx] : spaces_) {
        ctx.rpc->tick(now);
        ctx.space->expire_sweep(now);
    }
    for (auto& a : agents_) a->tick(now);
}

void Node::agent_out(const std::string& space, const Tuple& t, std::int64_t now) {
    try {
        submit(space, Opcode::OUT, t, {}, nullptr, now);
    } catch (const std::exception& e) {
        log(id_ + ": agent out failed: " + e.what());
    }
}

void Node::agent_notify(const std::string& space, const Tuple& t, std::int64_t now) {
    try {
        submit(space, Opcode::TUPLE, t, {}, nullptr, now);
    } catch (const std::exception& e) {
        log(id_ + ": agent notify failed: " + e.what());
    }
}

}  // namespace beets
