#ifndef BEETS_NODE_HPP
#define BEETS_NODE_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "beets/agent.hpp"
#include "beets/router.hpp"
#include "beets/rpc.hpp"

namespace beets {

// One network participant: per-back-end tuple spaces with their rpc
// layers, the inter-space router, and the node's agents.
class Node : public AgentHost {
public:
    explicit Node(std::string id) : id_(std::move(id)) {
        router_.set_log([this](const std::string& line) { log(line); });
    }

    const std::string& id() const { return id_; }

    // Wires a named space ("ble", "udp") to a transport. Remote OUT
    // tuples stored here expire after remote_lifetime_ms.
    RpcCore& attach_space(const std::string& space_name, Backend& backend,
                          const std::string& key = "",
                          std::int64_t remote_lifetime_ms = 60000);

    TupleSpace& space(const std::string& name);
    RpcCore& rpc(const std::string& name);
    bool has_space(const std::string& name) const { return spaces_.count(name) > 0; }
    Router& router() { return router_; }

    // Remote operation on a space's broadcast medium.
    std::uint64_t submit(const std::string& space_name, Opcode op, const Tuple& t,
                         const RpcOptions& opts, RpcCore::Deliver deliver, std::int64_t now);

    // Host-local mirror operation (no broadcast, unlimited lifetime).
    void host_out(const std::string& space_name, const Tuple& t, std::int64_t now);

    void add_agent(const std::string& doc, std::int64_t now);
    AgentInstance* agent(const std::string& name);
    std::size_t agent_count() const { return agents_.size(); }

    // When enabled, an arriving ('AGENT', name, payload) tuple is
    // consumed and instantiated instead of stored.
    void enable_agent_install(bool on) { install_agents_ = on; }
    void set_rebroadcast_routes(bool on) { rebroadcast_routes_ = on; }

    // Serializes the named agent into an active tuple and broadcasts it.
    void migrate_agent(const std::string& agent_name, const std::string& space_name,
                       std::int64_t now);

    // Feeds a sensor reading to every agent as a sensor event.
    void inject_sensor(const std::string& sensor, double value, std::int64_t now);

    void tick(std::int64_t now);

    const std::vector<std::string>& log_lines() const { return log_; }

    // AgentHost
    void agent_out(const std::string& space, const Tuple& t, std::int64_t now) override;
    void agent_notify(const std::string& space, const Tuple& t, std::int64_t now) override;
    void agent_log(const std::string& line) override { log(line); }

private:
    struct SpaceCtx {
        std::unique_ptr<TupleSpace> space;
        std::unique_ptr<RpcCore> rpc;
    };

    void log(const std::string& line) { log_.push_back(line); }
    bool offer_to_agents(const std::string& space_name, const Tuple& t,
                         const ReceiveEnvelope& env);
    bool route_arrival(const std::string& space_name, const Tuple& t, std::int64_t now);

    std::string id_;
    std::map<std::string, SpaceCtx> spaces_;
    Router router_;
    std::vector<std::unique_ptr<AgentInstance>> agents_;
    std::map<std::string, double> sensor_prev_;
    bool install_agents_ = false;
    bool rebroadcast_routes_ = true;
    std::vector<std::string> log_;
};

}  // namespace beets

#endif
