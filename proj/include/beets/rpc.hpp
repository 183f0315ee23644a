#ifndef BEETS_RPC_HPP
#define BEETS_RPC_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "beets/codec.hpp"
#include "beets/fpe.hpp"
#include "beets/space.hpp"

namespace beets {

// Raw bytes as seen by a transport, before decrypt/decode.
struct RawMessage {
    std::vector<std::uint8_t> bytes;
    std::string sender;
    double rssi{0};  // dBm, 0 = unknown (wired transports)
    std::int64_t timestamp{0};
};

// Transport contract shared by the UDP back-end and the BLE simulator.
class Backend {
public:
    using ReceiveHook = std::function<void(const RawMessage&)>;

    virtual ~Backend() = default;
    virtual void send(const std::vector<std::uint8_t>& bytes) = 0;
    virtual void set_receive_hook(ReceiveHook hook) = 0;
    virtual std::size_t max_message_size() const = 0;
    // Minimum spacing between distinct messages (the advertisement
    // window for BLE); 0 = unlimited rate.
    virtual std::int64_t min_send_interval_ms() const { return 0; }
};

struct ReceiveEnvelope {
    WireMessage message;
    std::string sender;
    std::int64_t received_at{0};
    double rssi{0};
};

// Per-sender ring of recently seen sequence numbers.
class DedupState {
public:
    DedupState(std::size_t capacity = 8, std::int64_t window_ms = 10000)
        : capacity_(capacity), window_ms_(window_ms) {}

    // True if (sender, seq) was already seen within the window;
    // otherwise records it and returns false.
    bool check_duplicate(const std::string& sender, std::uint8_t seq, std::int64_t now);

private:
    struct Entry {
        std::uint8_t seq;
        std::int64_t first_seen;
    };
    std::size_t capacity_;
    std::int64_t window_ms_;
    std::map<std::string, std::deque<Entry>> seen_;
};

struct RpcConfig {
    std::string node_id;
    std::int64_t default_timeout_ms = 2000;
    std::int64_t remote_lifetime_ms = 60000;
    std::size_t send_queue_cap = 64;
    std::string key;  // empty = no encryption
};

struct RpcOptions {
    std::int64_t timeout_ms = -1;   // -1 = config default
    std::int64_t lifetime_ms = -1;  // -1 = config default / unlimited
};

struct RpcStats {
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t decode_errors = 0;
    std::uint64_t dropped = 0;
};

// The unreliable-broadcast request layer. All effects (space mutations,
// listener and request callbacks) are serialized on one logical
// dispatcher; callbacks must not block.
class RpcCore {
public:
    using Deliver = std::function<void(const std::optional<Tuple>&,
                                       const std::optional<ReceiveEnvelope>&)>;
    // Returns true to consume the tuple (remote OUT is then not stored).
    using Listener = std::function<bool(const Tuple&, const ReceiveEnvelope&)>;
    // Returns true to suppress local storage (tuple moved elsewhere).
    using RouteHook = std::function<bool(const Tuple&, const ReceiveEnvelope&)>;

    RpcCore(TupleSpace& space, Backend& backend, RpcConfig cfg);

    std::uint64_t submit_request(Opcode op, const Tuple& t, const RpcOptions& opts,
                                 Deliver deliver, std::int64_t now);

    void add_listener(Pattern p, Listener fn);
    // Catch-all filter offered every incoming tuple after listeners
    // (the agent bridge); its consume decision ORs with theirs.
    void set_agent_filter(Listener fn) { agent_filter_ = std::move(fn); }
    void set_route_hook(RouteHook hook) { route_hook_ = std::move(hook); }

    void handle_incoming(const ReceiveEnvelope& env, std::int64_t now);

    // Fires deliver(none, none) for every request past its deadline.
    std::size_t expire_requests(std::int64_t now);

    // Flushes the rate-limited send queue and expires requests.
    void tick(std::int64_t now);

    TupleSpace& space() { return space_; }
    const RpcConfig& config() const { return cfg_; }
    const RpcStats& stats() const { return stats_; }
    std::size_t pending_count() const;

private:
    struct Pending {
        std::uint64_t id;
        Opcode kind;
        Pattern pattern;
        std::int64_t deadline;
        Deliver deliver;
    };

    void on_raw(const RawMessage& raw);
    void enqueue_send(std::vector<std::uint8_t> bytes, std::int64_t now);
    void flush_sends(std::int64_t now);
    void broadcast(Opcode op, const Tuple& t, std::int64_t now);
    bool offer_listeners(const Tuple& t, const ReceiveEnvelope& env);

    TupleSpace& space_;
    Backend& backend_;
    RpcConfig cfg_;
    std::unique_ptr<FpeTables> tables_;

    mutable std::recursive_mutex mu_;
    std::uint8_t seq_ = 0;
    std::uint64_t next_id_ = 1;
    std::vector<Pending> pending_;
    std::vector<std::pair<Pattern, Listener>> listeners_;
    Listener agent_filter_;
    RouteHook route_hook_;
    DedupState dedup_;
    std::deque<std::vector<std::uint8_t>> send_queue_;
    std::int64_t next_send_at_ = 0;
    RpcStats stats_;
};

}  // namespace beets

#endif
