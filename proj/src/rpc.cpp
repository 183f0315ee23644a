#include "beets/rpc.hpp"

#include <algorithm>
#include <stdexcept>

namespace beets {

bool DedupState::check_duplicate(const std::string& sender, std::uint8_t seq,
                                 std::int64_t now) {
    auto& ring = seen_[sender];
    std::erase_if(ring, [&](const Entry& e) { return now - e.first_seen > window_ms_; });
    for (const Entry& e : ring)
        if (e.seq == seq) return true;
    if (ring.size() >= capacity_) ring.pop_front();
    ring.push_back({seq, now});
    return false;
}

RpcCore::RpcCore(TupleSpace& space, Backend& backend, RpcConfig cfg)
    : space_(space), backend_(backend), cfg_(std::move(cfg)) {
    if (!cfg_.key.empty()) tables_ = std::make_unique<FpeTables>(derive_tables(cfg_.key));
    backend_.set_receive_hook([this](const RawMessage& raw) { on_raw(raw); });
}

std::uint64_t RpcCore::submit_request(Opcode op, const Tuple& t, const RpcOptions& opts,
                                      Deliver deliver, std::int64_t now) {
    std::lock_guard lk(mu_);
    if ((op == Opcode::RD || op == Opcode::INP) && !deliver)
        throw std::runtime_error("rd/inp require a callback");

    WireMessage m{op, seq_, t};
    seq_ = (seq_ + 1) & 0x3;
    std::vector<std::uint8_t> bytes = encode_message(m, backend_.max_message_size());
    if (tables_) bytes = fpe_encrypt(*tables_, bytes);

    // register before sending: a peer on the same thread may reply
    // synchronously from inside the send call
    std::uint64_t id = next_id_++;
    if (op == Opcode::RD || op == Opcode::INP) {
        std::int64_t timeout = opts.timeout_ms >= 0 ? opts.timeout_ms : cfg_.default_timeout_ms;
        pending_.push_back({id, op, t, now + timeout, std::move(deliver)});
    }
    try {
        enqueue_send(std::move(bytes), now);
    } catch (...) {
        std::erase_if(pending_, [&](const Pending& p) { return p.id == id; });
        throw;
    }
    return id;
}

void RpcCore::enqueue_send(std::vector<std::uint8_t> bytes, std::int64_t now) {
    std::int64_t interval = backend_.min_send_interval_ms();
    if (send_queue_.empty() && now >= next_send_at_) {
        backend_.send(bytes);
        ++stats_.sent;
        next_send_at_ = now + interval;
        return;
    }
    if (send_queue_.size() >= cfg_.send_queue_cap)
        throw std::runtime_error("send queue full");
    send_queue_.push_back(std::move(bytes));
}

void RpcCore::flush_sends(std::int64_t now) {
    std::int64_t interval = backend_.min_send_interval_ms();
    while (!send_queue_.empty() && now >= next_send_at_) {
        backend_.send(send_queue_.front());
        send_queue_.pop_front();
        ++stats_.sent;
        next_send_at_ = now + interval;
    }
}

void RpcCore::tick(std::int64_t now) {
    std::lock_guard lk(mu_);
    flush_sends(now);
    expire_requests(now);
}

void RpcCore::on_raw(const RawMessage& raw) {
    std::vector<std::uint8_t> bytes = raw.bytes;
    if (tables_) bytes = fpe_decrypt(*tables_, bytes);
    ReceiveEnvelope env;
    try {
        env.message = decode_message(bytes);
    } catch (const std::exception&) {
        std::lock_guard lk(mu_);
        ++stats_.decode_errors;
        return;
    }
    env.sender = raw.sender;
    env.received_at = raw.timestamp;
    env.rssi = raw.rssi;
    handle_incoming(env, raw.timestamp);
}

bool RpcCore::offer_listeners(const Tuple& t, const ReceiveEnvelope& env) {
    bool consumed = false;
    for (auto& [pattern, fn] : listeners_)
        if (match_pattern(pattern, t))
            consumed = fn(t, env) || consumed;
    if (agent_filter_) consumed = agent_filter_(t, env) || consumed;
    return consumed;
}

void RpcCore::broadcast(Opcode op, const Tuple& t, std::int64_t now) {
    try {
        submit_request(op, t, {}, nullptr, now);
    } catch (const std::exception&) {
        ++stats_.dropped;  // oversize reply or full queue: best effort only
    }
}

void RpcCore::handle_incoming(const ReceiveEnvelope& env, std::int64_t now) {
    std::lock_guard lk(mu_);
    ++stats_.received;
    if (dedup_.check_duplicate(env.sender, env.message.seq, now)) {
        ++stats_.duplicates;
        return;
    }
    const Tuple& t = env.message.tuple;
    switch (env.message.op) {
        case Opcode::OUT: {
            bool consumed = offer_listeners(t, env);
            if (!consumed) {
                bool moved = route_hook_ && route_hook_(t, env);
                if (!moved)
                    space_.out(t, cfg_.remote_lifetime_ms, now, env.sender);
            }
            break;
        }
        case Opcode::RD: {
            if (auto found = space_.rd(t, now)) broadcast(Opcode::TUPLE, *found, now);
            break;
        }
        case Opcode::INP: {
            // A suggestion only: we remove our copy and reply, with no
            // distributed atomicity.
            if (auto found = space_.inp(t, now)) broadcast(Opcode::TUPLE, *found, now);
            break;
        }
        case Opcode::TEST: {
            if (auto found = space_.rd(t, now)) broadcast(Opcode::TUPLE, *found, now);
            break;
        }
        case Opcode::TUPLE: {
            // Complete the oldest matching pending request, else offer to
            // listeners. Never stored.
            auto it = std::find_if(pending_.begin(), pending_.end(), [&](const Pending& p) {
                return match_pattern(p.pattern, t);
            });
            if (it != pending_.end()) {
                Deliver deliver = std::move(it->deliver);
                pending_.erase(it);
                deliver(t, env);
            } else if (!offer_listeners(t, env)) {
                ++stats_.dropped;
            }
            break;
        }
        case Opcode::WHEREIS: {
            broadcast(Opcode::IAMHERE, Tuple{Value(cfg_.node_id)}, now);
            break;
        }
        case Opcode::IAMHERE: {
            if (!offer_listeners(t, env)) ++stats_.dropped;
            break;
        }
    }
}

void RpcCore::add_listener(Pattern p, Listener fn) {
    std::lock_guard lk(mu_);
    listeners_.emplace_back(std::move(p), std::move(fn));
}

std::size_t RpcCore::expire_requests(std::int64_t now) {
    std::lock_guard lk(mu_);
    std::vector<Pending> expired;
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (now >= it->deadline) {
            expired.push_back(std::move(*it));
            it = pending_.erase(it);
        } else {
            ++it;
        }
    }
    for (Pending& p : expired) p.deliver(std::nullopt, std::nullopt);
    return expired.size();
}

std::size_t RpcCore::pending_count() const {
    std::lock_guard lk(mu_);
    return pending_.size();
}

}  // namespace beets
