#include "beets/ble_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beets {

namespace {

// RNG helpers built on the fully specified mt19937_64 output so results
// are reproducible across standard library implementations.
double urand(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

int rand_channel(std::mt19937_64& g) { return 37 + static_cast<int>(g() % 3); }

double rand_normal(std::mt19937_64& g) {
    double u1 = urand(g), u2 = urand(g);
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double shadow_factor(const RadioConfig& rc, std::mt19937_64& g) {
    if (rc.shadowing_sigma <= 0) return 1.0;
    return std::pow(10.0, rc.shadowing_sigma * rand_normal(g) / 10.0);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdull;
    z ^= z >> 33;
    return z;
}

std::uint64_t hash_str(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

double friis_received_power(const RadioConfig& rc, double r) {
    if (r <= 0) throw std::runtime_error("bad distance");
    double x = rc.lambda / (2.0 * std::numbers::pi * r);
    return rc.P_t * rc.G_t * rc.G_r * x * x;
}

double analytic_p1(const TimingConfig& tc, bool in_range) {
    if (!in_range) return 0.0;
    double n = tc.t_ad / tc.t_sn;
    return 1.0 - std::pow(1.0 - 3.0 / 9.0, n);
}

double rssi_dbm(double power_mw) {
    if (power_mw <= 0) return -127.0;
    return std::clamp(10.0 * std::log10(power_mw), -127.0, 20.0);
}

double simulate_link(const RadioConfig& rc, const TimingConfig& tc, double r,
                     int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double base_power = friis_received_power(rc, r);
    int successes = 0;
    std::vector<int> dwell_channels;
    for (int trial = 0; trial < trials; ++trial) {
        double phase_r = urand(rng) * tc.t_sw;
        double phase_s = urand(rng) * tc.t_sn;
        dwell_channels.clear();
        bool sender_deaf = phase_s < tc.t_de;
        bool got_one = false;
        for (double t = phase_s; t < tc.t_ad; t += tc.t_sn) {
            int ch_s = rand_channel(rng);
            // receiver dwell index, shifted so the pre-phase dwell is 0
            long idx = static_cast<long>(std::floor((t - phase_r) / tc.t_sw)) + 1;
            while (dwell_channels.size() <= static_cast<std::size_t>(idx))
                dwell_channels.push_back(rand_channel(rng));
            if (got_one || sender_deaf) continue;
            double dwell_start = phase_r + (idx - 1) * tc.t_sw;
            if (t - dwell_start < tc.t_de) continue;  // receiver deaf
            if (dwell_channels[idx] != ch_s) continue;
            if (base_power * shadow_factor(rc, rng) < rc.P_0) continue;
            got_one = true;
        }
        if (got_one) ++successes;
    }
    return static_cast<double>(successes) / trials;
}

BleWorld::BleWorld(RadioConfig rc, TimingConfig tc, std::uint64_t seed)
    : rc_(rc), tc_(tc), rng_(seed) {
    if (tc_.t_ad < 3 * tc_.t_sw) throw std::runtime_error("t_ad must be >= 3*t_sw");
    if (tc_.t_de >= tc_.t_sw) throw std::runtime_error("t_de must be < t_sw");
}

void BleWorld::add_node(const std::string& id, PositionFn position) {
    NodeState n;
    n.id = id;
    n.position = std::move(position);
    n.rng.seed(mix(rng_(), hash_str(id)));
    n.phase = urand(n.rng) * tc_.t_sw;
    nodes_.push_back(std::move(n));
}

std::vector<std::string> BleWorld::node_ids() const {
    std::vector<std::string> ids;
    for (const auto& n : nodes_) ids.push_back(n.id);
    return ids;
}

int BleWorld::dwell_channel(NodeState& n, long idx) {
    while (n.dwell_channels.size() <= static_cast<std::size_t>(idx))
        n.dwell_channels.push_back(rand_channel(n.rng));
    return n.dwell_channels[idx];
}

std::uint64_t BleWorld::broadcast(const std::string& sender,
                                  const std::vector<std::uint8_t>& bytes,
                                  std::int64_t now) {
    Transmission tx;
    tx.id = next_tx_++;
    tx.sender = sender;
    tx.bytes = bytes;
    tx.start = static_cast<double>(now);
    tx.end = tx.start + tc_.t_ad;
    double phase_s = urand(rng_) * tc_.t_sn;
    bool sender_deaf = phase_s < tc_.t_de;
    for (double t = tx.start + phase_s; t < tx.end; t += tc_.t_sn) {
        int ch = rand_channel(rng_);
        if (!sender_deaf) tx.packets.push_back({t, ch});
    }
    active_.push_back(std::move(tx));
    return active_.back().id;
}

void BleWorld::resolve(Transmission& tx, std::vector<Reception>& out) {
    for (std::size_t ni = 0; ni < nodes_.size(); ++ni) {
        NodeState& rx = nodes_[ni];
        if (rx.id == tx.sender) continue;
        std::mt19937_64 link_rng(mix(mix(tx.id, ni), 0x5eedull));
        double shadow = shadow_factor(rc_, link_rng);
        for (const Packet& pk : tx.packets) {
            std::int64_t t_ms = static_cast<std::int64_t>(std::llround(pk.time));
            Vec2 rpos = rx.position(t_ms);
            auto sender_node = std::find_if(nodes_.begin(), nodes_.end(),
                                            [&](const NodeState& n) { return n.id == tx.sender; });
            double r = distance(sender_node->position(t_ms), rpos);
            if (r <= 0) r = 1e-3;
            double power = friis_received_power(rc_, r) * shadow;
            if (power < rc_.P_0) continue;
            long idx = static_cast<long>(std::floor((pk.time - rx.phase) / tc_.t_sw)) + 1;
            if (idx < 0) continue;
            double dwell_start = rx.phase + (idx - 1) * tc_.t_sw;
            if (pk.time - dwell_start < tc_.t_de) continue;  // receiver deaf
            if (dwell_channel(rx, idx) != pk.channel) continue;
            // collision: another in-range sender's packet on the same
            // channel within 1 ms invalidates both
            bool collided = false;
            for (const Transmission& other : active_) {
                if (other.id == tx.id || other.sender == tx.sender || other.sender == rx.id)
                    continue;
                auto other_node = std::find_if(nodes_.begin(), nodes_.end(),
                                               [&](const NodeState& n) { return n.id == other.sender; });
                if (other_node == nodes_.end()) continue;
                for (const Packet& q : other.packets) {
                    if (q.channel != pk.channel || std::abs(q.time - pk.time) > 1.0) continue;
                    double ro = distance(other_node->position(t_ms), rpos);
                    if (ro <= 0) ro = 1e-3;
                    if (friis_received_power(rc_, ro) >= rc_.P_0) {
                        collided = true;
                        break;
                    }
                }
                if (collided) break;
            }
            if (collided) continue;
            Reception rec;
            rec.receiver = rx.id;
            rec.tx_id = tx.id;
            rec.tx_start = tx.start;
            rec.raw.bytes = tx.bytes;
            rec.raw.sender = tx.sender;
            rec.raw.rssi = rssi_dbm(power);
            rec.raw.timestamp = t_ms;
            out.push_back(std::move(rec));
            break;  // one delivery per (transmission, receiver)
        }
    }
}

std::vector<BleWorld::Reception> BleWorld::resolve_due(std::int64_t now) {
    std::vector<Reception> out;
    for (Transmission& tx : active_)
        if (!tx.resolved && tx.end <= static_cast<double>(now)) {
            resolve(tx, out);
            tx.resolved = true;
        }
    // keep resolved transmissions around one extra window for collision
    // checks against late overlappers
    std::erase_if(active_, [&](const Transmission& tx) {
        return tx.resolved && tx.end + 2 * tc_.t_ad < static_cast<double>(now);
    });
    return out;
}

std::vector<BleWorld::Reception> deliver_broadcast(BleWorld& world,
                                                   const std::string& sender,
                                                   const std::vector<std::uint8_t>& bytes,
                                                   std::int64_t now) {
    world.broadcast(sender, bytes, now);
    std::int64_t horizon = now + static_cast<std::int64_t>(std::ceil(world.timing().t_ad));
    std::vector<BleWorld::Reception> all = world.resolve_due(horizon);
    std::vector<BleWorld::Reception> mine;
    for (auto& rec : all)
        if (rec.raw.sender == sender && rec.raw.bytes == bytes) mine.push_back(std::move(rec));
    return mine;
}

}  // namespace beets
