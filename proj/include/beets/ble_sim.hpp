#ifndef BEETS_BLE_SIM_HPP
#define BEETS_BLE_SIM_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "beets/rpc.hpp"

namespace beets {

struct RadioConfig {
    double P_t = 1.0;       // transmit power, mW
    double G_t = 1.0;       // antenna gains, dimensionless
    double G_r = 1.0;
    double lambda = 0.125;  // wavelength, m
    double P_0 = 4.0e-6;    // receive threshold, mW (threshold radius ~9.95 m)
    double shadowing_sigma = 0.0;  // log-normal shadowing std-dev, dB
};

struct TimingConfig {
    double t_sw = 100;   // channel dwell, ms
    double t_de = 2;     // switching dead time, ms
    double t_sn = 100;   // packet send period, ms
    double t_ad = 500;   // advertisement window, ms
    double t_adv = 500;  // min spacing between distinct messages, ms
};

struct Vec2 {
    double x = 0, y = 0;
};

double distance(const Vec2& a, const Vec2& b);

// P_t*G_t*G_r*(lambda/(2*pi*r))^2, as used by the reception model.
double friis_received_power(const RadioConfig& rc, double r);

// Closed-form p(N_r >= 1) with n = t_ad/t_sn: 1 - (1 - 1/3)^n in range,
// 0 out of range.
double analytic_p1(const TimingConfig& tc, bool in_range);

// Monte Carlo two-node reception probability with channel switching,
// dead times and the path-loss threshold. Deterministic per seed.
double simulate_link(const RadioConfig& rc, const TimingConfig& tc, double r,
                     int trials, std::uint64_t seed);

// 10*log10(P_r / 1 mW), clamped to [-127, +20].
double rssi_dbm(double power_mw);

// Shared advertisement medium for a set of simulated nodes. Broadcasts
// are registered with their full packet schedule and resolved once the
// advertisement window has elapsed, so overlapping transmissions can
// collide. Single-threaded, deterministic per seed.
class BleWorld {
public:
    using PositionFn = std::function<Vec2(std::int64_t now)>;

    struct Reception {
        std::string receiver;
        RawMessage raw;
        std::uint64_t tx_id = 0;
        double tx_start = 0;  // window start, for latency accounting
    };

    BleWorld(RadioConfig rc, TimingConfig tc, std::uint64_t seed);

    void add_node(const std::string& id, PositionFn position);
    std::vector<std::string> node_ids() const;

    // Registers a transmission over [now, now + t_ad]; returns its id.
    std::uint64_t broadcast(const std::string& sender,
                            const std::vector<std::uint8_t>& bytes, std::int64_t now);

    // Resolves every transmission whose window ended at or before now.
    std::vector<Reception> resolve_due(std::int64_t now);

    const TimingConfig& timing() const { return tc_; }
    const RadioConfig& radio() const { return rc_; }

private:
    struct Packet {
        double time;
        int channel;  // 37..39
    };
    struct Transmission {
        std::uint64_t id;
        std::string sender;
        std::vector<std::uint8_t> bytes;
        double start, end;
        std::vector<Packet> packets;
        bool resolved = false;
    };
    struct NodeState {
        std::string id;
        PositionFn position;
        std::mt19937_64 rng;
        double phase;                     // receiver dwell phase in [0, t_sw)
        std::vector<int> dwell_channels;  // extended lazily, deterministic
    };

    int dwell_channel(NodeState& n, long idx);
    void resolve(Transmission& tx, std::vector<Reception>& out);

    RadioConfig rc_;
    TimingConfig tc_;
    std::mt19937_64 rng_;
    std::uint64_t next_tx_ = 1;
    std::vector<NodeState> nodes_;
    std::vector<Transmission> active_;
};

// Registers a broadcast and resolves everything due by its window end.
// Returns the receptions belonging to this transmission only.
std::vector<BleWorld::Reception> deliver_broadcast(BleWorld& world,
                                                   const std::string& sender,
                                                   const std::vector<std::uint8_t>& bytes,
                                                   std::int64_t now);

}  // namespace beets

#endif
