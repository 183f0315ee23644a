#ifndef BEETS_SIM_HPP
#define BEETS_SIM_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "beets/ble_sim.hpp"
#include "beets/router.hpp"

namespace beets {

struct Waypoint {
    std::int64_t t;
    Vec2 pos;
};

// Piecewise-linear position over the waypoint list; clamped outside it.
Vec2 position_at(const std::vector<Waypoint>& wps, std::int64_t t);

struct TrafficGen {
    std::string node;
    std::string space = "ble";
    Opcode op = Opcode::OUT;
    std::int64_t period_ms = 1000;
    std::int64_t jitter_ms = 0;
    std::vector<Expr> tuple;  // env: time, n, sensor (sensor kind)
    // kind "periodic" always sends; kind "sensor" random-walks a value
    // and sends only when it moved more than change_threshold.
    std::string kind = "periodic";
    std::string sensor_name = "light";
    double walk_sigma = 0;
    double change_threshold = 0;
    double start_value = 500;
};

struct ScenarioNode {
    std::string id;
    std::string kind;  // beacon, mobile, server
    std::vector<Waypoint> waypoints;
    std::vector<std::string> spaces;  // "ble" and/or "udp"
    std::map<std::string, std::string> keys;
    std::vector<std::string> agent_docs;
    std::vector<RouteRule> routes;
    bool install_agents = false;
};

struct Scenario {
    std::string name;
    std::string mode = "event";  // event | fig2 | fig8
    std::int64_t duration_ms = 60000;
    std::uint64_t seed = 1;
    RadioConfig radio;
    TimingConfig timing;
    double udp_drop_rate = 0;
    std::vector<ScenarioNode> nodes;
    std::vector<TrafficGen> traffic;
    // fig2-sweep
    int trials = 50000;
    std::vector<double> dead_times{0, 9, 30, 70};
    // fig8-distance
    std::vector<double> srd_sweep;
    std::vector<std::int64_t> dt_sweep;
};

struct LinkStat {
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
};

struct Metrics {
    // BLE per-link stats keyed (sender, receiver); UDP kept separately
    std::map<std::pair<std::string, std::string>, LinkStat> links;
    std::map<std::pair<std::string, std::string>, LinkStat> udp_links;
    std::map<int, LinkStat> distance_bins;                          // floor(meters)
    std::vector<double> latencies_ms;
    // (time_ms, node, space) -> tuple count samples
    std::vector<std::tuple<std::int64_t, std::string, std::string, std::size_t>> space_counts;
    // fig2: t_ad_ms, t_de_ms, p1_analytic, p1_simulated
    std::vector<std::array<double, 4>> fig2_rows;
    // fig8: srd_m, dt_ms, reception_rate_pct
    std::vector<std::array<double, 3>> fig8_rows;

    double overall_ble_rate() const;
};

// Returns the bundled JSON document for "fig2-sweep", "fig8-distance"
// or "smart-building".
std::string builtin_scenario_doc(const std::string& name);

// Accepts a builtin name or a raw JSON document.
Scenario load_scenario(const std::string& doc_or_name);

Metrics run_scenario(const Scenario& s);

// One CSV file per metric family, stable column order.
void emit_metrics(const Metrics& m, const std::string& dir);

}  // namespace beets

#endif
