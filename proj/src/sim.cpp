#include "beets/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include "beets/node.hpp"

namespace beets {

using nlohmann::json;

Vec2 position_at(const std::vector<Waypoint>& wps, std::int64_t t) {
    if (wps.empty()) return {};
    if (t <= wps.front().t) return wps.front().pos;
    for (std::size_t i = 1; i < wps.size(); ++i) {
        if (t <= wps[i].t) {
            const Waypoint& a = wps[i - 1];
            const Waypoint& b = wps[i];
            double f = b.t == a.t ? 1.0
                                  : static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
            return {a.pos.x + f * (b.pos.x - a.pos.x), a.pos.y + f * (b.pos.y - a.pos.y)};
        }
    }
    return wps.back().pos;
}

double Metrics::overall_ble_rate() const {
    std::uint64_t sent = 0, received = 0;
    for (const auto& [key, stat] : links) {
        sent += stat.sent;
        received += stat.received;
    }
    return sent == 0 ? 0.0 : static_cast<double>(received) / static_cast<double>(sent);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error("scenario: " + path + ": " + why);
}

double num_or(const json& j, const char* key, double dflt, const std::string& path) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number()) fail(path + "." + key, "must be a number");
    return j.at(key).get<double>();
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdull;
    z ^= z >> 33;
    return z;
}

double urand(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

double rand_normal(std::mt19937_64& g) {
    double u1 = urand(g), u2 = urand(g);
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::vector<Waypoint> parse_waypoints(const json& n, const std::string& path) {
    std::vector<Waypoint> wps;
    if (n.contains("waypoints")) {
        for (std::size_t i = 0; i < n.at("waypoints").size(); ++i) {
            const json& w = n.at("waypoints")[i];
            std::string wp = path + ".waypoints[" + std::to_string(i) + "]";
            if (!w.contains("t") || !w.contains("pos")) fail(wp, "needs t and pos");
            Waypoint x;
            x.t = w.at("t").get<std::int64_t>();
            x.pos = {w.at("pos")[0].get<double>(), w.at("pos")[1].get<double>()};
            if (!std::isfinite(x.pos.x) || !std::isfinite(x.pos.y)) fail(wp, "position not finite");
            wps.push_back(x);
        }
    } else if (n.contains("position")) {
        const json& p = n.at("position");
        Vec2 pos{p[0].get<double>(), p[1].get<double>()};
        if (!std::isfinite(pos.x) || !std::isfinite(pos.y)) fail(path + ".position", "not finite");
        wps.push_back({0, pos});
    } else {
        fail(path, "needs position or waypoints");
    }
    return wps;
}

}  // namespace

Scenario load_scenario(const std::string& doc_or_name) {
    std::string doc = doc_or_name;
    if (doc_or_name == "fig2-sweep" || doc_or_name == "fig8-distance" ||
        doc_or_name == "smart-building")
        doc = builtin_scenario_doc(doc_or_name);

    json j;
    try {
        j = json::parse(doc);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("scenario: not valid JSON: ") + e.what());
    }

    Scenario s;
    s.name = j.value("name", "scenario");
    s.mode = j.value("mode", "event");
    if (s.mode != "event" && s.mode != "fig2" && s.mode != "fig8")
        fail("mode", "must be event, fig2 or fig8");
    s.duration_ms = static_cast<std::int64_t>(num_or(j, "duration_ms", 60000, ""));
    if (s.duration_ms <= 0) fail("duration_ms", "must be > 0");
    s.seed = static_cast<std::uint64_t>(num_or(j, "seed", 1, ""));

    if (j.contains("radio")) {
        const json& r = j.at("radio");
        s.radio.P_t = num_or(r, "P_t", s.radio.P_t, "radio");
        s.radio.G_t = num_or(r, "G_t", s.radio.G_t, "radio");
        s.radio.G_r = num_or(r, "G_r", s.radio.G_r, "radio");
        s.radio.lambda = num_or(r, "lambda", s.radio.lambda, "radio");
        s.radio.P_0 = num_or(r, "P_0", s.radio.P_0, "radio");
        s.radio.shadowing_sigma = num_or(r, "shadowing_sigma", s.radio.shadowing_sigma, "radio");
    }
    if (j.contains("timing")) {
        const json& t = j.at("timing");
        s.timing.t_sw = num_or(t, "t_sw", s.timing.t_sw, "timing");
        s.timing.t_de = num_or(t, "t_de", s.timing.t_de, "timing");
        s.timing.t_sn = num_or(t, "t_sn", s.timing.t_sn, "timing");
        s.timing.t_ad = num_or(t, "t_ad", s.timing.t_ad, "timing");
        s.timing.t_adv = num_or(t, "t_adv", s.timing.t_adv, "timing");
    }
    s.udp_drop_rate = num_or(j, "udp_drop_rate", 0.0, "");
    if (s.udp_drop_rate < 0 || s.udp_drop_rate > 1) fail("udp_drop_rate", "must be in [0,1]");
    s.trials = static_cast<int>(num_or(j, "trials", 50000, ""));
    if (j.contains("dead_times")) {
        s.dead_times.clear();
        for (const json& d : j.at("dead_times")) s.dead_times.push_back(d.get<double>());
    }
    if (j.contains("srd_sweep"))
        for (const json& d : j.at("srd_sweep")) s.srd_sweep.push_back(d.get<double>());
    if (j.contains("dt_sweep"))
        for (const json& d : j.at("dt_sweep")) s.dt_sweep.push_back(d.get<std::int64_t>());

    if (j.contains("nodes")) {
        for (std::size_t i = 0; i < j.at("nodes").size(); ++i) {
            const json& n = j.at("nodes")[i];
            std::string path = "nodes[" + std::to_string(i) + "]";
            ScenarioNode sn;
            if (!n.contains("id")) fail(path, "needs id");
            sn.id = n.at("id").get<std::string>();
            for (const ScenarioNode& other : s.nodes)
                if (other.id == sn.id) fail(path + ".id", "duplicate '" + sn.id + "'");
            sn.kind = n.value("kind", "beacon");
            sn.waypoints = parse_waypoints(n, path);
            if (n.contains("spaces"))
                for (const json& sp : n.at("spaces")) sn.spaces.push_back(sp.get<std::string>());
            else
                sn.spaces = {"ble"};
            if (n.contains("keys"))
                for (auto& [k, v] : n.at("keys").items()) sn.keys[k] = v.get<std::string>();
            if (n.contains("agents"))
                for (const json& a : n.at("agents")) sn.agent_docs.push_back(a.dump());
            if (n.contains("routes"))
                for (const json& r : n.at("routes")) sn.routes.push_back(Router::parse_rule(r.dump()));
            sn.install_agents = n.value("install_agents", false);
            s.nodes.push_back(std::move(sn));
        }
    }
    if (j.contains("traffic")) {
        for (std::size_t i = 0; i < j.at("traffic").size(); ++i) {
            const json& t = j.at("traffic")[i];
            std::string path = "traffic[" + std::to_string(i) + "]";
            TrafficGen g;
            if (!t.contains("node")) fail(path, "needs node");
            g.node = t.at("node").get<std::string>();
            bool known = false;
            for (const ScenarioNode& sn : s.nodes) known = known || sn.id == g.node;
            if (!known) fail(path + ".node", "unknown node '" + g.node + "'");
            g.space = t.value("space", "ble");
            std::string opname = t.value("op", "OUT");
            if (!parse_opcode(opname, g.op)) fail(path + ".op", "unknown opcode " + opname);
            g.period_ms = static_cast<std::int64_t>(num_or(t, "period_ms", 1000, path));
            if (g.period_ms <= 0) fail(path + ".period_ms", "must be > 0");
            g.jitter_ms = static_cast<std::int64_t>(num_or(t, "jitter_ms", 0, path));
            g.kind = t.value("kind", "periodic");
            g.sensor_name = t.value("sensor", "light");
            g.walk_sigma = num_or(t, "walk_sigma", 0, path);
            g.change_threshold = num_or(t, "change_threshold", 0, path);
            g.start_value = num_or(t, "start_value", 500, path);
            if (!t.contains("tuple")) fail(path, "needs tuple template");
            for (const json& e : t.at("tuple"))
                g.tuple.push_back(Expr::parse(e.is_string() ? e.get<std::string>() : e.dump()));
            if (g.tuple.empty() || g.tuple.size() > 4)
                fail(path + ".tuple", "arity must be 1..4");
            s.traffic.push_back(std::move(g));
        }
    }
    return s;
}

namespace {

// ---------------------------------------------------------------------------
// event-driven run

struct Event {
    std::int64_t t;
    std::uint64_t seq;
    std::function<void()> fn;
};
struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
        return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
};

class SimRun;

class SimBleBackend : public Backend {
public:
    SimBleBackend(SimRun& run, std::string node_id, const TimingConfig& tc)
        : run_(run), node_id_(std::move(node_id)), tc_(tc) {}
    void send(const std::vector<std::uint8_t>& bytes) override;
    void set_receive_hook(ReceiveHook hook) override { hook_ = std::move(hook); }
    std::size_t max_message_size() const override { return kBleLimit; }
    std::int64_t min_send_interval_ms() const override {
        return static_cast<std::int64_t>(tc_.t_adv);
    }
    void deliver(const RawMessage& raw) {
        if (hook_) hook_(raw);
    }

private:
    SimRun& run_;
    std::string node_id_;
    TimingConfig tc_;
    ReceiveHook hook_;
};

class SimUdpBackend : public Backend {
public:
    SimUdpBackend(SimRun& run, std::string node_id)
        : run_(run), node_id_(std::move(node_id)) {}
    void send(const std::vector<std::uint8_t>& bytes) override;
    void set_receive_hook(ReceiveHook hook) override { hook_ = std::move(hook); }
    std::size_t max_message_size() const override { return kUdpLimit; }
    void deliver(const RawMessage& raw) {
        if (hook_) hook_(raw);
    }

private:
    SimRun& run_;
    std::string node_id_;
    ReceiveHook hook_;
};

struct RunNode {
    const ScenarioNode* def;
    std::unique_ptr<Node> node;
    std::unique_ptr<SimBleBackend> ble;
    std::unique_ptr<SimUdpBackend> udp;
};

class SimRun {
public:
    explicit SimRun(const Scenario& s)
        : s_(s), world_(s.radio, s.timing, mix(s.seed, 0xb1e)),
          udp_rng_(mix(s.seed, 0x0d9)), traffic_rng_(mix(s.seed, 0x7af)) {
        for (const ScenarioNode& sn : s_.nodes) {
            auto rn = std::make_unique<RunNode>();
            rn->def = &sn;
            rn->node = std::make_unique<Node>(sn.id);
            bool has_ble = std::count(sn.spaces.begin(), sn.spaces.end(), "ble") > 0;
            bool has_udp = std::count(sn.spaces.begin(), sn.spaces.end(), "udp") > 0;
            if (has_ble) {
                const std::vector<Waypoint>* wps = &sn.waypoints;
                world_.add_node(sn.id, [wps](std::int64_t t) { return position_at(*wps, t); });
                rn->ble = std::make_unique<SimBleBackend>(*this, sn.id, s_.timing);
                std::string key = sn.keys.count("ble") ? sn.keys.at("ble") : "";
                rn->node->attach_space("ble", *rn->ble, key);
            }
            if (has_udp) {
                rn->udp = std::make_unique<SimUdpBackend>(*this, sn.id);
                std::string key = sn.keys.count("udp") ? sn.keys.at("udp") : "";
                rn->node->attach_space("udp", *rn->udp, key);
            }
            for (const RouteRule& r : sn.routes) rn->node->router().add_rule(r);
            rn->node->enable_agent_install(sn.install_agents);
            nodes_.push_back(std::move(rn));
        }
        // agents start at t=0
        for (auto& rn : nodes_)
            for (const std::string& doc : rn->def->agent_docs) rn->node->add_agent(doc, 0);
    }

    Metrics run() {
        for (std::size_t i = 0; i < s_.traffic.size(); ++i) {
            const TrafficGen& g = s_.traffic[i];
            gen_state_.push_back({g.start_value, g.start_value, 0});
            std::int64_t start = g.period_ms > 1
                                     ? static_cast<std::int64_t>(urand(traffic_rng_) * g.period_ms)
                                     : 0;
            schedule(start, [this, i] { fire_traffic(i); });
        }
        for (std::int64_t t = 0; t <= s_.duration_ms; t += 50)
            schedule(t, [this] {
                for (auto& rn : nodes_) rn->node->tick(now_);
            });
        for (std::int64_t t = 0; t <= s_.duration_ms; t += 1000)
            schedule(t, [this] { sample_spaces(); });

        std::int64_t drain = s_.duration_ms + static_cast<std::int64_t>(s_.timing.t_ad) + 10;
        while (!events_.empty() && events_.top().t <= drain) {
            Event ev = events_.top();
            events_.pop();
            now_ = ev.t;
            ev.fn();
        }
        return std::move(metrics_);
    }

    void ble_send(const std::string& sender, const std::vector<std::uint8_t>& bytes) {
        std::int64_t now = now_;
        world_.broadcast(sender, bytes, now);
        for (const std::string& other : world_.node_ids()) {
            if (other == sender) continue;
            metrics_.links[{sender, other}].sent++;
            int bin = static_cast<int>(std::floor(node_distance(sender, other, now)));
            metrics_.distance_bins[bin].sent++;
        }
        std::int64_t end = now + static_cast<std::int64_t>(std::ceil(s_.timing.t_ad));
        schedule(end, [this] {
            for (const BleWorld::Reception& rec : world_.resolve_due(now_)) {
                std::int64_t sent_at = static_cast<std::int64_t>(rec.tx_start);
                metrics_.links[{rec.raw.sender, rec.receiver}].received++;
                int bin = static_cast<int>(
                    std::floor(node_distance(rec.raw.sender, rec.receiver, sent_at)));
                metrics_.distance_bins[bin].received++;
                metrics_.latencies_ms.push_back(
                    static_cast<double>(rec.raw.timestamp) - rec.tx_start);
                if (RunNode* rn = find(rec.receiver); rn && rn->ble) rn->ble->deliver(rec.raw);
            }
        });
    }

    void udp_send(const std::string& sender, const std::vector<std::uint8_t>& bytes) {
        for (auto& rn : nodes_) {
            if (!rn->udp || rn->def->id == sender) continue;
            metrics_.udp_links[{sender, rn->def->id}].sent++;
            if (urand(udp_rng_) < s_.udp_drop_rate) continue;
            metrics_.udp_links[{sender, rn->def->id}].received++;
            RawMessage raw;
            raw.bytes = bytes;
            raw.sender = sender;
            raw.rssi = 0;
            raw.timestamp = now_ + 1;
            SimUdpBackend* dest = rn->udp.get();
            schedule(now_ + 1, [dest, raw] { dest->deliver(raw); });
        }
    }

private:
    void schedule(std::int64_t t, std::function<void()> fn) {
        events_.push({t, eseq_++, std::move(fn)});
    }

    RunNode* find(const std::string& id) {
        for (auto& rn : nodes_)
            if (rn->def->id == id) return rn.get();
        return nullptr;
    }

    double node_distance(const std::string& a, const std::string& b, std::int64_t t) {
        RunNode* na = find(a);
        RunNode* nb = find(b);
        if (!na || !nb) return 0;
        return distance(position_at(na->def->waypoints, t), position_at(nb->def->waypoints, t));
    }

    struct GenState {
        double value;
        double last_sent;
        std::int64_t n;
    };

    void fire_traffic(std::size_t i) {
        const TrafficGen& g = s_.traffic[i];
        GenState& st = gen_state_[i];
        if (now_ <= s_.duration_ms) {
            RunNode* rn = find(g.node);
            bool do_send = true;
            ExprEnv env;
            env.vars["time"] = Scalar(static_cast<double>(now_));
            env.vars["n"] = Scalar(static_cast<double>(st.n));
            if (g.kind == "sensor") {
                st.value += g.walk_sigma * rand_normal(traffic_rng_);
                env.vars["sensor"] = Scalar(st.value);
                if (rn) rn->node->inject_sensor(g.sensor_name, st.value, now_);
                do_send = std::abs(st.value - st.last_sent) >= g.change_threshold;
            }
            if (rn && do_send && rn->node->has_space(g.space)) {
                Tuple t;
                bool ok = true;
                try {
                    for (const Expr& e : g.tuple) t.push_back(scalar_to_value(e.eval(env)));
                    rn->node->submit(g.space, g.op, t, {}, nullptr, now_);
                } catch (const std::exception&) {
                    ok = false;  // queue full or oversize: drop this cycle
                }
                if (ok) {
                    st.last_sent = st.value;
                    ++st.n;
                }
            }
            std::int64_t jitter =
                g.jitter_ms > 0
                    ? static_cast<std::int64_t>(urand(traffic_rng_) * (2 * g.jitter_ms)) - g.jitter_ms
                    : 0;
            std::int64_t next = now_ + std::max<std::int64_t>(1, g.period_ms + jitter);
            schedule(next, [this, i] { fire_traffic(i); });
        }
    }

    void sample_spaces() {
        for (auto& rn : nodes_)
            for (const std::string& sp : rn->def->spaces)
                if (rn->node->has_space(sp))
                    metrics_.space_counts.emplace_back(now_, rn->def->id, sp,
                                                       rn->node->space(sp).size());
    }

    const Scenario& s_;
    BleWorld world_;
    std::mt19937_64 udp_rng_;
    std::mt19937_64 traffic_rng_;
    std::vector<std::unique_ptr<RunNode>> nodes_;
    std::vector<GenState> gen_state_;
    std::priority_queue<Event, std::vector<Event>, EventLater> events_;
    std::int64_t now_ = 0;
    std::uint64_t eseq_ = 0;
    Metrics metrics_;
};

void SimBleBackend::send(const std::vector<std::uint8_t>& bytes) {
    run_.ble_send(node_id_, bytes);
}

void SimUdpBackend::send(const std::vector<std::uint8_t>& bytes) {
    run_.udp_send(node_id_, bytes);
}

Metrics run_fig2(const Scenario& s) {
    Metrics m;
    for (double t_de : s.dead_times) {
        for (int t_ad = 100; t_ad <= 1000; t_ad += 100) {
            TimingConfig tc = s.timing;
            tc.t_de = t_de;
            tc.t_ad = t_ad;
            double analytic = analytic_p1(tc, true);
            double simulated = simulate_link(s.radio, tc, 1.0, s.trials,
                                             mix(s.seed, mix(static_cast<std::uint64_t>(t_de * 1000),
                                                             static_cast<std::uint64_t>(t_ad))));
            m.fig2_rows.push_back({static_cast<double>(t_ad), t_de, analytic, simulated});
        }
    }
    return m;
}

Metrics run_fig8(const Scenario& s) {
    Metrics m;
    std::vector<double> srds = s.srd_sweep.empty()
                                   ? std::vector<double>{1, 2, 3, 5, 8, 11}
                                   : s.srd_sweep;
    std::vector<std::int64_t> dts = s.dt_sweep.empty()
                                        ? std::vector<std::int64_t>{500, 1000, 2000}
                                        : s.dt_sweep;
    for (double srd : srds) {
        for (std::int64_t dt : dts) {
            Scenario sub;
            sub.name = s.name;
            sub.duration_ms = s.duration_ms;
            sub.seed = mix(s.seed, mix(static_cast<std::uint64_t>(srd * 1000),
                                       static_cast<std::uint64_t>(dt)));
            sub.radio = s.radio;
            sub.timing = s.timing;
            // 4 beacons on a circle of radius srd, 4 co-located mobiles at
            // the centre
            for (int b = 0; b < 4; ++b) {
                ScenarioNode sn;
                sn.id = "b" + std::to_string(b + 1);
                sn.kind = "beacon";
                double ang = b * 3.14159265358979323846 / 2.0;
                sn.waypoints = {{0, {srd * std::cos(ang), srd * std::sin(ang)}}};
                sn.spaces = {"ble"};
                sub.nodes.push_back(sn);
            }
            for (int mi = 0; mi < 4; ++mi) {
                ScenarioNode sn;
                sn.id = "m" + std::to_string(mi + 1);
                sn.kind = "mobile";
                sn.waypoints = {{0, {0, 0}}};
                sn.spaces = {"ble"};
                sub.nodes.push_back(sn);
                TrafficGen g;
                g.node = sn.id;
                g.space = "ble";
                g.op = Opcode::OUT;
                g.period_ms = dt;
                g.jitter_ms = dt / 4;
                for (const char* e : {"'SENSOR'", "'LIGHT'", "n", "time"})
                    g.tuple.push_back(Expr::parse(e));
                sub.traffic.push_back(std::move(g));
            }
            Metrics sm = SimRun(sub).run();
            std::uint64_t sent = 0, received = 0;
            for (const auto& [key, stat] : sm.links) {
                if (key.first[0] != 'm' || key.second[0] != 'b') continue;
                sent += stat.sent;
                received += stat.received;
            }
            double rate = sent == 0 ? 0.0 : 100.0 * received / sent;
            m.fig8_rows.push_back({srd, static_cast<double>(dt), rate});
        }
    }
    return m;
}

}  // namespace

Metrics run_scenario(const Scenario& s) {
    if (s.mode == "fig2") return run_fig2(s);
    if (s.mode == "fig8") return run_fig8(s);
    return SimRun(s).run();
}

void emit_metrics(const Metrics& m, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);

    auto open = [&](const std::string& name) {
        std::ofstream f(dir + "/" + name, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + dir + "/" + name);
        return f;
    };
    auto fmt = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        return std::string(buf);
    };

    {
        auto f = open("link_rates.csv");
        f << "sender,receiver,sent,received,rate_pct\n";
        for (const auto& [key, st] : m.links)
            f << key.first << "," << key.second << "," << st.sent << "," << st.received << ","
              << fmt(st.sent ? 100.0 * st.received / st.sent : 0.0) << "\n";
    }
    {
        auto f = open("udp_link_rates.csv");
        f << "sender,receiver,sent,received,rate_pct\n";
        for (const auto& [key, st] : m.udp_links)
            f << key.first << "," << key.second << "," << st.sent << "," << st.received << ","
              << fmt(st.sent ? 100.0 * st.received / st.sent : 0.0) << "\n";
    }
    {
        auto f = open("distance_bins.csv");
        f << "bin_m,sent,received,rate_pct\n";
        for (const auto& [bin, st] : m.distance_bins)
            f << bin << "," << st.sent << "," << st.received << ","
              << fmt(st.sent ? 100.0 * st.received / st.sent : 0.0) << "\n";
    }
    {
        auto f = open("latencies.csv");
        f << "latency_ms\n";
        for (double l : m.latencies_ms) f << fmt(l) << "\n";
    }
    {
        auto f = open("space_counts.csv");
        f << "time_ms,node,space,count\n";
        for (const auto& [t, node, space, count] : m.space_counts)
            f << t << "," << node << "," << space << "," << count << "\n";
    }
    if (!m.fig2_rows.empty()) {
        auto f = open("fig2.csv");
        f << "t_ad_ms,t_de_ms,p1_analytic,p1_simulated\n";
        for (const auto& row : m.fig2_rows)
            f << fmt(row[0]) << "," << fmt(row[1]) << "," << fmt(row[2]) << "," << fmt(row[3])
              << "\n";
    }
    if (!m.fig8_rows.empty()) {
        auto f = open("fig8.csv");
        f << "srd_m,dt_ms,reception_rate_pct\n";
        for (const auto& row : m.fig8_rows)
            f << fmt(row[0]) << "," << fmt(row[1]) << "," << fmt(row[2]) << "\n";
    }
}

std::string builtin_scenario_doc(const std::string& name) {
    if (name == "fig2-sweep") {
        return R"({
  "name": "fig2-sweep",
  "mode": "fig2",
  "seed": 1,
  "duration_ms": 1000,
  "trials": 50000,
  "timing": {"t_sw": 100, "t_de": 0, "t_sn": 100, "t_ad": 500, "t_adv": 500},
  "dead_times": [0, 9, 30, 70],
  "nodes": [],
  "traffic": []
})";
    }
    if (name == "fig8-distance") {
        return R"({
  "name": "fig8-distance",
  "mode": "fig8",
  "seed": 1,
  "duration_ms": 30000,
  "radio": {"shadowing_sigma": 0},
  "timing": {"t_sw": 100, "t_de": 2, "t_sn": 50, "t_ad": 500, "t_adv": 500},
  "srd_sweep": [1, 2, 3, 5, 8, 11],
  "dt_sweep": [500, 1000, 2000],
  "nodes": [],
  "traffic": []
})";
    }
    if (name == "smart-building") {
        json beacons = json::array();
        const double pos[4][2] = {{0, 0}, {6, 0}, {0, 6}, {6, 6}};
        for (int i = 0; i < 4; ++i) {
            json b;
            b["id"] = "b" + std::to_string(i + 1);
            b["kind"] = "beacon";
            b["position"] = {pos[i][0], pos[i][1]};
            b["spaces"] = {"ble", "udp"};
            b["routes"] = json::array({
                json{{"id", "sensor-up"},
                     {"from", "ble"},
                     {"pattern", {"SENSOR", "?", "?", "?"}},
                     {"to", "udp"},
                     {"mode", "copy"}},
                json{{"id", "answer-up"},
                     {"from", "ble"},
                     {"pattern", {"ANSWER", "?", "?"}},
                     {"to", "udp"},
                     {"mode", "copy"}},
                json{{"id", "survey-down"},
                     {"from", "udp"},
                     {"pattern", {"SURVEY", "?", "?"}},
                     {"to", "ble"},
                     {"mode", "copy"}},
            });
            beacons.push_back(b);
        }
        json mobiles = json::array();
        const double mpos[4][2] = {{2, 2}, {4, 2}, {2, 4}, {4, 4}};
        for (int i = 0; i < 4; ++i) {
            json mnode;
            mnode["id"] = "m" + std::to_string(i + 1);
            mnode["kind"] = "mobile";
            mnode["waypoints"] = json::array({
                json{{"t", 0}, {"pos", {mpos[i][0], mpos[i][1]}}},
                json{{"t", 30000}, {"pos", {mpos[(i + 1) % 4][0], mpos[(i + 1) % 4][1]}}},
                json{{"t", 60000}, {"pos", {mpos[i][0], mpos[i][1]}}},
            });
            mnode["spaces"] = {"ble"};
            mnode["agents"] = json::array({json{
                {"name", "responder" + std::to_string(i + 1)},
                {"vars", {{"answered", 0}, {"last_id", -1}}},
                {"rules",
                 json::array({json{
                     {"on", "ts.ble:(SURVEY,?,?)"},
                     {"if", "t[2] != last_id"},
                     {"do",
                      json::array({json{{"type", "out"},
                                        {"space", "ble"},
                                        {"tuple", {"'ANSWER'", "t[2]", "rssi"}}},
                                   json{{"type", "set"},
                                        {"var", "last_id"},
                                        {"expr", "t[2]"}},
                                   json{{"type", "set"},
                                        {"var", "answered"},
                                        {"expr", "answered+1"}}})},
                     {"consume", true}}})}}});
            mobiles.push_back(mnode);
        }
        json server;
        server["id"] = "server";
        server["kind"] = "server";
        server["position"] = {3, 3};
        server["spaces"] = {"udp"};

        json traffic = json::array();
        traffic.push_back(json{{"node", "server"},
                               {"space", "udp"},
                               {"op", "OUT"},
                               {"period_ms", 10000},
                               {"tuple", {"'SURVEY'", "n", "'LIGHT OK'"}}});
        for (int i = 0; i < 4; ++i)
            traffic.push_back(json{{"node", "m" + std::to_string(i + 1)},
                                   {"space", "ble"},
                                   {"op", "OUT"},
                                   {"period_ms", 1000},
                                   {"jitter_ms", 100},
                                   {"kind", "sensor"},
                                   {"sensor", "light"},
                                   {"walk_sigma", 40},
                                   {"change_threshold", 10},
                                   {"start_value", 500},
                                   {"tuple", {"'SENSOR'", "'LIGHT'", "sensor", "time"}}});

        json j;
        j["name"] = "smart-building";
        j["mode"] = "event";
        j["seed"] = 7;
        j["duration_ms"] = 60000;
        j["timing"] = {{"t_sw", 100}, {"t_de", 2}, {"t_sn", 100}, {"t_ad", 500}, {"t_adv", 500}};
        j["udp_drop_rate"] = 0.0;
        json nodes = json::array();
        nodes.push_back(server);
        for (const json& b : beacons) nodes.push_back(b);
        for (const json& mnode : mobiles) nodes.push_back(mnode);
        j["nodes"] = nodes;
        j["traffic"] = traffic;
        return j.dump(2);
    }
    throw std::runtime_error("no builtin scenario named '" + name + "'");
}

}  // namespace beets
