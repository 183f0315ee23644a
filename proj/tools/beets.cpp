#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "beets/agent.hpp"
#include "beets/fpe.hpp"
#include "beets/node.hpp"
#include "beets/sim.hpp"
#include "beets/udp_backend.hpp"

using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string to_hex(const std::vector<std::uint8_t>& b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (std::uint8_t c : b) {
        s += digits[c >> 4];
        s += digits[c & 0xf];
    }
    return s;
}

std::vector<std::uint8_t> from_hex(const std::string& s) {
    if (s.size() % 2) throw std::runtime_error("odd hex length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::runtime_error(std::string("bad hex char '") + c + "'");
    };
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < s.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(nib(s[i]) << 4 | nib(s[i + 1])));
    return out;
}

beets::Tuple tuple_from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.is_array()) throw std::runtime_error("tuple must be a JSON array");
    beets::Tuple t;
    for (const json& e : j) {
        if (e.is_string()) {
            std::string s = e.get<std::string>();
            if (s == "?")
                t.push_back(beets::Formal{});
            else
                t.push_back(s);
        } else if (e.is_number()) {
            t.push_back(beets::classify_value(e.get<double>()));
        } else if (e.is_null()) {
            t.push_back(beets::Formal{});
        } else {
            throw std::runtime_error("tuple elements must be strings or numbers");
        }
    }
    return t;
}

// --key beats BEETS_KEY beats the config file value.
std::string pick_key(const std::string& flag_key, const std::string& config_key) {
    if (!flag_key.empty()) return flag_key;
    if (const char* env = std::getenv("BEETS_KEY"); env && *env) return env;
    return config_key;
}

std::int64_t wall_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

int cmd_node(const std::string& config_path, const std::string& flag_key,
             std::int64_t duration_ms) {
    json cfg = json::parse(read_file(config_path));
    std::string id = cfg.value("id", "node");

    beets::UdpConfig uc;
    if (cfg.contains("udp")) {
        const json& u = cfg.at("udp");
        uc.port = u.value("port", uc.port);
        uc.broadcast_address = u.value("broadcast_address", uc.broadcast_address);
        uc.repeats = u.value("repeats", uc.repeats);
    }
    uc.node_id = id;

    std::string config_key;
    if (cfg.contains("keys") && cfg.at("keys").contains("udp"))
        config_key = cfg.at("keys").at("udp").get<std::string>();

    beets::UdpBackend backend(uc);
    backend.start();

    beets::Node node(id);
    beets::RpcCore& rpc = node.attach_space("udp", backend, pick_key(flag_key, config_key));
    beets::Pattern any;
    for (int arity = 1; arity <= 4; ++arity) {
        any.push_back(beets::Formal{});
        rpc.add_listener(any, [](const beets::Tuple& t, const beets::ReceiveEnvelope& env) {
            std::cout << "recv " << beets::opcode_name(env.message.op) << " "
                      << beets::tuple_to_string(t) << " from " << env.sender << "\n";
            return false;
        });
    }
    if (cfg.contains("routes"))
        for (const json& r : cfg.at("routes"))
            node.router().add_rule(beets::Router::parse_rule(r.dump()));
    std::int64_t t0 = wall_ms();
    if (cfg.contains("agents"))
        for (const json& a : cfg.at("agents")) node.add_agent(a.dump(), 0);

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "node " << id << " listening on udp port " << uc.port << "\n";

    std::size_t printed = 0;
    while (!g_stop) {
        std::int64_t now = wall_ms() - t0;
        node.tick(now);
        for (; printed < node.log_lines().size(); ++printed)
            std::cout << node.log_lines()[printed] << "\n";
        if (duration_ms >= 0 && now >= duration_ms) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    backend.stop();
    return 0;
}

int cmd_sim(const std::string& scenario, std::int64_t seed, const std::string& out_dir) {
    std::string doc = scenario;
    std::ifstream f(scenario);
    if (f) {
        std::ostringstream ss;
        ss << f.rdbuf();
        doc = ss.str();
    }
    beets::Scenario s = beets::load_scenario(doc);
    if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
    beets::Metrics m = beets::run_scenario(s);
    beets::emit_metrics(m, out_dir);
    std::cout << "scenario " << s.name << " seed " << s.seed << " -> " << out_dir << "\n";
    if (!m.links.empty())
        std::printf("overall ble reception rate: %.4f\n", m.overall_ble_rate());
    return 0;
}

int cmd_encode(const std::string& op_name, const std::string& tuple_json, int seq,
               const std::string& key, bool ble) {
    beets::Opcode op;
    if (!beets::parse_opcode(op_name, op)) throw std::runtime_error("unknown opcode " + op_name);
    beets::WireMessage m;
    m.op = op;
    m.seq = static_cast<std::uint8_t>(seq);
    m.tuple = tuple_from_json(tuple_json);
    std::vector<std::uint8_t> bytes =
        beets::encode_message(m, ble ? beets::kBleLimit : beets::kUdpLimit);
    if (!key.empty()) bytes = beets::fpe_encrypt(beets::derive_tables(key), bytes);
    std::cout << to_hex(bytes) << "\n";
    if (ble) {
        beets::BleAdvPayload p = beets::ble_pack(bytes);
        std::cout << "uuids:";
        for (std::uint16_t u : p.uuids) std::printf(" %04x", u);
        std::cout << "\nlocal_name: " << p.local_name << "\n";
    }
    return 0;
}

int cmd_decode(const std::string& hex, const std::string& key) {
    std::vector<std::uint8_t> bytes = from_hex(hex);
    if (!key.empty()) bytes = beets::fpe_decrypt(beets::derive_tables(key), bytes);
    beets::WireMessage m = beets::decode_message(bytes);
    std::cout << beets::opcode_name(m.op) << " seq=" << int(m.seq) << " "
              << beets::tuple_to_string(m.tuple) << "\n";
    return 0;
}

int cmd_agent_check(const std::string& path) {
    beets::AgentDefinition def = beets::parse_agent(read_file(path));
    std::cout << "ok: agent '" << def.name << "', " << def.rules.size() << " rule(s), "
              << def.vars.size() << " var(s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tuple space toolkit for broadcast media"};
    app.require_subcommand(1);

    std::string config_path, flag_key;
    std::int64_t node_duration = -1;
    CLI::App* node = app.add_subcommand("node", "run a live UDP node");
    node->add_option("--config", config_path, "node config file")->required();
    node->add_option("--key", flag_key, "space key (overrides BEETS_KEY and config)");
    node->add_option("--duration", node_duration, "stop after this many ms (default: run forever)");

    std::string scenario, out_dir = "metrics";
    std::int64_t seed = -1;
    CLI::App* sim = app.add_subcommand("sim", "run a simulation scenario");
    sim->add_option("--scenario", scenario, "builtin name or scenario file")->required();
    sim->add_option("--seed", seed, "override the scenario seed");
    sim->add_option("--out", out_dir, "metrics output directory");

    CLI::App* codec = app.add_subcommand("codec", "encode/decode wire messages");
    codec->require_subcommand(1);
    std::string op_name, tuple_json, codec_key, hex;
    int enc_seq = 0;
    bool ble = false;
    CLI::App* enc = codec->add_subcommand("encode", "tuple message to hex");
    enc->add_option("--op", op_name, "opcode name")->required();
    enc->add_option("--tuple", tuple_json, "JSON array; \"?\" is a wildcard")->required();
    enc->add_option("--seq", enc_seq, "sequence number 0..3");
    enc->add_option("--key", codec_key, "encrypt with this key");
    enc->add_flag("--ble", ble, "use the 32-byte limit and print the advertisement packing");
    CLI::App* dec = codec->add_subcommand("decode", "hex to tuple message");
    dec->add_option("--hex", hex, "lowercase hex bytes")->required();
    dec->add_option("--key", codec_key, "decrypt with this key");

    std::string agent_path;
    CLI::App* agent = app.add_subcommand("agent", "agent document tools");
    agent->require_subcommand(1);
    CLI::App* check = agent->add_subcommand("check", "validate an agent document");
    check->add_option("file", agent_path, "agent JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*node) return cmd_node(config_path, flag_key, node_duration);
        if (*sim) return cmd_sim(scenario, seed, out_dir);
        if (*enc) return cmd_encode(op_name, tuple_json, enc_seq, codec_key, ble);
        if (*dec) return cmd_decode(hex, codec_key);
        if (*check) return cmd_agent_check(agent_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
