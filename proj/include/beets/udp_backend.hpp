#ifndef BEETS_UDP_BACKEND_HPP
#define BEETS_UDP_BACKEND_HPP

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>

#include "beets/rpc.hpp"

namespace beets {

struct UdpConfig {
    std::uint16_t port = 5088;
    std::string broadcast_address = "255.255.255.255";
    int repeats = 1;  // 1..8, gaps drawn uniformly from [1,10] ms
    std::string node_id;
};

// Real UDP broadcast transport. One receive loop thread; hook
// invocations arrive on its context. Own datagrams are suppressed by
// source-port filtering so the wire format stays untouched.
class UdpBackend : public Backend {
public:
    explicit UdpBackend(UdpConfig cfg);
    ~UdpBackend() override;

    void start();
    void stop();

    void send(const std::vector<std::uint8_t>& bytes) override;
    void set_receive_hook(ReceiveHook hook) override;
    std::size_t max_message_size() const override { return kUdpLimit; }

    // datagrams actually written by the last send() call
    int last_send_count() const { return last_send_count_; }

private:
    void receive_loop();

    UdpConfig cfg_;
    int send_fd_ = -1;
    int recv_fd_ = -1;
    std::uint16_t send_port_ = 0;  // our own source port, for self-suppression
    std::atomic<bool> running_{false};
    std::thread recv_thread_;
    std::mutex hook_mu_;
    ReceiveHook hook_;
    std::atomic<int> last_send_count_{0};
};

}  // namespace beets

#endif
