#include "beets/udp_backend.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cerrno>
#include <cstring>
#include <random>
#include <stdexcept>

namespace beets {

namespace {

std::int64_t wall_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

[[noreturn]] void throw_errno(const std::string& what) {
    throw std::runtime_error(what + ": " + std::strerror(errno));
}

}  // namespace

UdpBackend::UdpBackend(UdpConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.repeats < 1 || cfg_.repeats > 8)
        throw std::runtime_error("repeats must be in [1,8]");
}

UdpBackend::~UdpBackend() { stop(); }

void UdpBackend::start() {
    if (running_) return;

    send_fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (send_fd_ < 0) throw_errno("socket");
    int one = 1;
    ::setsockopt(send_fd_, SOL_SOCKET, SO_BROADCAST, &one, sizeof(one));
    sockaddr_in any{};
    any.sin_family = AF_INET;
    any.sin_addr.s_addr = htonl(INADDR_ANY);
    any.sin_port = 0;
    if (::bind(send_fd_, reinterpret_cast<sockaddr*>(&any), sizeof(any)) < 0)
        throw_errno("bind send socket");
    sockaddr_in local{};
    socklen_t len = sizeof(local);
    ::getsockname(send_fd_, reinterpret_cast<sockaddr*>(&local), &len);
    send_port_ = ntohs(local.sin_port);

    recv_fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (recv_fd_ < 0) throw_errno("socket");
    ::setsockopt(recv_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    ::setsockopt(recv_fd_, SOL_SOCKET, SO_REUSEPORT, &one, sizeof(one));
    timeval tv{0, 100000};  // 100 ms poll so stop() can join
    ::setsockopt(recv_fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(cfg_.port);
    if (::bind(recv_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0)
        throw_errno("bind port " + std::to_string(cfg_.port));

    running_ = true;
    recv_thread_ = std::thread([this] { receive_loop(); });
}

void UdpBackend::stop() {
    if (!running_) return;
    running_ = false;
    if (recv_thread_.joinable()) recv_thread_.join();
    if (send_fd_ >= 0) ::close(send_fd_);
    if (recv_fd_ >= 0) ::close(recv_fd_);
    send_fd_ = recv_fd_ = -1;
}

void UdpBackend::send(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() > kUdpLimit) throw std::runtime_error("oversize message");
    if (!running_) throw std::runtime_error("transport not started");

    sockaddr_in dest{};
    dest.sin_family = AF_INET;
    dest.sin_port = htons(cfg_.port);
    if (::inet_pton(AF_INET, cfg_.broadcast_address.c_str(), &dest.sin_addr) != 1)
        throw std::runtime_error("bad broadcast address " + cfg_.broadcast_address);

    static thread_local std::mt19937 gap_rng{std::random_device{}()};
    std::uniform_int_distribution<int> gap(1, 10);

    int written = 0;
    for (int i = 0; i < cfg_.repeats; ++i) {
        if (i > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(gap(gap_rng)));
        ssize_t n = ::sendto(send_fd_, bytes.data(), bytes.size(), 0,
                             reinterpret_cast<sockaddr*>(&dest), sizeof(dest));
        if (n < 0) throw_errno("sendto");
        ++written;
    }
    last_send_count_ = written;
}

void UdpBackend::set_receive_hook(ReceiveHook hook) {
    std::lock_guard lk(hook_mu_);
    hook_ = std::move(hook);
}

void UdpBackend::receive_loop() {
    std::vector<std::uint8_t> buf(2048);
    while (running_) {
        sockaddr_in src{};
        socklen_t len = sizeof(src);
        ssize_t n = ::recvfrom(recv_fd_, buf.data(), buf.size(), 0,
                               reinterpret_cast<sockaddr*>(&src), &len);
        if (n < 0) continue;  // timeout or transient error
        if (ntohs(src.sin_port) == send_port_) continue;  // our own broadcast

        char ip[INET_ADDRSTRLEN] = {};
        ::inet_ntop(AF_INET, &src.sin_addr, ip, sizeof(ip));
        RawMessage raw;
        raw.bytes.assign(buf.begin(), buf.begin() + n);
        raw.sender = std::string(ip) + ":" + std::to_string(ntohs(src.sin_port));
        raw.rssi = 0;  // wired transport, unknown signal strength
        raw.timestamp = wall_ms();

        ReceiveHook hook;
        {
            std::lock_guard lk(hook_mu_);
            hook = hook_;
        }
        if (hook) hook(raw);
    }
}

}  // namespace beets
