// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "common/error.hpp"
#include "io/wire.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>

namespace nvs {

class ConnectionClosed : public IoError {
public:
    using IoError::IoError;
};

// Owning TCP socket.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket &&other) noexcept : fd_(other.release()) {}
    Socket &operator=(Socket &&other) noexcept;
    Socket(const Socket &) = delete;
    Socket &operator=(const Socket &) = delete;
    ~Socket();

    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }
    int release();

    void send_all(std::span<const std::uint8_t> data);
    // Waits up to timeout_ms (negative: forever) for data. Returns 0 on
    // timeout; throws ConnectionClosed on orderly shutdown by the peer.
    std::size_t recv_some(std::span<std::uint8_t> buf, int timeout_ms);
    // Reads exactly buf.size() bytes, blocking.
    void recv_exact(std::span<std::uint8_t> buf);
    // Copies up to buf.size() bytes without consuming them.
    std::size_t peek(std::span<std::uint8_t> buf, int timeout_ms);

    void shutdown();

private:
    int fd_ = -1;
};

Socket connect_tcp(const std::string &host, std::uint16_t port);

// "host:port" -> (host, port); throws ConfigError.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string &endpoint);

class Listener {
public:
    // Port 0 binds an ephemeral port; see port().
    Listener(const std::string &host, std::uint16_t port);

    std::uint16_t port() const { return port_; }
    std::optional<Socket> accept(int timeout_ms);

private:
    Socket socket_;
    std::uint16_t port_ = 0;
};

// Carries wire messages over raw TCP or, for browser clients, inside
// WebSocket binary frames (RFC 6455).
class MessageChannel {
public:
    enum class Transport { raw, websocket };

    static MessageChannel raw(Socket socket);
    // Server side: detects a WebSocket upgrade request and completes the
    // handshake; anything else is treated as a raw stream.
    static MessageChannel accept(Socket socket, int handshake_timeout_ms = 2000);
    // Client side WebSocket connection (used by tests and tools).
    static MessageChannel connect_websocket(const std::string &host, std::uint16_t port,
                                            const std::string &path = "/");

    Transport transport() const { return transport_; }

    // May run concurrently with receive() on another thread.
    void send(const wire::Message &message);
    // nullopt on timeout. Throws ConnectionClosed when the peer is gone.
    std::optional<wire::Message> receive(int timeout_ms);
    void close();

private:
    MessageChannel(Socket socket, Transport transport, bool client)
        : socket_(std::move(socket)), transport_(transport), client_(client) {}

    void send_ws_frame(std::uint8_t opcode, std::span<const std::uint8_t> payload);
    // Reads one WebSocket frame's payload into the decoder (or handles control
    // frames). Returns false on timeout before any byte arrived.
    bool pump_websocket(int timeout_ms);

    Socket socket_;
    Transport transport_;
    bool client_;
    wire::Decoder decoder_;
    std::shared_ptr<std::mutex> send_mutex_ = std::make_shared<std::mutex>();
};

} // namespace nvs
