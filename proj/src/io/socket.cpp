// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "io/socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/evp.h>
#include <openssl/sha.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <random>
#include <sstream>

namespace nvs {

namespace {

std::string errno_text() { return std::strerror(errno); }

bool wait_readable(int fd, int timeout_ms) {
    pollfd p{fd, POLLIN, 0};
    for (;;) {
        const int rc = ::poll(&p, 1, timeout_ms);
        if (rc < 0 && errno == EINTR)
            continue;
        if (rc < 0)
            throw IoError("poll failed: " + errno_text());
        return rc > 0;
    }
}

constexpr const char *kWebSocketGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string websocket_accept_key(const std::string &client_key) {
    const std::string joined = client_key + kWebSocketGuid;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char *>(joined.data()), joined.size(), digest);
    unsigned char out[64] = {};
    const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
    return std::string(reinterpret_cast<char *>(out), static_cast<std::size_t>(n));
}

std::string read_http_head(Socket &s, int timeout_ms) {
    std::string head;
    std::array<std::uint8_t, 1> c{};
    while (head.find("\r\n\r\n") == std::string::npos) {
        if (head.size() > 8192)
            throw IoError("websocket handshake: request head too large");
        if (s.recv_some(c, timeout_ms) == 0)
            throw IoError("websocket handshake: timed out");
        head.push_back(static_cast<char>(c[0]));
    }
    return head;
}

std::string header_value(const std::string &head, const std::string &name) {
    std::istringstream in(head);
    std::string line;
    while (std::getline(in, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            continue;
        std::string key = line.substr(0, colon);
        std::transform(key.begin(), key.end(), key.begin(), ::tolower);
        if (key != name)
            continue;
        std::string value = line.substr(colon + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        value.erase(value.find_last_not_of(" \t\r") + 1);
        return value;
    }
    return {};
}

} // namespace

Socket &Socket::operator=(Socket &&other) noexcept {
    if (this != &other) {
        if (fd_ >= 0)
            ::close(fd_);
        fd_ = other.release();
    }
    return *this;
}

Socket::~Socket() {
    if (fd_ >= 0)
        ::close(fd_);
}

int Socket::release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
}

void Socket::send_all(std::span<const std::uint8_t> data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR)
            continue;
        if (n < 0) {
            if (errno == EPIPE || errno == ECONNRESET)
                throw ConnectionClosed("peer closed the connection");
            throw IoError("send failed: " + errno_text());
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::size_t Socket::recv_some(std::span<std::uint8_t> buf, int timeout_ms) {
    if (!wait_readable(fd_, timeout_ms))
        return 0;
    for (;;) {
        const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
        if (n < 0 && errno == EINTR)
            continue;
        if (n < 0) {
            if (errno == ECONNRESET)
                throw ConnectionClosed("connection reset by peer");
            throw IoError("recv failed: " + errno_text());
        }
        if (n == 0)
            throw ConnectionClosed("peer closed the connection");
        return static_cast<std::size_t>(n);
    }
}

void Socket::recv_exact(std::span<std::uint8_t> buf) {
    std::size_t got = 0;
    while (got < buf.size())
        got += recv_some(buf.subspan(got), -1);
}

std::size_t Socket::peek(std::span<std::uint8_t> buf, int timeout_ms) {
    if (!wait_readable(fd_, timeout_ms))
        return 0;
    const ssize_t n = ::recv(fd_, buf.data(), buf.size(), MSG_PEEK);
    if (n < 0)
        throw IoError("recv failed: " + errno_text());
    if (n == 0)
        throw ConnectionClosed("peer closed the connection");
    return static_cast<std::size_t>(n);
}

void Socket::shutdown() {
    if (fd_ >= 0)
        ::shutdown(fd_, SHUT_RDWR);
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string &endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon == 0)
        throw ConfigError("endpoint must be host:port, got '" + endpoint + "'");
    int port = 0;
    try {
        port = std::stoi(endpoint.substr(colon + 1));
    } catch (const std::exception &) {
        port = -1;
    }
    if (port <= 0 || port > 65535)
        throw ConfigError("endpoint '" + endpoint + "' has an invalid port");
    return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
}

Socket connect_tcp(const std::string &host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
        throw IoError("cannot resolve " + host + ": " + gai_strerror(rc));
    std::string last_error = "no addresses";
    for (addrinfo *ai = res; ai; ai = ai->ai_next) {
        Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (!s.valid())
            continue;
        if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
            ::freeaddrinfo(res);
            const int one = 1;
            ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return s;
        }
        last_error = errno_text();
    }
    ::freeaddrinfo(res);
    throw IoError("cannot connect to " + host + ":" + service + ": " + last_error);
}

Listener::Listener(const std::string &host, std::uint16_t port) {
    socket_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
    if (!socket_.valid())
        throw IoError("socket() failed: " + errno_text());
    const int one = 1;
    ::setsockopt(socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &addr.sin_addr) != 1)
        throw ConfigError("serve host must be an IPv4 address, got '" + host + "'");
    if (::bind(socket_.fd(), reinterpret_cast<sockaddr *>(&addr), sizeof addr) != 0)
        throw IoError("cannot bind " + host + ":" + std::to_string(port) + ": " + errno_text());
    if (::listen(socket_.fd(), 8) != 0)
        throw IoError("listen failed: " + errno_text());
    socklen_t len = sizeof addr;
    ::getsockname(socket_.fd(), reinterpret_cast<sockaddr *>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

std::optional<Socket> Listener::accept(int timeout_ms) {
    if (!wait_readable(socket_.fd(), timeout_ms))
        return std::nullopt;
    Socket s(::accept(socket_.fd(), nullptr, nullptr));
    if (!s.valid())
        throw IoError("accept failed: " + errno_text());
    const int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return s;
}

// ---------------------------------------------------------------------------

MessageChannel MessageChannel::raw(Socket socket) {
    return MessageChannel(std::move(socket), Transport::raw, false);
}

MessageChannel MessageChannel::accept(Socket socket, int handshake_timeout_ms) {
    std::array<std::uint8_t, 4> probe{};
    std::size_t got = 0;
    // A raw stream starts with a little-endian length no larger than
    // kMaxMessageBytes, which can never spell "GET ".
    while (got < probe.size()) {
        got = socket.peek(probe, handshake_timeout_ms);
        if (got == 0)
            return raw(std::move(socket));
        if (std::memcmp(probe.data(), "GET ", got) != 0)
            return raw(std::move(socket));
    }
    const std::string head = read_http_head(socket, handshake_timeout_ms);
    const std::string key = header_value(head, "sec-websocket-key");
    if (key.empty())
        throw IoError("websocket handshake: missing Sec-WebSocket-Key");
    const std::string response = "HTTP/1.1 101 Switching Protocols\r\n"
                                 "Upgrade: websocket\r\n"
                                 "Connection: Upgrade\r\n"
                                 "Sec-WebSocket-Accept: " +
                                 websocket_accept_key(key) + "\r\n\r\n";
    socket.send_all(std::span(reinterpret_cast<const std::uint8_t *>(response.data()),
                              response.size()));
    return MessageChannel(std::move(socket), Transport::websocket, false);
}

MessageChannel MessageChannel::connect_websocket(const std::string &host, std::uint16_t port,
                                                 const std::string &path) {
    Socket s = connect_tcp(host, port);
    std::array<unsigned char, 16> nonce{};
    std::random_device rd;
    for (auto &b : nonce)
        b = static_cast<unsigned char>(rd());
    unsigned char encoded[32] = {};
    const int n = EVP_EncodeBlock(encoded, nonce.data(), static_cast<int>(nonce.size()));
    const std::string key(reinterpret_cast<char *>(encoded), static_cast<std::size_t>(n));
    const std::string request = "GET " + path + " HTTP/1.1\r\nHost: " + host + ":" +
                                std::to_string(port) +
                                "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                                "Sec-WebSocket-Key: " +
                                key + "\r\nSec-WebSocket-Version: 13\r\n\r\n";
    s.send_all(std::span(reinterpret_cast<const std::uint8_t *>(request.data()), request.size()));
    const std::string head = read_http_head(s, 5000);
    if (head.rfind("HTTP/1.1 101", 0) != 0)
        throw IoError("websocket handshake rejected: " + head.substr(0, head.find('\r')));
    if (header_value(head, "sec-websocket-accept") != websocket_accept_key(key))
        throw IoError("websocket handshake: bad accept key");
    return MessageChannel(std::move(s), Transport::websocket, true);
}

void MessageChannel::send(const wire::Message &message) {
    const auto bytes = wire::encode(message);
    if (transport_ == Transport::raw) {
        std::lock_guard lock(*send_mutex_);
        socket_.send_all(bytes);
    } else
        send_ws_frame(0x2, bytes);
}

void MessageChannel::send_ws_frame(std::uint8_t opcode, std::span<const std::uint8_t> payload) {
    std::vector<std::uint8_t> frame;
    frame.reserve(payload.size() + 14);
    frame.push_back(static_cast<std::uint8_t>(0x80 | opcode));
    const std::uint8_t mask_bit = client_ ? 0x80 : 0x00;
    const std::uint64_t len = payload.size();
    if (len < 126) {
        frame.push_back(static_cast<std::uint8_t>(mask_bit | len));
    } else if (len <= 0xFFFF) {
        frame.push_back(mask_bit | 126);
        frame.push_back(static_cast<std::uint8_t>(len >> 8));
        frame.push_back(static_cast<std::uint8_t>(len));
    } else {
        frame.push_back(mask_bit | 127);
        for (int i = 7; i >= 0; --i)
            frame.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
    }
    if (client_) {
        std::array<std::uint8_t, 4> mask{};
        std::random_device rd;
        for (auto &b : mask)
            b = static_cast<std::uint8_t>(rd());
        frame.insert(frame.end(), mask.begin(), mask.end());
        for (std::size_t i = 0; i < payload.size(); ++i)
            frame.push_back(payload[i] ^ mask[i % 4]);
    } else {
        frame.insert(frame.end(), payload.begin(), payload.end());
    }
    std::lock_guard lock(*send_mutex_);
    socket_.send_all(frame);
}

bool MessageChannel::pump_websocket(int timeout_ms) {
    std::array<std::uint8_t, 2> hdr{};
    if (socket_.recv_some(std::span(hdr).first(1), timeout_ms) == 0)
        return false;
    socket_.recv_exact(std::span(hdr).subspan(1));
    const std::uint8_t opcode = hdr[0] & 0x0F;
    const bool masked = hdr[1] & 0x80;
    std::uint64_t len = hdr[1] & 0x7F;
    if (len == 126) {
        std::array<std::uint8_t, 2> ext{};
        socket_.recv_exact(ext);
        len = (std::uint64_t{ext[0]} << 8) | ext[1];
    } else if (len == 127) {
        std::array<std::uint8_t, 8> ext{};
        socket_.recv_exact(ext);
        len = 0;
        for (auto b : ext)
            len = (len << 8) | b;
    }
    if (len > wire::kMaxMessageBytes + 4)
        throw IoError("websocket frame too large");
    std::array<std::uint8_t, 4> mask{};
    if (masked)
        socket_.recv_exact(mask);
    std::vector<std::uint8_t> payload(static_cast<std::size_t>(len));
    socket_.recv_exact(payload);
    if (masked)
        for (std::size_t i = 0; i < payload.size(); ++i)
            payload[i] ^= mask[i % 4];

    switch (opcode) {
    case 0x0: // continuation
    case 0x2: // binary
        decoder_.feed(payload);
        break;
    case 0x8:
        throw ConnectionClosed("websocket closed by peer");
    case 0x9:
        send_ws_frame(0xA, payload);
        break;
    case 0xA:
        break;
    default:
        throw IoError("websocket: unsupported opcode " + std::to_string(opcode));
    }
    return true;
}

std::optional<wire::Message> MessageChannel::receive(int timeout_ms) {
    for (;;) {
        if (auto msg = decoder_.next())
            return msg;
        if (transport_ == Transport::websocket) {
            if (!pump_websocket(timeout_ms))
                return std::nullopt;
        } else {
            std::array<std::uint8_t, 64 * 1024> buf{};
            const std::size_t n = socket_.recv_some(buf, timeout_ms);
            if (n == 0)
                return std::nullopt;
            decoder_.feed(std::span(buf).first(n));
        }
    }
}

void MessageChannel::close() {
    if (!socket_.valid())
        return;
    if (transport_ == Transport::websocket) {
        try {
            send_ws_frame(0x8, {});
        } catch (const IoError &) {
        }
    }
    socket_.shutdown();
}

} // namespace nvs
