#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pgpp/crypto.hpp"

namespace pgpp::gw {

// A TLS connection carrying length-prefixed frames.
class TlsStream {
 public:
  ~TlsStream();
  TlsStream(TlsStream&&) noexcept;
  TlsStream& operator=(TlsStream&&) noexcept;
  TlsStream(const TlsStream&) = delete;
  TlsStream& operator=(const TlsStream&) = delete;

  // Throws Error(io) on transport failure.
  void write_frame(std::span<const std::uint8_t> payload);
  // std::nullopt on orderly close; throws Error(protocol) on oversized frames.
  std::optional<Bytes> read_frame();

  const std::string& peer_address() const;

 private:
  friend class TlsServer;
  friend TlsStream tls_connect(const std::string&, std::uint16_t, const std::string&);
  struct Impl;
  explicit TlsStream(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

struct TlsServerOptions {
  std::string bind_address = "127.0.0.1";
  // 0 picks an ephemeral port.
  std::uint16_t port = 0;
  // PEM files; when empty a self-signed certificate is generated at startup.
  std::string certificate_file;
  std::string private_key_file;
};

// Thread-per-connection TLS listener.
class TlsServer {
 public:
  using Handler = std::function<void(TlsStream&)>;

  TlsServer(TlsServerOptions options, Handler handler);
  ~TlsServer();
  TlsServer(const TlsServer&) = delete;
  TlsServer& operator=(const TlsServer&) = delete;

  std::uint16_t port() const;
  // SHA-256 fingerprint of the server certificate (hex), for pinning.
  std::string certificate_fingerprint() const;

  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Connects and completes the handshake. When `pinned_fingerprint` is not
// empty the server certificate must match it.
TlsStream tls_connect(const std::string& host, std::uint16_t port, const std::string& pinned_fingerprint = {});

}  // namespace pgpp::gw
