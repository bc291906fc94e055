#include "pgpp/tls.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <mutex>

#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/ssl.h>
#include <openssl/x509.h>

#include "pgpp/error.hpp"
#include "pgpp/wire.hpp"

namespace pgpp::gw {

namespace {

std::string openssl_error(std::string_view what) {
  std::string out(what);
  if (const unsigned long code = ERR_get_error(); code != 0) {
    char buf[256];
    ERR_error_string_n(code, buf, sizeof buf);
    out += ": ";
    out += buf;
  }
  ERR_clear_error();
  return out;
}

struct SslCtxDeleter {
  void operator()(SSL_CTX* ctx) const { SSL_CTX_free(ctx); }
};
struct SslDeleter {
  void operator()(SSL* ssl) const { SSL_free(ssl); }
};
struct X509Deleter {
  void operator()(X509* x) const { X509_free(x); }
};
struct PkeyDeleter {
  void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
};

using SslCtxPtr = std::unique_ptr<SSL_CTX, SslCtxDeleter>;
using SslPtr = std::unique_ptr<SSL, SslDeleter>;
using X509Ptr = std::unique_ptr<X509, X509Deleter>;
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

std::string fingerprint_of(X509* cert) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (X509_digest(cert, EVP_sha256(), md, &len) != 1) throw Error(ErrorCode::crypto, openssl_error("X509_digest"));
  return to_hex(std::span<const std::uint8_t>(md, len));
}

// Short-lived self-signed P-256 certificate for the listener.
std::pair<X509Ptr, PkeyPtr> self_signed_certificate() {
  PkeyPtr key(EVP_EC_gen("P-256"));
  if (!key) throw Error(ErrorCode::crypto, openssl_error("EVP_EC_gen"));
  X509Ptr cert(X509_new());
  if (!cert) throw Error(ErrorCode::crypto, openssl_error("X509_new"));
  X509_set_version(cert.get(), 2);
  ASN1_INTEGER_set(X509_get_serialNumber(cert.get()), 1);
  X509_gmtime_adj(X509_getm_notBefore(cert.get()), -60);
  X509_gmtime_adj(X509_getm_notAfter(cert.get()), 60L * 60 * 24 * 30);
  X509_set_pubkey(cert.get(), key.get());
  X509_NAME* name = X509_get_subject_name(cert.get());
  X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_ASC, reinterpret_cast<const unsigned char*>("pgpp-gateway"), -1,
                             -1, 0);
  X509_set_issuer_name(cert.get(), name);
  if (X509_sign(cert.get(), key.get(), EVP_sha256()) == 0) throw Error(ErrorCode::crypto, openssl_error("X509_sign"));
  return {std::move(cert), std::move(key)};
}

std::string socket_peer(int fd) {
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  if (getpeername(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return "unknown";
  char host[INET6_ADDRSTRLEN] = {};
  if (addr.ss_family == AF_INET) {
    inet_ntop(AF_INET, &reinterpret_cast<sockaddr_in*>(&addr)->sin_addr, host, sizeof host);
  } else if (addr.ss_family == AF_INET6) {
    inet_ntop(AF_INET6, &reinterpret_cast<sockaddr_in6*>(&addr)->sin6_addr, host, sizeof host);
  } else {
    return "unknown";
  }
  return host;
}

}  // namespace

struct TlsStream::Impl {
  SslCtxPtr ctx;  // only set for client streams
  SslPtr ssl;
  int fd = -1;
  std::string peer;

  ~Impl() {
    if (ssl) SSL_shutdown(ssl.get());
    ssl.reset();
    if (fd >= 0) ::close(fd);
  }

  bool read_exact(std::uint8_t* out, std::size_t n, bool eof_ok) {
    std::size_t got = 0;
    while (got < n) {
      const int r = SSL_read(ssl.get(), out + got, static_cast<int>(n - got));
      if (r <= 0) {
        const int err = SSL_get_error(ssl.get(), r);
        if (got == 0 && eof_ok && (err == SSL_ERROR_ZERO_RETURN || err == SSL_ERROR_SYSCALL)) {
          ERR_clear_error();
          return false;
        }
        throw Error(ErrorCode::io, openssl_error("TLS read failed"));
      }
      got += static_cast<std::size_t>(r);
    }
    return true;
  }
};

TlsStream::TlsStream(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
TlsStream::~TlsStream() = default;
TlsStream::TlsStream(TlsStream&&) noexcept = default;
TlsStream& TlsStream::operator=(TlsStream&&) noexcept = default;

const std::string& TlsStream::peer_address() const { return impl_->peer; }

void TlsStream::write_frame(std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxFrameBytes) throw Error(ErrorCode::protocol, "frame too large");
  Bytes frame;
  frame.reserve(payload.size() + 4);
  const auto len = static_cast<std::uint32_t>(payload.size());
  for (int s = 24; s >= 0; s -= 8) frame.push_back(static_cast<std::uint8_t>(len >> s));
  frame.insert(frame.end(), payload.begin(), payload.end());
  std::size_t sent = 0;
  while (sent < frame.size()) {
    const int w = SSL_write(impl_->ssl.get(), frame.data() + sent, static_cast<int>(frame.size() - sent));
    if (w <= 0) throw Error(ErrorCode::io, openssl_error("TLS write failed"));
    sent += static_cast<std::size_t>(w);
  }
}

std::optional<Bytes> TlsStream::read_frame() {
  std::uint8_t header[4];
  if (!impl_->read_exact(header, 4, true)) return std::nullopt;
  const std::uint32_t len = static_cast<std::uint32_t>(header[0]) << 24 | static_cast<std::uint32_t>(header[1]) << 16 |
                            static_cast<std::uint32_t>(header[2]) << 8 | header[3];
  if (len > kMaxFrameBytes) throw Error(ErrorCode::protocol, "frame of " + std::to_string(len) + " bytes exceeds limit");
  Bytes payload(len);
  if (len > 0) impl_->read_exact(payload.data(), len, false);
  return payload;
}

struct TlsServer::Impl {
  TlsServerOptions options;
  Handler handler;
  SslCtxPtr ctx;
  std::string fingerprint;
  int listen_fd = -1;
  std::uint16_t port = 0;
  std::atomic<bool> running{false};
  std::thread acceptor;
  std::mutex workers_mutex;
  std::vector<std::thread> workers;
  std::vector<int> open_fds;

  void serve(int fd) {
    try {
      auto stream = std::make_unique<TlsStream::Impl>();
      stream->fd = fd;
      stream->peer = socket_peer(fd);
      stream->ssl.reset(SSL_new(ctx.get()));
      SSL_set_fd(stream->ssl.get(), fd);
      if (SSL_accept(stream->ssl.get()) != 1) {
        ERR_clear_error();
        return;  // Impl dtor closes fd
      }
      TlsStream tls(std::move(stream));
      handler(tls);
    } catch (const std::exception&) {
      // A broken connection only affects its own worker.
    }
    std::lock_guard lock(workers_mutex);
    std::erase(open_fds, fd);
  }

  void accept_loop() {
    while (running) {
      const int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) {
        if (!running) break;
        continue;
      }
      std::lock_guard lock(workers_mutex);
      open_fds.push_back(fd);
      workers.emplace_back([this, fd] { serve(fd); });
    }
  }
};

TlsServer::TlsServer(TlsServerOptions options, Handler handler) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->handler = std::move(handler);
  impl_->ctx.reset(SSL_CTX_new(TLS_server_method()));
  if (!impl_->ctx) throw Error(ErrorCode::crypto, openssl_error("SSL_CTX_new"));
  SSL_CTX_set_min_proto_version(impl_->ctx.get(), TLS1_2_VERSION);

  X509* cert = nullptr;
  if (impl_->options.certificate_file.empty()) {
    auto [generated, key] = self_signed_certificate();
    if (SSL_CTX_use_certificate(impl_->ctx.get(), generated.get()) != 1 ||
        SSL_CTX_use_PrivateKey(impl_->ctx.get(), key.get()) != 1) {
      throw Error(ErrorCode::crypto, openssl_error("installing certificate"));
    }
  } else {
    if (SSL_CTX_use_certificate_chain_file(impl_->ctx.get(), impl_->options.certificate_file.c_str()) != 1 ||
        SSL_CTX_use_PrivateKey_file(impl_->ctx.get(), impl_->options.private_key_file.c_str(), SSL_FILETYPE_PEM) !=
            1) {
      throw Error(ErrorCode::io, openssl_error("loading certificate files"));
    }
  }
  cert = SSL_CTX_get0_certificate(impl_->ctx.get());
  impl_->fingerprint = fingerprint_of(cert);
}

TlsServer::~TlsServer() { stop(); }

std::uint16_t TlsServer::port() const { return impl_->port; }
std::string TlsServer::certificate_fingerprint() const { return impl_->fingerprint; }

void TlsServer::start() {
  if (impl_->running) return;
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::io, std::string("socket: ") + std::strerror(errno));
  const int yes = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(impl_->options.port);
  if (inet_pton(AF_INET, impl_->options.bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw Error(ErrorCode::config, "bad bind address " + impl_->options.bind_address);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 128) != 0) {
    const std::string msg = std::strerror(errno);
    ::close(fd);
    throw Error(ErrorCode::io, "listen on " + impl_->options.bind_address + ":" +
                                   std::to_string(impl_->options.port) + ": " + msg);
  }
  socklen_t len = sizeof addr;
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  impl_->port = ntohs(addr.sin_port);
  impl_->listen_fd = fd;
  impl_->running = true;
  impl_->acceptor = std::thread([this] { impl_->accept_loop(); });
}

void TlsServer::stop() {
  if (!impl_ || !impl_->running.exchange(false)) return;
  ::shutdown(impl_->listen_fd, SHUT_RDWR);
  ::close(impl_->listen_fd);
  impl_->listen_fd = -1;
  if (impl_->acceptor.joinable()) impl_->acceptor.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->workers_mutex);
    for (int fd : impl_->open_fds) ::shutdown(fd, SHUT_RDWR);
    workers.swap(impl_->workers);
  }
  for (auto& w : workers) {
    if (w.joinable()) w.join();
  }
}

TlsStream tls_connect(const std::string& host, std::uint16_t port, const std::string& pinned_fingerprint) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw Error(ErrorCode::io, "resolve " + host + ": " + gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(found);
  if (fd < 0) throw Error(ErrorCode::io, "connect to " + host + ":" + service + " failed");

  auto impl = std::make_unique<TlsStream::Impl>();
  impl->fd = fd;
  impl->peer = host;
  impl->ctx.reset(SSL_CTX_new(TLS_client_method()));
  if (!impl->ctx) throw Error(ErrorCode::crypto, openssl_error("SSL_CTX_new"));
  SSL_CTX_set_min_proto_version(impl->ctx.get(), TLS1_2_VERSION);
  impl->ssl.reset(SSL_new(impl->ctx.get()));
  SSL_set_fd(impl->ssl.get(), fd);
  SSL_set_tlsext_host_name(impl->ssl.get(), host.c_str());
  if (SSL_connect(impl->ssl.get()) != 1) throw Error(ErrorCode::io, openssl_error("TLS handshake failed"));
  if (!pinned_fingerprint.empty()) {
    X509Ptr cert(SSL_get1_peer_certificate(impl->ssl.get()));
    if (!cert || fingerprint_of(cert.get()) != pinned_fingerprint) {
      throw Error(ErrorCode::crypto, "server certificate does not match pinned fingerprint");
    }
  }
  return TlsStream(std::move(impl));
}

}  // namespace pgpp::gw
