#include "pgpp/wire.hpp"

#include "pgpp/error.hpp"

namespace pgpp::gw {

std::string_view to_string(DenyReason reason) {
  switch (reason) {
    case DenyReason::bad_signature: return "bad-signature";
    case DenyReason::wrong_slice: return "wrong-slice";
    case DenyReason::double_spend: return "double-spend";
    case DenyReason::store_unavailable: return "store-unavailable";
    case DenyReason::malformed: return "malformed";
  }
  return "unknown";
}

bool is_retryable(DenyReason reason) { return reason == DenyReason::store_unavailable; }

namespace {

void put_u64(Bytes& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_token(Bytes& out, const tokens::SignedToken& t) {
  const tokens::Message m = t.token.message();
  out.insert(out.end(), m.begin(), m.end());
  if (t.signature.size() > 0xffff) throw Error(ErrorCode::protocol, "signature too long");
  out.push_back(static_cast<std::uint8_t>(t.signature.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(t.signature.size()));
  out.insert(out.end(), t.signature.begin(), t.signature.end());
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> data) : data_(data) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > data_.size()) throw Error(ErrorCode::protocol, "truncated message");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (std::uint8_t b : take(8)) v = v << 8 | b;
    return v;
  }
  tokens::SignedToken token() {
    tokens::SignedToken t;
    t.token = tokens::Token::from_message(take(tokens::kMessageBytes));
    const auto len_bytes = take(2);
    const std::size_t len = static_cast<std::size_t>(len_bytes[0]) << 8 | len_bytes[1];
    const auto sig = take(len);
    t.signature.assign(sig.begin(), sig.end());
    return t;
  }
  void finish() const {
    if (pos_ != data_.size()) throw Error(ErrorCode::protocol, "trailing bytes in message");
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Bytes encode_payload(const WireMessage& message) {
  Bytes out{kProtocolVersion};
  std::visit(Overloaded{
                 [&](const AuthRequest& m) {
                   out.push_back(static_cast<std::uint8_t>(MessageType::auth));
                   put_token(out, m.token);
                 },
                 [&](const AuthOk& m) {
                   out.push_back(static_cast<std::uint8_t>(MessageType::auth_ok));
                   put_u64(out, static_cast<std::uint64_t>(m.until));
                 },
                 [&](const AuthFail& m) {
                   out.push_back(static_cast<std::uint8_t>(MessageType::auth_fail));
                   out.push_back(static_cast<std::uint8_t>(m.reason));
                   out.push_back(m.retryable ? 1 : 0);
                 },
                 [&](const StageRequest& m) {
                   out.push_back(static_cast<std::uint8_t>(MessageType::stage));
                   put_token(out, m.token);
                 },
                 [&](const StageOk& m) {
                   out.push_back(static_cast<std::uint8_t>(MessageType::stage_ok));
                   put_u64(out, m.slice_index);
                 },
             },
             message);
  return out;
}

WireMessage decode_payload(std::span<const std::uint8_t> payload) {
  Cursor c(payload);
  const std::uint8_t version = c.u8();
  if (version != kProtocolVersion) throw Error(ErrorCode::protocol, "unsupported protocol version " + std::to_string(version));
  const auto type = static_cast<MessageType>(c.u8());
  WireMessage out;
  switch (type) {
    case MessageType::auth: out = AuthRequest{c.token()}; break;
    case MessageType::auth_ok: out = AuthOk{static_cast<std::int64_t>(c.u64())}; break;
    case MessageType::auth_fail: {
      const std::uint8_t reason = c.u8();
      if (reason < 1 || reason > static_cast<std::uint8_t>(DenyReason::malformed)) {
        throw Error(ErrorCode::protocol, "unknown deny reason");
      }
      const std::uint8_t retry = c.u8();
      if (retry > 1) throw Error(ErrorCode::protocol, "bad retryable flag");
      out = AuthFail{static_cast<DenyReason>(reason), retry == 1};
      break;
    }
    case MessageType::stage: out = StageRequest{c.token()}; break;
    case MessageType::stage_ok: out = StageOk{c.u64()}; break;
    default: throw Error(ErrorCode::protocol, "unknown message type " + std::to_string(static_cast<int>(type)));
  }
  c.finish();
  return out;
}

Bytes encode_frame(const WireMessage& message) {
  const Bytes payload = encode_payload(message);
  Bytes out;
  out.reserve(payload.size() + 4);
  const auto len = static_cast<std::uint32_t>(payload.size());
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(len >> s));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

}  // namespace pgpp::gw
