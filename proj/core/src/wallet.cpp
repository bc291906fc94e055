#include "pgpp/wallet.hpp"

#include <cstring>

#include "pgpp/error.hpp"

namespace pgpp::tokens {
namespace {

constexpr std::uint8_t kWalletMagic[4] = {'P', 'G', 'W', '1'};

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > data_.size()) throw Error(ErrorCode::parse, "wallet: truncated");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>(b[0] << 8 | b[1]);
  }
  std::uint32_t u32() {
    auto b = take(4);
    return static_cast<std::uint32_t>(b[0]) << 24 | static_cast<std::uint32_t>(b[1]) << 16 |
           static_cast<std::uint32_t>(b[2]) << 8 | b[3];
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<SignedToken> Wallet::find(std::uint64_t slice_index) const {
  for (const SignedToken& t : tokens) {
    if (t.token.slice_index == slice_index) return t;
  }
  return std::nullopt;
}

nlohmann::json wallet_to_json(const Wallet& wallet) {
  nlohmann::json list = nlohmann::json::array();
  for (const SignedToken& t : wallet.tokens) {
    list.push_back({{"m", to_hex(t.token.message())}, {"signature", to_hex(t.signature)}});
  }
  return {{"version", 1}, {"period_id", wallet.period_id}, {"tokens", list}};
}

Wallet wallet_from_json(const nlohmann::json& doc) {
  try {
    Wallet w;
    w.period_id = doc.at("period_id").get<std::string>();
    for (const auto& entry : doc.at("tokens")) {
      w.tokens.push_back(SignedToken{Token::from_message(from_hex(entry.at("m").get<std::string>())),
                                     from_hex(entry.at("signature").get<std::string>())});
    }
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("wallet: ") + e.what());
  }
}

Bytes wallet_to_binary(const Wallet& wallet) {
  Bytes out(std::begin(kWalletMagic), std::end(kWalletMagic));
  put_u16(out, static_cast<std::uint16_t>(wallet.period_id.size()));
  out.insert(out.end(), wallet.period_id.begin(), wallet.period_id.end());
  put_u32(out, static_cast<std::uint32_t>(wallet.tokens.size()));
  for (const SignedToken& t : wallet.tokens) {
    const Message m = t.token.message();
    out.insert(out.end(), m.begin(), m.end());
    put_u16(out, static_cast<std::uint16_t>(t.signature.size()));
    out.insert(out.end(), t.signature.begin(), t.signature.end());
  }
  return out;
}

Wallet wallet_from_binary(std::span<const std::uint8_t> data) {
  Reader r(data);
  const auto magic = r.take(4);
  if (std::memcmp(magic.data(), kWalletMagic, 4) != 0) throw Error(ErrorCode::parse, "wallet: bad magic");
  Wallet w;
  const auto period = r.take(r.u16());
  w.period_id.assign(period.begin(), period.end());
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const Token token = Token::from_message(r.take(kMessageBytes));
    const auto sig = r.take(r.u16());
    w.tokens.push_back(SignedToken{token, Bytes(sig.begin(), sig.end())});
  }
  if (!r.done()) throw Error(ErrorCode::parse, "wallet: trailing bytes");
  return w;
}

PendingIssue prepare_issue(const PublicKeySet& keys, RandomSource& random) {
  PendingIssue pending;
  pending.period_id = keys.period_id;
  for (std::size_t i = 0; i < keys.slice_count(); ++i) {
    pending.tokens.push_back(Token::generate(i, random));
    pending.blinded.push_back(blind(pending.tokens.back(), keys.keys[i], random));
  }
  return pending;
}

Wallet finalize_issue(const PendingIssue& pending, std::span<const Bytes> blinded_signatures,
                      const PublicKeySet& keys) {
  if (blinded_signatures.size() != pending.tokens.size()) {
    throw Error(ErrorCode::invalid_argument, "expected one signature per token");
  }
  Wallet wallet{pending.period_id, {}};
  for (std::size_t i = 0; i < pending.tokens.size(); ++i) {
    const RsaPublicKey& key = keys.key(pending.tokens[i].slice_index);
    SignedToken signed_token{pending.tokens[i], unblind(blinded_signatures[i], pending.blinded[i].unblinding_secret, key)};
    if (!verify_signature(signed_token, key)) {
      throw Error(ErrorCode::crypto, "signature for slice " + std::to_string(pending.tokens[i].slice_index) +
                                         " does not verify");
    }
    wallet.tokens.push_back(std::move(signed_token));
  }
  return wallet;
}

nlohmann::json pending_to_json(const PendingIssue& pending) {
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < pending.tokens.size(); ++i) {
    list.push_back({{"m", to_hex(pending.tokens[i].message())},
                    {"blinded", to_hex(pending.blinded[i].blinded_message)},
                    {"unblinding_secret", to_hex(pending.blinded[i].unblinding_secret)}});
  }
  return {{"version", 1}, {"period_id", pending.period_id}, {"tokens", list}};
}

PendingIssue pending_from_json(const nlohmann::json& doc) {
  try {
    PendingIssue p;
    p.period_id = doc.at("period_id").get<std::string>();
    for (const auto& entry : doc.at("tokens")) {
      p.tokens.push_back(Token::from_message(from_hex(entry.at("m").get<std::string>())));
      p.blinded.push_back(BlindedToken{from_hex(entry.at("blinded").get<std::string>()),
                                       from_hex(entry.at("unblinding_secret").get<std::string>())});
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("pending issue: ") + e.what());
  }
}

}  // namespace pgpp::tokens
