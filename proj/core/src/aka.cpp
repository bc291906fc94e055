#include "pgpp/aka.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "pgpp/error.hpp"

namespace pgpp::aka {

namespace {

constexpr std::array<std::uint8_t, 2> kAmf{0x80, 0x00};

using Sqn6 = std::array<std::uint8_t, 6>;

Sqn6 sqn_bytes(std::uint64_t sqn) {
  Sqn6 out{};
  for (int i = 0; i < 6; ++i) out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(sqn >> (8 * (5 - i)));
  return out;
}

std::uint64_t sqn_value(std::span<const std::uint8_t> b) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 6; ++i) v = v << 8 | b[i];
  return v;
}

// Keyed function family f(label, parts...) = HMAC-SHA256(K, label || parts).
Digest keyed(const Key& k, std::string_view label, std::initializer_list<std::span<const std::uint8_t>> parts) {
  Bytes data(label.begin(), label.end());
  for (const auto& p : parts) data.insert(data.end(), p.begin(), p.end());
  return hmac_sha256(k, data);
}

Sqn6 anonymity_key(const Key& k, const Rand& rand, std::string_view label) {
  const Digest d = keyed(k, label, {rand});
  Sqn6 out{};
  std::copy_n(d.begin(), 6, out.begin());
  return out;
}

std::array<std::uint8_t, 8> mac_a(const Key& k, std::uint64_t sqn, const Rand& rand) {
  const Sqn6 s = sqn_bytes(sqn);
  const Digest d = keyed(k, "f1", {s, kAmf, rand});
  std::array<std::uint8_t, 8> out{};
  std::copy_n(d.begin(), 8, out.begin());
  return out;
}

std::array<std::uint8_t, 8> mac_s(const Key& k, std::uint64_t sqn, const Rand& rand) {
  const Sqn6 s = sqn_bytes(sqn);
  const Digest d = keyed(k, "f1*", {s, rand});
  std::array<std::uint8_t, 8> out{};
  std::copy_n(d.begin(), 8, out.begin());
  return out;
}

Rand fresh_rand(Rng& rng) {
  Rand out{};
  for (std::size_t i = 0; i < out.size(); i += 8) {
    const std::uint64_t v = rng();
    for (std::size_t j = 0; j < 8; ++j) out[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
  }
  return out;
}

Key derive_key(std::uint64_t seed, std::uint64_t index) {
  Rng rng(derive_seed(seed, "aka-key", index));
  Key k{};
  for (std::size_t i = 0; i < k.size(); i += 8) {
    const std::uint64_t v = rng();
    for (std::size_t j = 0; j < 8; ++j) k[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
  }
  return k;
}

}  // namespace

AuthVector make_vector(const Key& k, std::uint64_t sqn, const Rand& rand) {
  sqn %= kSqnModulus;
  AuthVector v;
  v.rand = rand;
  const Sqn6 ak = anonymity_key(k, rand, "f5");
  const Sqn6 s = sqn_bytes(sqn);
  for (std::size_t i = 0; i < 6; ++i) v.autn[i] = s[i] ^ ak[i];
  v.autn[6] = kAmf[0];
  v.autn[7] = kAmf[1];
  const auto mac = mac_a(k, sqn, rand);
  std::copy(mac.begin(), mac.end(), v.autn.begin() + 8);
  const Digest res = keyed(k, "f2", {rand});
  std::copy_n(res.begin(), v.xres.size(), v.xres.begin());
  v.k_asme = keyed(k, "kasme", {s, rand});
  return v;
}

AuthVector hss_generate_vector(const HssRecord& hss, Rng& rng) { return make_vector(hss.k, hss.sqn, fresh_rand(rng)); }

std::optional<AuthVector> hss_resync_vector(const HssRecord& hss, const Rand& rand, const Auts& auts, Rng& rng) {
  const Sqn6 ak = anonymity_key(hss.k, rand, "f5*");
  Sqn6 s{};
  for (std::size_t i = 0; i < 6; ++i) s[i] = auts[i] ^ ak[i];
  const std::uint64_t ue_sqn = sqn_value(s);
  const auto expected = mac_s(hss.k, ue_sqn, rand);
  if (!std::equal(expected.begin(), expected.end(), auts.begin() + 6)) return std::nullopt;
  return make_vector(hss.k, ue_sqn, fresh_rand(rng));
}

void hss_confirm_attach(HssRecord& hss) { hss.sqn = (hss.sqn + 1) % kSqnModulus; }

UeCheckResult ue_check(UeSim& ue, const AuthVector& vector, std::uint64_t window) {
  const Sqn6 ak = anonymity_key(ue.k, vector.rand, "f5");
  Sqn6 s{};
  for (std::size_t i = 0; i < 6; ++i) s[i] = vector.autn[i] ^ ak[i];
  const std::uint64_t sqn = sqn_value(s);
  const auto mac = mac_a(ue.k, sqn, vector.rand);
  if (!std::equal(mac.begin(), mac.end(), vector.autn.begin() + 8) || vector.autn[6] != kAmf[0] ||
      vector.autn[7] != kAmf[1]) {
    return AuthReject{};
  }
  const std::uint64_t ahead = (sqn + kSqnModulus - ue.sqn % kSqnModulus) % kSqnModulus;
  if (ahead > window) {
    SyncFailure failure;
    failure.ue_sqn = ue.sqn;
    const Sqn6 ak_star = anonymity_key(ue.k, vector.rand, "f5*");
    const Sqn6 ue_s = sqn_bytes(ue.sqn);
    for (std::size_t i = 0; i < 6; ++i) failure.auts[i] = ue_s[i] ^ ak_star[i];
    const auto macs = mac_s(ue.k, ue.sqn, vector.rand);
    std::copy(macs.begin(), macs.end(), failure.auts.begin() + 6);
    return failure;
  }
  ue.sqn = (sqn + 1) % kSqnModulus;
  UeOk ok;
  const Digest res = keyed(ue.k, "f2", {vector.rand});
  std::copy_n(res.begin(), ok.res.size(), ok.res.begin());
  ok.k_asme = keyed(ue.k, "kasme", {sqn_bytes(sqn), vector.rand});
  return ok;
}

PgppImsi pgpp_context_key(std::string_view imsi, std::uint64_t connection_salt) {
  std::array<std::uint8_t, 8> salt{};
  for (int i = 0; i < 8; ++i) salt[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(connection_salt >> (8 * (7 - i)));
  const Digest d = sha256({as_bytes("pgpp-imsi"), as_bytes(imsi), salt});
  PgppImsi out{};
  std::copy_n(d.begin(), out.size(), out.begin());
  return out;
}

namespace {

enum class Leg { attach, resync };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  std::size_t ue = 0;
  Leg leg = Leg::attach;

  bool operator>(const Event& other) const { return std::tie(time, seq) > std::tie(other.time, other.seq); }
};

std::string unique_imsi(std::size_t ue) {
  std::string digits = std::to_string(ue + 1);
  return "00101" + std::string(10 - std::min<std::size_t>(10, digits.size()), '0') + digits;
}

}  // namespace

MassAttachReport simulate_mass_attach(const MassAttachConfig& config) {
  if (config.n_ues == 0) throw Error(ErrorCode::invalid_argument, "n_ues must be at least 1");
  const LatencyModel& lat = config.latency;
  if (lat.mean_ms < 0 || lat.jitter < 0 || lat.jitter > 1 || lat.hss_service_ms < 0) {
    throw Error(ErrorCode::invalid_argument, "bad latency model");
  }
  const std::size_t n = config.n_ues;
  Rng arrival_rng(derive_seed(config.seed, "aka-arrival"));
  Rng latency_rng(derive_seed(config.seed, "aka-latency"));
  Rng hss_rng(derive_seed(config.seed, "aka-rand"));

  // Shared IMSI: every SIM carries the same K and all requests hit record 0.
  std::vector<HssRecord> records(config.shared_imsi ? 1 : n);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].k = derive_key(config.seed, i);
  std::vector<UeSim> sims(n);
  std::vector<std::string> imsis(n);
  std::vector<PgppImsi> contexts(n);
  for (std::size_t i = 0; i < n; ++i) {
    sims[i].k = records[config.shared_imsi ? 0 : i].k;
    imsis[i] = config.shared_imsi ? std::string(kSharedImsi) : unique_imsi(i);
    contexts[i] = pgpp_context_key(imsis[i], derive_seed(config.seed, "aka-salt", i));
  }

  MassAttachReport report;
  report.outcomes.resize(n);
  std::vector<AuthVector> pending(n);
  std::vector<SyncFailure> failures(n);

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(arrival_rng, i)]);

  const auto arrive = [&](std::size_t ue, double t) {
    report.outcomes[ue].ue_id = ue;
    report.outcomes[ue].start_ms = t;
    queue.push(Event{t, seq++, ue, Leg::attach});
  };
  if (config.arrival == ArrivalPattern::concurrent) {
    for (std::size_t ue : order) arrive(ue, uniform_real(arrival_rng, 0.0, config.arrival_window_ms));
  } else {
    arrive(order[0], 0.0);
  }
  std::size_t next_sequential = 1;

  const auto round_latency = [&] { return lat.mean_ms * uniform_real(latency_rng, 1.0 - lat.jitter, 1.0 + lat.jitter); };
  const auto message = [&](double t, std::size_t ue, std::string_view type) {
    if (!config.record_messages) return;
    report.messages.push_back(
        {{"t_ms", t}, {"type", type}, {"imsi", imsis[ue]}, {"context", to_hex(contexts[ue])}});
  };

  double hss_free = 0.0;
  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();
    AttachOutcome& out = report.outcomes[ev.ue];
    HssRecord& hss = records[config.shared_imsi ? 0 : ev.ue];
    UeSim& sim = sims[ev.ue];

    // The record is a serialized state machine: SQN logic commits at the
    // service instant, in queue order.
    const double served = std::max(ev.time, hss_free) + lat.hss_service_ms;
    hss_free = served;

    std::optional<AuthVector> vector;
    if (ev.leg == Leg::attach) {
      ++out.attempts;
      message(ev.time, ev.ue, "attach_request");
      vector = hss_generate_vector(hss, hss_rng);
    } else {
      message(ev.time, ev.ue, "resync_request");
      vector = hss_resync_vector(hss, pending[ev.ue].rand, failures[ev.ue].auts, hss_rng);
      if (!vector) throw Error(ErrorCode::crypto, "resynchronization MAC-S mismatch");
      // The UE begins the attach sequence again with the resynchronized vector.
      ++out.attempts;
    }
    pending[ev.ue] = *vector;
    const double done = served + round_latency();
    const UeCheckResult check = ue_check(sim, *vector, config.window);
    if (std::holds_alternative<UeOk>(check)) {
      hss_confirm_attach(hss);
      ++report.successful_attaches;
      out.result = AttachResult::attached;
      out.total_delay_ms = done - out.start_ms;
      message(done, ev.ue, "attach_accept");
      if (config.arrival == ArrivalPattern::sequential && next_sequential < n) arrive(order[next_sequential++], done);
    } else if (const auto* sf = std::get_if<SyncFailure>(&check); sf != nullptr && ev.leg == Leg::attach) {
      ++out.sync_failures;
      failures[ev.ue] = *sf;
      message(done, ev.ue, "sync_failure");
      queue.push(Event{done, seq++, ev.ue, Leg::resync});
    } else {
      out.result = AttachResult::failed;
      out.total_delay_ms = done - out.start_ms;
      message(done, ev.ue, "attach_reject");
      if (config.arrival == ArrivalPattern::sequential && next_sequential < n) arrive(order[next_sequential++], done);
    }
  }

  for (const auto& r : records) report.hss_sqn.push_back(r.sqn);
  return report;
}

nlohmann::json outcome_to_json(const AttachOutcome& outcome) {
  return {{"ue_id", outcome.ue_id},
          {"attempts", outcome.attempts},
          {"sync_failures", outcome.sync_failures},
          {"start_ms", outcome.start_ms},
          {"total_delay_ms", outcome.total_delay_ms},
          {"result", outcome.result == AttachResult::attached ? "attached" : "failed"}};
}

std::vector<DelayBin> delay_histogram(std::span<const AttachOutcome> outcomes, double bin_ms) {
  if (bin_ms <= 0) throw Error(ErrorCode::invalid_argument, "bin width must be positive");
  std::vector<DelayBin> bins;
  if (outcomes.empty()) return bins;
  double max_delay = 0.0;
  for (const auto& o : outcomes) max_delay = std::max(max_delay, o.total_delay_ms);
  const auto count = static_cast<std::size_t>(std::floor(max_delay / bin_ms)) + 1;
  bins.resize(count);
  for (std::size_t i = 0; i < count; ++i) bins[i].start_ms = static_cast<double>(i) * bin_ms;
  for (const auto& o : outcomes) {
    const auto idx = std::min(count - 1, static_cast<std::size_t>(std::floor(o.total_delay_ms / bin_ms)));
    ++bins[idx].count;
  }
  for (auto& b : bins) b.density = static_cast<double>(b.count) / static_cast<double>(outcomes.size());
  return bins;
}

}  // namespace pgpp::aka
