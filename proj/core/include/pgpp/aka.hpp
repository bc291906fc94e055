#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgpp/crypto.hpp"
#include "pgpp/rng.hpp"

namespace pgpp::aka {

// Keyed 256-bit hash stands in for MILENAGE; the shared-IMSI effect is pure
// counter arithmetic and does not depend on the cipher.
using Key = std::array<std::uint8_t, 16>;
using Rand = std::array<std::uint8_t, 16>;
// (SQN xor AK) [6] | AMF [2] | MAC [8]
using Autn = std::array<std::uint8_t, 16>;
// (SQN_UE xor AK*) [6] | MAC-S [8]
using Auts = std::array<std::uint8_t, 14>;
using Res = std::array<std::uint8_t, 8>;
using Kasme = std::array<std::uint8_t, 32>;

inline constexpr std::uint64_t kSqnModulus = std::uint64_t{1} << 48;

struct AuthVector {
  Rand rand{};
  Autn autn{};
  Res xres{};
  Kasme k_asme{};
};

// Deterministic in (k, sqn, rand).
AuthVector make_vector(const Key& k, std::uint64_t sqn, const Rand& rand);

// One subscriber record at the HSS. `sqn` counts successful attaches.
struct HssRecord {
  Key k{};
  std::uint64_t sqn = 0;
};

// UE-side SIM state. The identity never leaves the device.
struct UeSim {
  Key k{};
  std::uint64_t sqn = 0;
};

// Fresh RAND, AUTN bound to the record's current SQN.
AuthVector hss_generate_vector(const HssRecord& hss, Rng& rng);

// Resynchronization: recovers SQN_UE from AUTS and answers with a vector for
// that SQN. std::nullopt if MAC-S does not verify.
std::optional<AuthVector> hss_resync_vector(const HssRecord& hss, const Rand& rand, const Auts& auts, Rng& rng);

// Counts a completed attach on the HSS side.
void hss_confirm_attach(HssRecord& hss);

struct UeOk {
  Res res{};
  Kasme k_asme{};
};
struct SyncFailure {
  Auts auts{};
  std::uint64_t ue_sqn = 0;
};
struct AuthReject {};

using UeCheckResult = std::variant<UeOk, SyncFailure, AuthReject>;

// Verifies AUTN and the embedded SQN. The SQN is accepted when it lies in
// [SQN_UE, SQN_UE + window] (mod 2^48); window 0 means exact match. On
// success the UE's SQN advances past the accepted value. A MAC mismatch
// (different K) is an AuthReject, not a sync failure.
UeCheckResult ue_check(UeSim& ue, const AuthVector& vector, std::uint64_t window = 0);

struct LatencyModel {
  // Per exchange latency is mean * U(1 - jitter, 1 + jitter).
  double mean_ms = 200.0;
  double jitter = 0.25;
  // HSS processing time per request; requests queue on the single record.
  double hss_service_ms = 2.0;
};

enum class ArrivalPattern {
  // Each UE starts after the previous one completed.
  sequential,
  // UEs arrive uniformly within arrival_window_ms.
  concurrent,
};

struct MassAttachConfig {
  std::size_t n_ues = 100;
  bool shared_imsi = true;
  ArrivalPattern arrival = ArrivalPattern::concurrent;
  double arrival_window_ms = 50.0;
  LatencyModel latency;
  std::uint64_t window = 0;
  std::uint64_t seed = 1;
  bool record_messages = false;
};

enum class AttachResult { attached, failed };

struct AttachOutcome {
  std::size_t ue_id = 0;
  int attempts = 0;
  int sync_failures = 0;
  double start_ms = 0.0;
  double total_delay_ms = 0.0;
  AttachResult result = AttachResult::failed;
};

struct MassAttachReport {
  std::vector<AttachOutcome> outcomes;
  // Final SQN per HSS record (one entry when the IMSI is shared).
  std::vector<std::uint64_t> hss_sqn;
  std::uint64_t successful_attaches = 0;
  // Messages exchanged with the network, when recorded.
  std::vector<nlohmann::json> messages;
};

// Mass attach against the HSS. With a shared IMSI all UEs hit one record;
// a UE whose SQN lags gets a sync_failure, resynchronizes and repeats the
// attach. Without sharing, each UE has its own record (classic AKA).
MassAttachReport simulate_mass_attach(const MassAttachConfig& config);

// Per-connection context key for UEs sharing one IMSI: the first 128 bits of
// SHA-256 over a domain tag, the IMSI and the salt.
using PgppImsi = std::array<std::uint8_t, 16>;
PgppImsi pgpp_context_key(std::string_view imsi, std::uint64_t connection_salt);

inline constexpr std::string_view kSharedImsi = "001010000000001";

nlohmann::json outcome_to_json(const AttachOutcome& outcome);

// Rows of (bin_start_ms, count, fraction of UEs) over completion delays.
struct DelayBin {
  double start_ms = 0.0;
  std::size_t count = 0;
  double density = 0.0;
};
std::vector<DelayBin> delay_histogram(std::span<const AttachOutcome> outcomes, double bin_ms = 50.0);

}  // namespace pgpp::aka
