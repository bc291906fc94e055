#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgpp/crypto.hpp"

namespace pgpp::tokens {

// What the store keeps per spent token. No user identity is ever stored.
struct SpentKey {
  std::string period_id;
  std::uint64_t slice_index = 0;
  Digest digest{};

  friend auto operator<=>(const SpentKey&, const SpentKey&) = default;
};

enum class InsertResult { inserted, already_present };

// Raised when the backing store cannot be reached. Callers must treat this
// as "not accepted".
class StoreUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Consistent set of spent tokens. insert() is an atomic test-and-set and is
// the linearization point for double-spend detection.
class SpentTokenStore {
 public:
  virtual ~SpentTokenStore() = default;

  virtual InsertResult insert(const SpentKey& key) = 0;
  virtual bool contains(const SpentKey& key) const = 0;
  virtual std::vector<SpentKey> snapshot() const = 0;
};

class InMemorySpentStore final : public SpentTokenStore {
 public:
  InsertResult insert(const SpentKey& key) override;
  bool contains(const SpentKey& key) const override;
  std::vector<SpentKey> snapshot() const override;

 private:
  mutable std::mutex mutex_;
  std::set<SpentKey> keys_;
};

// Durable store in an SQLite database file. Several processes or instances
// may open the same file; uniqueness is enforced by the primary key.
class SqliteSpentStore final : public SpentTokenStore {
 public:
  // Throws StoreUnavailable if the database cannot be opened.
  explicit SqliteSpentStore(const std::string& path);
  ~SqliteSpentStore() override;
  SqliteSpentStore(const SqliteSpentStore&) = delete;
  SqliteSpentStore& operator=(const SqliteSpentStore&) = delete;

  InsertResult insert(const SpentKey& key) override;
  bool contains(const SpentKey& key) const override;
  std::vector<SpentKey> snapshot() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pgpp::tokens
