#include "pgpp/spent_store.hpp"

#include <sqlite3.h>

namespace pgpp::tokens {

InsertResult InMemorySpentStore::insert(const SpentKey& key) {
  std::lock_guard lock(mutex_);
  return keys_.insert(key).second ? InsertResult::inserted : InsertResult::already_present;
}

bool InMemorySpentStore::contains(const SpentKey& key) const {
  std::lock_guard lock(mutex_);
  return keys_.contains(key);
}

std::vector<SpentKey> InMemorySpentStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return {keys_.begin(), keys_.end()};
}

struct SqliteSpentStore::Impl {
  sqlite3* db = nullptr;
  sqlite3_stmt* insert = nullptr;
  sqlite3_stmt* lookup = nullptr;
  // One connection per instance; statements are not shared across threads.
  mutable std::mutex mutex;

  ~Impl() {
    sqlite3_finalize(insert);
    sqlite3_finalize(lookup);
    sqlite3_close(db);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw StoreUnavailable("spent store: " + what + ": " + (db != nullptr ? sqlite3_errmsg(db) : "no connection"));
  }

  void bind(sqlite3_stmt* stmt, const SpentKey& key) const {
    sqlite3_reset(stmt);
    sqlite3_clear_bindings(stmt);
    if (sqlite3_bind_text(stmt, 1, key.period_id.c_str(), static_cast<int>(key.period_id.size()), SQLITE_TRANSIENT) !=
            SQLITE_OK ||
        sqlite3_bind_int64(stmt, 2, static_cast<sqlite3_int64>(key.slice_index)) != SQLITE_OK ||
        sqlite3_bind_blob(stmt, 3, key.digest.data(), static_cast<int>(key.digest.size()), SQLITE_TRANSIENT) !=
            SQLITE_OK) {
      fail("bind");
    }
  }
};

SqliteSpentStore::SqliteSpentStore(const std::string& path) : impl_(std::make_unique<Impl>()) {
  if (sqlite3_open_v2(path.c_str(), &impl_->db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX,
                      nullptr) != SQLITE_OK) {
    impl_->fail("open " + path);
  }
  sqlite3_busy_timeout(impl_->db, 10000);
  const char* schema =
      "PRAGMA journal_mode=WAL;"
      "PRAGMA synchronous=NORMAL;"
      "CREATE TABLE IF NOT EXISTS spent_tokens ("
      "  period_id TEXT NOT NULL,"
      "  slice_index INTEGER NOT NULL,"
      "  digest BLOB NOT NULL,"
      "  PRIMARY KEY (period_id, slice_index, digest)) WITHOUT ROWID;";
  if (sqlite3_exec(impl_->db, schema, nullptr, nullptr, nullptr) != SQLITE_OK) impl_->fail("schema");
  if (sqlite3_prepare_v2(impl_->db,
                         "INSERT OR IGNORE INTO spent_tokens (period_id, slice_index, digest) VALUES (?1, ?2, ?3)", -1,
                         &impl_->insert, nullptr) != SQLITE_OK ||
      sqlite3_prepare_v2(impl_->db,
                         "SELECT 1 FROM spent_tokens WHERE period_id = ?1 AND slice_index = ?2 AND digest = ?3", -1,
                         &impl_->lookup, nullptr) != SQLITE_OK) {
    impl_->fail("prepare");
  }
}

SqliteSpentStore::~SqliteSpentStore() = default;

InsertResult SqliteSpentStore::insert(const SpentKey& key) {
  std::lock_guard lock(impl_->mutex);
  impl_->bind(impl_->insert, key);
  if (sqlite3_step(impl_->insert) != SQLITE_DONE) impl_->fail("insert");
  return sqlite3_changes(impl_->db) == 1 ? InsertResult::inserted : InsertResult::already_present;
}

bool SqliteSpentStore::contains(const SpentKey& key) const {
  std::lock_guard lock(impl_->mutex);
  impl_->bind(impl_->lookup, key);
  const int rc = sqlite3_step(impl_->lookup);
  if (rc != SQLITE_ROW && rc != SQLITE_DONE) impl_->fail("lookup");
  return rc == SQLITE_ROW;
}

std::vector<SpentKey> SqliteSpentStore::snapshot() const {
  std::lock_guard lock(impl_->mutex);
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(impl_->db,
                         "SELECT period_id, slice_index, digest FROM spent_tokens ORDER BY period_id, slice_index, digest",
                         -1, &stmt, nullptr) != SQLITE_OK) {
    impl_->fail("snapshot");
  }
  std::vector<SpentKey> out;
  int rc = SQLITE_ROW;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    SpentKey key;
    key.period_id = reinterpret_cast<const char*>(sqlite3_column_text(stmt, 0));
    key.slice_index = static_cast<std::uint64_t>(sqlite3_column_int64(stmt, 1));
    const auto* blob = static_cast<const std::uint8_t*>(sqlite3_column_blob(stmt, 2));
    if (sqlite3_column_bytes(stmt, 2) == static_cast<int>(key.digest.size())) {
      std::copy(blob, blob + key.digest.size(), key.digest.begin());
    }
    out.push_back(std::move(key));
  }
  sqlite3_finalize(stmt);
  if (rc != SQLITE_DONE) impl_->fail("snapshot");
  return out;
}

}  // namespace pgpp::tokens
