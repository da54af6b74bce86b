#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "narvis/json_util.hpp"

namespace narvis {

/// A stored artifact value. Version 0 means the artifact does not exist yet.
struct Versioned {
  std::int64_t version = 0;
  Json value;
};

/// Directory-per-project JSON storage:
///   <root>/projects/<id>/project.json   metadata and timestamps
///   <root>/projects/<id>/source.svg     uploaded markup, immutable
///   <root>/projects/<id>/<artifact>.json  {"version", "value", "history"?}
/// Every write goes to a temporary file that is renamed into place.
class ProjectStore {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit ProjectStore(std::filesystem::path root, Clock clock = {});

  /// Throws SchemaViolation for an unsafe id and VersionConflict when it is taken.
  std::string create(const std::string& svg, const std::optional<std::string>& requested_id);
  bool exists(const std::string& id) const;
  std::vector<std::string> list() const;
  void remove(const std::string& id);

  std::string svg(const std::string& id) const;
  Json meta(const std::string& id) const;

  Versioned get(const std::string& id, const std::string& artifact) const;
  /// Compare-and-set: succeeds only when `expected` equals the stored
  /// version; returns the new version. Throws VersionConflict otherwise.
  std::int64_t put(const std::string& id, const std::string& artifact, std::int64_t expected, Json value,
                   bool keep_history = false);
  /// Every stored value of a history-keeping artifact, oldest first.
  std::vector<Json> history(const std::string& id, const std::string& artifact) const;

  void put_blob(const std::string& id, const std::string& name, const std::string& content);
  std::optional<std::string> blob(const std::string& id, const std::string& name) const;

  /// Serializes mutations of one project.
  std::mutex& project_mutex(const std::string& id);

 private:
  std::filesystem::path dir(const std::string& id) const;
  void require(const std::string& id) const;
  void touch(const std::string& id);

  std::filesystem::path root_;
  Clock clock_;
  std::mutex table_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> mutexes_;
};

void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::optional<std::string> read_file(const std::filesystem::path& path);

}  // namespace narvis
