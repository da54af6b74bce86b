#include "narvis/project_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "narvis/analytics.hpp"
#include "narvis/error.hpp"

namespace narvis {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  int fd = ::open(tmp.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace " + path.string() + ": " + ec.message());
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ProjectStore::ProjectStore(fs::path root, Clock clock) : root_(std::move(root)), clock_(std::move(clock)) {
  if (!clock_)
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  fs::create_directories(root_ / "projects");
}

fs::path ProjectStore::dir(const std::string& id) const { return root_ / "projects" / id; }

void ProjectStore::require(const std::string& id) const {
  if (!exists(id)) throw Error(ErrorCode::UnknownProject, "unknown project '" + id + "'", id);
}

bool ProjectStore::exists(const std::string& id) const {
  return is_safe_identifier(id) && fs::exists(dir(id) / "project.json");
}

std::vector<std::string> ProjectStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_ / "projects"))
    if (fs::exists(entry.path() / "project.json")) ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string ProjectStore::create(const std::string& svg, const std::optional<std::string>& requested_id) {
  std::lock_guard lock(table_mutex_);
  std::string id;
  if (requested_id) {
    if (!is_safe_identifier(*requested_id))
      json_util::schema_error("/project_id", "project_id may use letters, digits, '-', '_' and '.'");
    if (exists(*requested_id))
      throw Error(ErrorCode::VersionConflict, "project '" + *requested_id + "' already exists", "/project_id");
    id = *requested_id;
  } else {
    int n = 1;
    while (fs::exists(dir("project-" + std::to_string(n)))) ++n;
    id = "project-" + std::to_string(n);
  }
  fs::create_directories(dir(id));
  write_file_atomic(dir(id) / "source.svg", svg);
  const auto now = clock_();
  write_file_atomic(dir(id) / "project.json",
                    Json{{"project_id", id}, {"created_ms", now}, {"updated_ms", now}}.dump(2) + "\n");
  return id;
}

void ProjectStore::remove(const std::string& id) {
  require(id);
  std::lock_guard lock(table_mutex_);
  fs::remove_all(dir(id));
}

std::string ProjectStore::svg(const std::string& id) const {
  require(id);
  return read_file(dir(id) / "source.svg").value_or("");
}

Json ProjectStore::meta(const std::string& id) const {
  require(id);
  return Json::parse(read_file(dir(id) / "project.json").value_or("{}"));
}

void ProjectStore::touch(const std::string& id) {
  Json m = meta(id);
  m["updated_ms"] = clock_();
  write_file_atomic(dir(id) / "project.json", m.dump(2) + "\n");
}

Versioned ProjectStore::get(const std::string& id, const std::string& artifact) const {
  require(id);
  auto text = read_file(dir(id) / (artifact + ".json"));
  if (!text) return {};
  Json j = Json::parse(*text);
  return {j.at("version").get<std::int64_t>(), j.at("value")};
}

std::int64_t ProjectStore::put(const std::string& id, const std::string& artifact, std::int64_t expected, Json value,
                               bool keep_history) {
  require(id);
  const fs::path path = dir(id) / (artifact + ".json");
  Json stored = Json::object();
  if (auto text = read_file(path)) stored = Json::parse(*text);
  const std::int64_t current = stored.contains("version") ? stored["version"].get<std::int64_t>() : 0;
  if (expected != current)
    throw Error(ErrorCode::VersionConflict,
                artifact + " is at version " + std::to_string(current) + ", not " + std::to_string(expected),
                "/version", {std::to_string(current)});
  Json next{{"version", current + 1}, {"value", value}};
  if (keep_history) {
    Json hist = stored.contains("history") ? stored["history"] : Json::array();
    hist.push_back(std::move(value));
    next["history"] = std::move(hist);
  }
  write_file_atomic(path, next.dump(2) + "\n");
  touch(id);
  return current + 1;
}

std::vector<Json> ProjectStore::history(const std::string& id, const std::string& artifact) const {
  require(id);
  auto text = read_file(dir(id) / (artifact + ".json"));
  if (!text) return {};
  Json j = Json::parse(*text);
  if (!j.contains("history")) return {j.at("value")};
  return j["history"].get<std::vector<Json>>();
}

void ProjectStore::put_blob(const std::string& id, const std::string& name, const std::string& content) {
  require(id);
  write_file_atomic(dir(id) / name, content);
}

std::optional<std::string> ProjectStore::blob(const std::string& id, const std::string& name) const {
  require(id);
  return read_file(dir(id) / name);
}

std::mutex& ProjectStore::project_mutex(const std::string& id) {
  std::lock_guard lock(table_mutex_);
  auto& m = mutexes_[id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

}  // namespace narvis
