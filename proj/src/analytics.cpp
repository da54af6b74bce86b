#include "narvis/analytics.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "narvis/error.hpp"

namespace narvis {

namespace {

struct Open {
  std::string slide_id;
  std::int64_t start = 0;
  std::int64_t last_activity = 0;
  std::size_t pass = 0;
};

struct StudentReplay {
  std::optional<Open> open;
  std::map<std::string, std::size_t> enters;
  double cumulative_s = 0;
};

std::size_t slide_slot(DeckStats& stats, std::map<std::string, std::size_t>& index, const std::string& slide_id) {
  auto it = index.find(slide_id);
  if (it != index.end()) return it->second;
  stats.per_slide.push_back({slide_id, {}, {}});
  return index[slide_id] = stats.per_slide.size() - 1;
}

}  // namespace

std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::SlideEnter: return "slide_enter";
    case EventType::SlideExit: return "slide_exit";
    case EventType::Answer: return "answer";
    case EventType::Comment: return "comment";
  }
  return "slide_enter";
}

bool is_safe_identifier(std::string_view id) {
  return !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  }) && id.front() != '.';
}

ViewerEvent event_from_json(const Json& j, const std::string& pointer) {
  json_util::ObjectReader r(j, pointer);
  ViewerEvent e;
  e.deck_id = r.string("deck_id");
  e.student_token = r.string("student_token");
  if (e.student_token.empty()) json_util::schema_error(r.at("student_token"), "empty student token");
  std::string type = r.string("event_type");
  if (type == "slide_enter")
    e.type = EventType::SlideEnter;
  else if (type == "slide_exit")
    e.type = EventType::SlideExit;
  else if (type == "answer")
    e.type = EventType::Answer;
  else if (type == "comment")
    e.type = EventType::Comment;
  else
    json_util::schema_error(r.at("event_type"), "unknown event_type '" + type + "'");
  if (r.optional("slide_id")) e.slide_id = r.string("slide_id");
  if ((e.type == EventType::SlideEnter || e.type == EventType::SlideExit) && e.slide_id.empty())
    json_util::schema_error(r.at("slide_id"), type + " requires slide_id");
  if (r.optional("question_id")) e.question_id = r.string("question_id");
  if (const Json* sel = r.optional("selected")) {
    const Json& arr = json_util::expect_array(*sel, r.at("selected"));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto v = json_util::expect_integer(arr[i], json_util::join_pointer(r.at("selected"), i));
      if (v < 0 || v > 1'000'000) json_util::schema_error(json_util::join_pointer(r.at("selected"), i), "bad option index");
      e.selected.push_back(static_cast<int>(v));
    }
  }
  if (r.optional("text")) e.text = r.string("text");
  e.timestamp_ms = r.integer("timestamp_ms");
  if (e.timestamp_ms < 0) json_util::schema_error(r.at("timestamp_ms"), "negative timestamp");
  r.finish();
  if (e.type == EventType::Answer) {
    if (!e.question_id || e.question_id->empty()) json_util::schema_error(r.at("question_id"), "answer requires question_id");
    if (e.selected.empty()) json_util::schema_error(r.at("selected"), "answer requires a nonempty selection");
  } else {
    if (e.question_id) json_util::schema_error(r.at("question_id"), "question_id is only valid on answers");
    if (!e.selected.empty()) json_util::schema_error(r.at("selected"), "selected is only valid on answers");
  }
  if (e.type == EventType::Comment && e.text.empty()) json_util::schema_error(r.at("text"), "comment requires text");
  if (e.type != EventType::Comment && !e.text.empty()) json_util::schema_error(r.at("text"), "text is only valid on comments");
  return e;
}

Json to_json(const ViewerEvent& e) {
  Json j{{"deck_id", e.deck_id},
         {"student_token", e.student_token},
         {"event_type", to_string(e.type)},
         {"timestamp_ms", e.timestamp_ms}};
  if (!e.slide_id.empty()) j["slide_id"] = e.slide_id;
  if (e.question_id) j["question_id"] = *e.question_id;
  if (e.type == EventType::Answer) j["selected"] = e.selected;
  if (e.type == EventType::Comment) j["text"] = e.text;
  return j;
}

std::vector<ViewerEvent> parse_event_log(std::string_view ndjson) {
  std::vector<ViewerEvent> out;
  std::size_t line_no = 0, start = 0;
  while (start <= ndjson.size()) {
    std::size_t end = ndjson.find('\n', start);
    if (end == std::string_view::npos) end = ndjson.size();
    std::string_view line = ndjson.substr(start, end - start);
    std::string pointer = "/" + std::to_string(line_no);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, "line " + std::to_string(line_no + 1) + " is not JSON", pointer);
      }
      out.push_back(event_from_json(j, pointer));
    }
    ++line_no;
    start = end + 1;
  }
  return out;
}

DeckStats aggregate(const Deck& deck, const std::vector<ViewerEvent>& log, const AggregateOptions& opts) {
  DeckStats stats;
  stats.deck_id = deck.deck_id;
  std::map<std::string, std::size_t> slide_index;
  if (deck.overview_slide) slide_slot(stats, slide_index, "overview");
  std::map<std::string, const QuestionSpec*> questions;
  for (const auto& s : deck.slides) {
    slide_slot(stats, slide_index, s.slide_id);
    for (const auto& st : s.steps)
      if (const auto* q = st.question()) {
        questions[q->question_id] = q;
        stats.per_question[q->question_id] = {};
      }
  }

  // Stable order by (student, timestamp); log position breaks ties.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].deck_id != deck.deck_id) {
      ++stats.quality.foreign_events;
      continue;
    }
    order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (log[a].student_token != log[b].student_token) return log[a].student_token < log[b].student_token;
    return log[a].timestamp_ms < log[b].timestamp_ms;
  });

  // durations[slide][pass] -> per-student durations
  std::map<std::size_t, std::vector<std::vector<double>>> durations;
  std::map<std::string, StudentReplay> students;
  std::set<std::pair<std::string, std::string>> answered;
  std::set<std::string> commented;

  auto close = [&](const std::string& student, StudentReplay& s, std::int64_t end) {
    const Open& o = *s.open;
    double d = static_cast<double>(end - o.start) / 1000.0;
    std::size_t slot = slide_slot(stats, slide_index, o.slide_id);
    auto& passes = durations[slot];
    if (passes.size() <= o.pass) passes.resize(o.pass + 1);
    passes[o.pass].push_back(d);
    s.cumulative_s += d;
    stats.per_student[student].push_back({end, s.cumulative_s});
    s.open.reset();
  };

  for (std::size_t k = 0; k < order.size(); ++k) {
    const ViewerEvent& e = log[order[k]];
    StudentReplay& s = students[e.student_token];
    stats.per_student.try_emplace(e.student_token);
    if (s.open) {
      if (e.timestamp_ms - s.open->last_activity > opts.idle_gap_ms) {
        ++stats.quality.idle_truncations;
        close(e.student_token, s, s.open->last_activity);
      } else {
        s.open->last_activity = e.timestamp_ms;
      }
    }
    switch (e.type) {
      case EventType::SlideEnter: {
        if (s.open) close(e.student_token, s, e.timestamp_ms);
        std::size_t pass = s.enters[e.slide_id]++;
        s.open = Open{e.slide_id, e.timestamp_ms, e.timestamp_ms, pass};
        break;
      }
      case EventType::SlideExit:
        if (s.open && s.open->slide_id == e.slide_id)
          close(e.student_token, s, e.timestamp_ms);
        else
          ++stats.quality.ignored_exits;
        break;
      case EventType::Answer: {
        auto q = questions.find(*e.question_id);
        if (q == questions.end()) {
          ++stats.quality.unknown_questions;
          break;
        }
        if (!answered.insert({e.student_token, *e.question_id}).second) {
          ++stats.quality.repeat_answers;
          break;
        }
        auto& agg = stats.per_question[*e.question_id];
        ++agg.answers;
        if (q->second->is_correct(e.selected)) ++agg.correct;
        break;
      }
      case EventType::Comment:
        if (commented.insert(e.student_token).second)
          stats.comments.push_back({e.student_token, e.slide_id, e.text, e.timestamp_ms});
        else
          ++stats.quality.extra_comments;
        break;
    }
    const bool last_of_student = k + 1 == order.size() || log[order[k + 1]].student_token != e.student_token;
    if (last_of_student && s.open) {
      ++stats.quality.unterminated_segments;
      close(e.student_token, s, s.open->last_activity);
    }
  }

  for (auto& [slot, passes] : durations) {
    auto& agg = stats.per_slide[slot];
    for (const auto& ds : passes) {
      double sum = 0;
      for (double d : ds) sum += d;
      agg.pass_means_s.push_back(ds.empty() ? 0.0 : sum / static_cast<double>(ds.size()));
      agg.pass_students.push_back(static_cast<int>(ds.size()));
    }
  }
  for (auto& [qid, agg] : stats.per_question)
    agg.accuracy = agg.answers ? static_cast<double>(agg.correct) / agg.answers : 0.0;
  std::stable_sort(stats.comments.begin(), stats.comments.end(),
                   [](const CommentEntry& a, const CommentEntry& b) { return a.timestamp_ms < b.timestamp_ms; });
  return stats;
}

Json to_json(const DeckStats& stats) {
  Json per_slide = Json::array();
  for (const auto& s : stats.per_slide)
    per_slide.push_back({{"slide_id", s.slide_id}, {"pass_means_s", s.pass_means_s}, {"pass_students", s.pass_students}});
  Json per_student = Json::object();
  for (const auto& [token, series] : stats.per_student) {
    Json pts = Json::array();
    for (const auto& p : series) pts.push_back(Json::array({p.timestamp_ms, p.cumulative_s}));
    per_student[token] = std::move(pts);
  }
  Json per_question = Json::object();
  for (const auto& [qid, q] : stats.per_question)
    per_question[qid] = {{"answers", q.answers}, {"correct", q.correct}, {"accuracy", q.accuracy}};
  Json comments = Json::array();
  for (const auto& c : stats.comments)
    comments.push_back(
        {{"student_token", c.student_token}, {"slide_id", c.slide_id}, {"text", c.text}, {"timestamp_ms", c.timestamp_ms}});
  const auto& q = stats.quality;
  return Json{{"deck_id", stats.deck_id},
              {"per_slide", std::move(per_slide)},
              {"per_student", std::move(per_student)},
              {"per_question", std::move(per_question)},
              {"comments", std::move(comments)},
              {"quality",
               {{"unterminated_segments", q.unterminated_segments},
                {"idle_truncations", q.idle_truncations},
                {"ignored_exits", q.ignored_exits},
                {"repeat_answers", q.repeat_answers},
                {"unknown_questions", q.unknown_questions},
                {"extra_comments", q.extra_comments},
                {"foreign_events", q.foreign_events}}}};
}

std::string format_stats(const DeckStats& stats) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << "Average watching time per slide (s), by pass\n";
  for (const auto& s : stats.per_slide) {
    out << "  " << s.slide_id << ":";
    if (s.pass_means_s.empty()) out << " -";
    for (std::size_t k = 0; k < s.pass_means_s.size(); ++k)
      out << " [" << (k + 1) << "] " << s.pass_means_s[k] << " (n=" << s.pass_students[k] << ")";
    out << "\n";
  }
  out << "Cumulative watching time per student (s)\n";
  for (const auto& [token, series] : stats.per_student)
    out << "  " << token << ": " << (series.empty() ? 0.0 : series.back().cumulative_s) << " over " << series.size()
        << " segment(s)\n";
  out << "Question accuracy\n";
  for (const auto& [qid, q] : stats.per_question)
    out << "  " << qid << ": " << q.correct << "/" << q.answers << " = " << std::setprecision(3) << q.accuracy
        << std::setprecision(1) << "\n";
  out << "Comments\n";
  for (const auto& c : stats.comments) out << "  " << c.student_token << ": " << c.text << "\n";
  return out.str();
}

EventStore::EventStore(std::filesystem::path dir, DeckExists deck_exists)
    : dir_(std::move(dir)), deck_exists_(std::move(deck_exists)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path EventStore::file_for(const std::string& deck_id) const {
  if (!is_safe_identifier(deck_id)) json_util::schema_error("/deck_id", "deck_id contains unsupported characters");
  return dir_ / (deck_id + ".ndjson");
}

std::size_t EventStore::append(const ViewerEvent& event) {
  auto path = file_for(event.deck_id);
  if (!deck_exists_ || !deck_exists_(event.deck_id))
    throw Error(ErrorCode::UnknownDeck, "unknown deck '" + event.deck_id + "'", "/deck_id");
  std::string line = to_json(event).dump() + "\n";
  std::lock_guard lock(mutex_);
  auto count = counts_.find(event.deck_id);
  if (count == counts_.end()) count = counts_.emplace(event.deck_id, read(event.deck_id).size()).first;
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::Io, "cannot open " + path.string() + ": " + std::strerror(errno));
  ssize_t written = ::write(fd, line.data(), line.size());
  int sync = ::fsync(fd);
  ::close(fd);
  if (written != static_cast<ssize_t>(line.size()) || sync != 0)
    throw Error(ErrorCode::Io, "short write to " + path.string());
  return count->second++;
}

std::vector<ViewerEvent> EventStore::read(const std::string& deck_id) const {
  std::ifstream in(file_for(deck_id), std::ios::binary);
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_event_log(buf.str());
}

void EventStore::remove(const std::string& deck_id) {
  std::lock_guard lock(mutex_);
  std::filesystem::remove(file_for(deck_id));
  counts_.erase(deck_id);
}

}  // namespace narvis
