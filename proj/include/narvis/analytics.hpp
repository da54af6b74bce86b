#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "narvis/deck.hpp"
#include "narvis/json_util.hpp"

namespace narvis {

enum class EventType { SlideEnter, SlideExit, Answer, Comment };

std::string_view to_string(EventType t);

struct ViewerEvent {
  std::string deck_id;
  std::string student_token;
  EventType type = EventType::SlideEnter;
  std::string slide_id;  // required for enter/exit
  std::optional<std::string> question_id;  // answers only
  std::vector<int> selected;               // answers only
  std::string text;                        // comments only
  std::int64_t timestamp_ms = 0;
  bool operator==(const ViewerEvent&) const = default;
};

/// Strict parse; SchemaViolation with a JSON pointer.
ViewerEvent event_from_json(const Json& j, const std::string& pointer = "");
Json to_json(const ViewerEvent& e);
/// One event per nonempty line; errors point at "/<line index>".
std::vector<ViewerEvent> parse_event_log(std::string_view ndjson);

struct SeriesPoint {
  std::int64_t timestamp_ms = 0;
  double cumulative_s = 0;
  bool operator==(const SeriesPoint&) const = default;
};

struct SlideAggregate {
  std::string slide_id;
  std::vector<double> pass_means_s;  // index 0 = first pass
  std::vector<int> pass_students;    // students contributing to each mean
  bool operator==(const SlideAggregate&) const = default;
};

struct QuestionAggregate {
  int answers = 0;
  int correct = 0;
  double accuracy = 0;  // 0 when unanswered
  bool operator==(const QuestionAggregate&) const = default;
};

struct CommentEntry {
  std::string student_token;
  std::string slide_id;
  std::string text;
  std::int64_t timestamp_ms = 0;
  bool operator==(const CommentEntry&) const = default;
};

/// Counters for irregularities tolerated while replaying a log.
struct LogQuality {
  int unterminated_segments = 0;  // closed at the student's final event
  int idle_truncations = 0;       // cut at the start of an over-long gap
  int ignored_exits = 0;          // exit without a matching open segment
  int repeat_answers = 0;         // ignored in accuracy
  int unknown_questions = 0;
  int extra_comments = 0;
  int foreign_events = 0;         // deck_id differs from the deck
  bool operator==(const LogQuality&) const = default;
};

struct DeckStats {
  std::string deck_id;
  /// Deck order ("overview" first when enabled); slides seen only in the
  /// log are appended in first-seen order.
  std::vector<SlideAggregate> per_slide;
  std::map<std::string, std::vector<SeriesPoint>> per_student;
  std::map<std::string, QuestionAggregate> per_question;
  std::vector<CommentEntry> comments;
  LogQuality quality;
  bool operator==(const DeckStats&) const = default;
};

struct AggregateOptions {
  std::int64_t idle_gap_ms = 30 * 60 * 1000;
};

/// Per student, events are ordered by timestamp (log order breaks ties).
/// An enter opens a dwell segment and closes any open one; an exit closes
/// the open segment on the same slide. The k-th enter of a student on a
/// slide is pass k; pass means average over students having that pass.
DeckStats aggregate(const Deck& deck, const std::vector<ViewerEvent>& log, const AggregateOptions& opts = {});

Json to_json(const DeckStats& stats);
/// Plain-text rendering of the three aggregates and the comments.
std::string format_stats(const DeckStats& stats);

/// Append-only NDJSON log per deck under `dir`; appends are serialized and
/// each event is written with a single O_APPEND write followed by fsync.
class EventStore {
 public:
  using DeckExists = std::function<bool(const std::string&)>;

  EventStore(std::filesystem::path dir, DeckExists deck_exists);

  /// Returns the event's zero-based position in its deck's log. Throws
  /// UnknownDeck or SchemaViolation.
  std::size_t append(const ViewerEvent& event);
  std::vector<ViewerEvent> read(const std::string& deck_id) const;
  void remove(const std::string& deck_id);

 private:
  std::filesystem::path file_for(const std::string& deck_id) const;

  std::filesystem::path dir_;
  DeckExists deck_exists_;
  mutable std::mutex mutex_;
  std::map<std::string, std::size_t> counts_;
};

bool is_safe_identifier(std::string_view id);

}  // namespace narvis
