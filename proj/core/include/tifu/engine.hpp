#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tifu/online.hpp"
#include "tifu/store.hpp"

namespace tifu {

struct Event {
  std::variant<Basket, online::DeletionRequest> payload;
  std::uint64_t ingest_index = 0;

  UserId user() const;
  bool is_deletion() const noexcept { return payload.index() == 1; }
};

enum class EventKind { Add, DeleteBasket, DeleteItem };
enum class ReportStatus { Applied, Removed, Rejected };

std::string_view to_string(EventKind kind) noexcept;
std::string_view to_string(ReportStatus status) noexcept;

struct UpdateReport {
  UserId user = 0;
  EventKind kind = EventKind::Add;
  ReportStatus status = ReportStatus::Applied;
  std::uint64_t ingest_index = 0;
  std::size_t touch_count = 0;
  std::int64_t nanos = 0;  // around the state transition only
  std::string error;        // set when rejected
};

class EventSource {
 public:
  virtual ~EventSource() = default;
  /// Next event, or nullopt at the end. May throw on read failure.
  virtual std::optional<Event> next() = 0;
};

class VectorEventSource final : public EventSource {
 public:
  explicit VectorEventSource(std::vector<Event> events) : events_(std::move(events)) {}
  std::optional<Event> next() override;

 private:
  std::vector<Event> events_;
  std::size_t pos_ = 0;
};

/// Reads one JSON object per line:
///   {"type":"add","user":1,"seq":3,"items":[4,5],"ts":1700000000000}
///   {"type":"delete_basket","user":1,"seq":3}
///   {"type":"delete_item","user":1,"seq":3,"item":4}
/// Blank lines are skipped; ingest indices count events from 0.
class JsonLinesEventSource final : public EventSource {
 public:
  explicit JsonLinesEventSource(std::istream& in) : in_(in) {}
  std::optional<Event> next() override;

 private:
  std::istream& in_;
  std::uint64_t line_ = 0;
  std::uint64_t next_index_ = 0;
};

Event parse_event_line(const std::string& line, std::uint64_t ingest_index);
std::string format_event_line(const Event& event);
std::string format_report_line(const UpdateReport& report);

using ReportSink = std::function<void(const UpdateReport&)>;

struct RunSummary {
  std::size_t events = 0;
  std::size_t rejected = 0;
  std::optional<std::string> source_error;  // set if the source failed mid-stream
};

/// Applies events to a store: additions go through the incremental rules,
/// deletion requests through the decremental ones. Bad events are reported
/// as rejected and leave the store untouched.
class Engine {
 public:
  explicit Engine(StateStore& store) : store_(store) {}

  UpdateReport process_event(const Event& event);

  /// Routes events to `workers` threads by user hash, so each user's events
  /// are applied in ingest order while different users proceed in parallel.
  /// The sink is called from worker threads, one call at a time. If the
  /// source throws, already dispatched events drain before returning.
  RunSummary run(EventSource& source, unsigned workers, const ReportSink& sink);

  std::vector<UpdateReport> run(EventSource& source, unsigned workers);

 private:
  StateStore& store_;
};

}  // namespace tifu
