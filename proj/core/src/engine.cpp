#include "tifu/engine.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "tifu/error.hpp"

namespace tifu {

UserId Event::user() const {
  return std::visit([](const auto& p) -> UserId { return p.user; }, payload);
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Add: return "add";
    case EventKind::DeleteBasket: return "delete_basket";
    case EventKind::DeleteItem: return "delete_item";
  }
  return "unknown";
}

std::string_view to_string(ReportStatus status) noexcept {
  switch (status) {
    case ReportStatus::Applied: return "ok";
    case ReportStatus::Removed: return "removed";
    case ReportStatus::Rejected: return "rejected";
  }
  return "unknown";
}

std::optional<Event> VectorEventSource::next() {
  if (pos_ >= events_.size()) return std::nullopt;
  return events_[pos_++];
}

namespace {

EventKind kind_of(const Event& event) {
  if (!event.is_deletion()) return EventKind::Add;
  const auto& request = std::get<online::DeletionRequest>(event.payload);
  return std::holds_alternative<online::DeleteBasket>(request.target) ? EventKind::DeleteBasket
                                                                       : EventKind::DeleteItem;
}

}  // namespace

UpdateReport Engine::process_event(const Event& event) {
  UpdateReport report;
  report.user = event.user();
  report.kind = kind_of(event);
  report.ingest_index = event.ingest_index;

  const ItemVocabulary& vocab = store_.vocab();
  const HyperParams& params = store_.params();
  try {
    store_.with_user(report.user, [&](std::optional<UserState>& state, History& history) {
      using Clock = std::chrono::steady_clock;
      const auto start = Clock::now();
      const online::Outcome outcome =
          event.is_deletion()
              ? online::apply(state, history, std::get<online::DeletionRequest>(event.payload), vocab, params)
              : online::add_basket(state, std::get<Basket>(event.payload), vocab, params);
      report.nanos = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
      online::apply_delta(history, outcome.delta);
      report.touch_count = outcome.touched;
      report.status = outcome.removed() ? ReportStatus::Removed : ReportStatus::Applied;
    });
  } catch (const Error& e) {
    report.status = ReportStatus::Rejected;
    report.error = e.what();
  }
  return report;
}

namespace {

class WorkQueue {
 public:
  void push(Event event) {
    {
      std::lock_guard lock(mutex_);
      events_.push_back(std::move(event));
    }
    cv_.notify_one();
  }
  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }
  std::optional<Event> pop() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return closed_ || !events_.empty(); });
    if (events_.empty()) return std::nullopt;
    Event e = std::move(events_.front());
    events_.pop_front();
    return e;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Event> events_;
  bool closed_ = false;
};

}  // namespace

RunSummary Engine::run(EventSource& source, unsigned workers, const ReportSink& sink) {
  if (workers == 0) throw Error(ErrorCode::InvalidArgument, "at least one worker is required");
  RunSummary summary;
  std::mutex sink_mutex;

  std::vector<WorkQueue> queues(workers);
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      while (auto event = queues[w].pop()) {
        UpdateReport report = process_event(*event);
        std::lock_guard lock(sink_mutex);
        if (report.status == ReportStatus::Rejected) ++summary.rejected;
        if (sink) sink(report);
      }
    });
  }

  try {
    while (auto event = source.next()) {
      ++summary.events;
      queues[user_hash(event->user()) % workers].push(std::move(*event));
    }
  } catch (const std::exception& e) {
    summary.source_error = e.what();
  }
  for (auto& q : queues) q.close();
  threads.clear();
  return summary;
}

std::vector<UpdateReport> Engine::run(EventSource& source, unsigned workers) {
  std::vector<UpdateReport> reports;
  const RunSummary summary = run(source, workers, [&reports](const UpdateReport& r) { reports.push_back(r); });
  if (summary.source_error) throw Error(ErrorCode::MalformedInput, *summary.source_error);
  return reports;
}

}  // namespace tifu
