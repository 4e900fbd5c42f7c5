#include <istream>
#include <nlohmann/json.hpp>
#include <string>

#include "tifu/engine.hpp"
#include "tifu/error.hpp"

namespace tifu {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorCode::MalformedInput, std::string("missing field \"") + name + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::MalformedInput, std::string("field \"") + name + "\" has the wrong type");
  }
}

}  // namespace

Event parse_event_line(const std::string& line, std::uint64_t ingest_index) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::MalformedInput, "event is not an object");

  const auto type = field<std::string>(j, "type");
  const auto user = field<UserId>(j, "user");
  const auto seq = field<Seq>(j, "seq");
  Event event;
  event.ingest_index = ingest_index;
  if (type == "add") {
    const std::int64_t ts = j.contains("ts") ? field<std::int64_t>(j, "ts") : 0;
    event.payload = Basket::make(user, seq, field<std::vector<ItemId>>(j, "items"), ts);
  } else if (type == "delete_basket") {
    event.payload = online::DeletionRequest{user, online::DeleteBasket{seq}};
  } else if (type == "delete_item") {
    event.payload = online::DeletionRequest{user, online::DeleteItem{seq, field<ItemId>(j, "item")}};
  } else {
    throw Error(ErrorCode::MalformedInput, "unknown event type \"" + type + "\"");
  }
  return event;
}

std::string format_event_line(const Event& event) {
  json j;
  if (!event.is_deletion()) {
    const auto& b = std::get<Basket>(event.payload);
    j = {{"type", "add"}, {"user", b.user}, {"seq", b.seq}, {"items", b.items}, {"ts", b.timestamp}};
  } else {
    const auto& r = std::get<online::DeletionRequest>(event.payload);
    if (const auto* d = std::get_if<online::DeleteBasket>(&r.target)) {
      j = {{"type", "delete_basket"}, {"user", r.user}, {"seq", d->seq}};
    } else {
      const auto& di = std::get<online::DeleteItem>(r.target);
      j = {{"type", "delete_item"}, {"user", r.user}, {"seq", di.seq}, {"item", di.item}};
    }
  }
  return j.dump();
}

std::string format_report_line(const UpdateReport& report) {
  json j = {{"user", report.user},
            {"kind", to_string(report.kind)},
            {"status", to_string(report.status)},
            {"touch_count", report.touch_count},
            {"nanos", report.nanos},
            {"ingest_index", report.ingest_index}};
  if (!report.error.empty()) j["error"] = report.error;
  return j.dump();
}

std::optional<Event> JsonLinesEventSource::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      return parse_event_line(line, next_index_++);
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line_) + ": " + e.what());
    }
  }
  if (in_.bad()) throw Error(ErrorCode::Io, "event stream read failure after line " + std::to_string(line_));
  return std::nullopt;
}

}  // namespace tifu
