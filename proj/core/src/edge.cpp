#include "greenshield/edge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "greenshield/error.hpp"
#include "greenshield/random.hpp"
#include "json_io.hpp"

namespace greenshield {
namespace {

using detail::json;

AlertEvent make_event(AlertKind kind, const SensorReading& r, AlertCause cause) {
  AlertEvent e;
  e.kind = kind;
  e.node_id = r.node_id;
  e.ts_ms = r.ts_ms;
  e.cause = cause;
  e.reading = r.features();
  if (kind == AlertKind::Sms) e.message = format_sms(e);
  return e;
}

Signal parse_signal(const std::string& name, ErrorCode on_error) {
  if (name == "temp") return Signal::Temp;
  if (name == "rh") return Signal::Rh;
  if (name == "oxy") return Signal::Oxy;
  throw Error(on_error, "unknown signal '" + name + "'", "signal");
}

double round_tenth(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace

double RunningStats::stddev() const { return std::sqrt(variance()); }

std::string_view signal_name(Signal signal) {
  switch (signal) {
    case Signal::Temp: return "temp";
    case Signal::Rh: return "rh";
    case Signal::Oxy: return "oxy";
  }
  return "unknown";
}

double signal_value(const SensorReading& r, Signal signal) {
  switch (signal) {
    case Signal::Temp: return r.temp;
    case Signal::Rh: return r.rh;
    case Signal::Oxy: return r.oxy;
  }
  return 0.0;
}

IngestResult ingest(const ThresholdState& state, const SensorReading& reading) {
  if (state.last_ts && reading.ts_ms <= *state.last_ts) {
    throw Error(ErrorCode::StaleTimestamp, "reading for node " + reading.node_id + " at " +
                                               std::to_string(reading.ts_ms) + " is not newer than " +
                                               std::to_string(*state.last_ts));
  }
  validate_features(reading.features());

  IngestResult result{state, {}};
  result.state.last_ts = reading.ts_ms;
  if (reading.flame) {
    result.events.push_back(make_event(AlertKind::Buzzer, reading, FlameCause{}));
    result.events.push_back(make_event(AlertKind::Sms, reading, FlameCause{}));
    return result;
  }

  const auto& cfg = state.config;
  for (std::size_t s = 0; s < kSignals.size(); ++s) {
    const double value = signal_value(reading, kSignals[s]);
    auto& stats = result.state.stats[s];
    if (state.count >= cfg.warmup) {
      const double sigma = stats.stddev();
      const double band = std::max(cfg.k * sigma, cfg.epsilon);
      if (std::abs(value - stats.mean()) > band) {
        result.events.push_back(
            make_event(AlertKind::Sms, reading, AnomalyCause{kSignals[s], value, stats.mean(), sigma}));
      }
    }
    stats.add(value);
  }
  ++result.state.count;
  return result;
}

std::string iso8601_utc(std::int64_t ts_ms) {
  std::int64_t seconds = ts_ms / 1000;
  std::int64_t millis = ts_ms % 1000;
  if (millis < 0) {
    millis += 1000;
    seconds -= 1;
  }
  const auto t = static_cast<std::time_t>(seconds);
  std::tm parts{};
  gmtime_r(&t, &parts);
  char buffer[64];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%S", &parts);
  std::string out = buffer;
  if (millis != 0) {
    std::snprintf(buffer, sizeof(buffer), ".%03lld", static_cast<long long>(millis));
    out += buffer;
  }
  return out + "Z";
}

std::string format_sms(const AlertEvent& event) {
  if (event.kind != AlertKind::Sms) throw Error(ErrorCode::WrongKind, "only Sms events have message text");
  std::string cause = "FLAME";
  if (const auto* anomaly = std::get_if<AnomalyCause>(&event.cause)) {
    cause = "ANOMALY:" + std::string(signal_name(anomaly->signal));
  }
  char values[128];
  std::snprintf(values, sizeof(values), "temp=%.1fC rh=%.1f%% oxy=%.1f%%", event.reading.temp, event.reading.rh,
                event.reading.oxy);
  return "GREENSHIELD ALERT node=" + event.node_id + " time=" + iso8601_utc(event.ts_ms) + " cause=" + cause + " " +
         values;
}

std::string alert_to_json(const AlertEvent& event) {
  json cause;
  if (const auto* anomaly = std::get_if<AnomalyCause>(&event.cause)) {
    cause = {{"type", "anomaly"},
             {"signal", std::string(signal_name(anomaly->signal))},
             {"value", anomaly->value},
             {"mean", anomaly->mean},
             {"sigma", anomaly->sigma}};
  } else {
    cause = {{"type", "flame"}};
  }
  json doc = {{"kind", event.kind == AlertKind::Buzzer ? "buzzer" : "sms"},
              {"node_id", event.node_id},
              {"ts_ms", event.ts_ms},
              {"time", iso8601_utc(event.ts_ms)},
              {"cause", cause},
              {"reading", {{"temp", event.reading.temp}, {"rh", event.reading.rh}, {"oxy", event.reading.oxy}}}};
  if (event.kind == AlertKind::Sms) doc["message"] = event.message;
  return detail::dump_canonical(doc);
}

AlertEvent alert_from_json(const std::string& text) {
  const json doc = detail::parse_document(text);
  try {
    AlertEvent e;
    const auto kind = detail::require(doc, "kind").get<std::string>();
    if (kind != "buzzer" && kind != "sms") throw Error(ErrorCode::MalformedDocument, "unknown alert kind", "kind");
    e.kind = kind == "sms" ? AlertKind::Sms : AlertKind::Buzzer;
    e.node_id = detail::require(doc, "node_id").get<std::string>();
    e.ts_ms = detail::require(doc, "ts_ms").get<std::int64_t>();
    const json& reading = detail::require(doc, "reading");
    e.reading = {detail::require_number(reading, "temp"), detail::require_number(reading, "rh"),
                 detail::require_number(reading, "oxy")};
    const json& cause = detail::require(doc, "cause");
    if (detail::require(cause, "type").get<std::string>() == "anomaly") {
      AnomalyCause a;
      a.signal = parse_signal(detail::require(cause, "signal").get<std::string>(), ErrorCode::MalformedDocument);
      a.value = detail::require_number(cause, "value");
      a.mean = detail::require_number(cause, "mean");
      a.sigma = detail::require_number(cause, "sigma");
      e.cause = a;
    }
    if (e.kind == AlertKind::Sms) e.message = detail::require(doc, "message").get<std::string>();
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::MalformedDocument, std::string("malformed alert: ") + ex.what());
  }
}

std::string reading_to_json(const SensorReading& r) {
  return detail::dump_canonical(
      {{"node_id", r.node_id}, {"ts_ms", r.ts_ms}, {"temp", r.temp}, {"rh", r.rh}, {"oxy", r.oxy}, {"flame", r.flame}});
}

SensorReading reading_from_json(const std::string& text) {
  const json doc = detail::parse_document(text);
  if (!doc.is_object()) throw Error(ErrorCode::MalformedDocument, "telemetry body must be a JSON object");
  SensorReading r;
  const json& node = detail::require(doc, "node_id");
  if (!node.is_string() || node.get<std::string>().empty()) {
    throw Error(ErrorCode::MalformedDocument, "node_id must be a non-empty string", "node_id");
  }
  r.node_id = node.get<std::string>();
  const json& ts = detail::require(doc, "ts_ms");
  if (!ts.is_number_integer()) throw Error(ErrorCode::MalformedDocument, "ts_ms must be an integer", "ts_ms");
  r.ts_ms = ts.get<std::int64_t>();
  r.temp = detail::require_number(doc, "temp");
  r.rh = detail::require_number(doc, "rh");
  r.oxy = detail::require_number(doc, "oxy");
  const json& flame = detail::require(doc, "flame");
  if (!flame.is_boolean()) throw Error(ErrorCode::MalformedDocument, "flame must be a boolean", "flame");
  r.flame = flame.get<bool>();
  validate_features(r.features());
  return r;
}

void LogSink::deliver(const AlertEvent& event) {
  const std::string line = alert_to_json(event);
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
}

void MemorySink::deliver(const AlertEvent& event) {
  std::lock_guard lock(mutex_);
  events_.push_back(event);
}

std::vector<AlertEvent> MemorySink::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

void EdgePipeline::register_node(const std::string& node_id) {
  std::lock_guard lock(registry_mutex_);
  auto& slot = nodes_[node_id];
  if (!slot) {
    slot = std::make_unique<Slot>();
    slot->state.config = config_;
  }
}

bool EdgePipeline::has_node(const std::string& node_id) const {
  std::lock_guard lock(registry_mutex_);
  return nodes_.count(node_id) > 0;
}

EdgePipeline::Slot* EdgePipeline::slot_for(const std::string& node_id) {
  std::lock_guard lock(registry_mutex_);
  auto it = nodes_.find(node_id);
  if (it != nodes_.end()) return it->second.get();
  if (!auto_register_) throw Error(ErrorCode::UnknownNode, "unknown node '" + node_id + "'", "node_id");
  auto slot = std::make_unique<Slot>();
  slot->state.config = config_;
  return nodes_.emplace(node_id, std::move(slot)).first->second.get();
}

std::vector<AlertEvent> EdgePipeline::ingest(const SensorReading& reading) {
  Slot* slot = slot_for(reading.node_id);
  std::lock_guard lock(slot->mutex);
  auto result = greenshield::ingest(slot->state, reading);
  slot->state = result.state;
  return std::move(result.events);
}

ScenarioScript parse_scenario(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw Error(ErrorCode::MalformedScript, "scenario must be a JSON object");
    ScenarioScript script;
    script.seed = doc.value("seed", std::uint64_t{0});
    script.epoch_ms = doc.value("epoch_ms", std::int64_t{0});
    if (doc.contains("threshold")) {
      const json& t = doc.at("threshold");
      script.threshold.warmup = t.value("warmup", script.threshold.warmup);
      script.threshold.k = t.value("k", script.threshold.k);
      script.threshold.epsilon = t.value("epsilon", script.threshold.epsilon);
      if (!(script.threshold.k > 0.0) || script.threshold.epsilon < 0.0) {
        throw Error(ErrorCode::MalformedScript, "threshold k must be positive and epsilon non-negative");
      }
    }
    for (const auto& n : doc.at("nodes")) {
      NodeScript node;
      node.id = n.at("id").get<std::string>();
      if (node.id.empty()) throw Error(ErrorCode::MalformedScript, "node id must not be empty");
      node.offset_ms = n.value("offset_ms", std::int64_t{0});
      node.interval_ms = n.value("interval_ms", std::int64_t{1000});
      node.count = n.at("count").get<std::uint64_t>();
      if (node.interval_ms <= 0) throw Error(ErrorCode::MalformedScript, "interval_ms must be positive");
      for (std::size_t s = 0; s < kSignals.size(); ++s) {
        const json& b = n.at("baseline").at(std::string(signal_name(kSignals[s])));
        node.baseline[s] = {b.at("mean").get<double>(), b.value("sd", 0.0)};
        if (node.baseline[s].sd < 0.0) throw Error(ErrorCode::MalformedScript, "baseline sd must be non-negative");
      }
      const bool duplicate = std::any_of(script.nodes.begin(), script.nodes.end(),
                                         [&](const NodeScript& other) { return other.id == node.id; });
      if (duplicate) throw Error(ErrorCode::MalformedScript, "duplicate node id '" + node.id + "'");
      script.nodes.push_back(node);
    }
    if (doc.contains("events")) {
      for (const auto& e : doc.at("events")) {
        InjectedEvent event;
        const auto type = e.at("type").get<std::string>();
        if (type == "flame") {
          event.type = InjectedEvent::Type::Flame;
        } else if (type == "step") {
          event.type = InjectedEvent::Type::Step;
          event.signal = parse_signal(e.at("signal").get<std::string>(), ErrorCode::MalformedScript);
          event.delta = e.at("delta").get<double>();
        } else {
          throw Error(ErrorCode::MalformedScript, "unknown event type '" + type + "'");
        }
        event.node = e.at("node").get<std::string>();
        event.at_ms = e.at("at_ms").get<std::int64_t>();
        const bool known = std::any_of(script.nodes.begin(), script.nodes.end(),
                                       [&](const NodeScript& n) { return n.id == event.node; });
        if (!known) throw Error(ErrorCode::MalformedScript, "event refers to unknown node '" + event.node + "'");
        script.events.push_back(event);
      }
    }
    return script;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedScript, std::string("malformed scenario: ") + e.what());
  }
}

ScenarioScript load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

std::vector<SensorReading> scenario_readings(const ScenarioScript& script) {
  std::vector<SensorReading> readings;
  for (std::size_t n = 0; n < script.nodes.size(); ++n) {
    const auto& node = script.nodes[n];
    Rng rng(script.seed + 0x9E3779B97F4A7C15ULL * (n + 1));
    std::vector<bool> flame_pending;
    for (const auto& e : script.events) flame_pending.push_back(e.node == node.id && e.type == InjectedEvent::Type::Flame);

    for (std::uint64_t i = 0; i < node.count; ++i) {
      const std::int64_t offset = node.offset_ms + static_cast<std::int64_t>(i) * node.interval_ms;
      SensorReading r;
      r.node_id = node.id;
      r.ts_ms = script.epoch_ms + offset;
      std::array<double, 3> values{};
      for (std::size_t s = 0; s < values.size(); ++s) {
        values[s] = rng.normal(node.baseline[s].mean, node.baseline[s].sd);
      }
      for (std::size_t k = 0; k < script.events.size(); ++k) {
        const auto& e = script.events[k];
        if (e.node != node.id || offset < e.at_ms) continue;
        if (e.type == InjectedEvent::Type::Step) {
          values[static_cast<std::size_t>(e.signal)] += e.delta;
        } else if (flame_pending[k]) {
          r.flame = true;
          flame_pending[k] = false;
        }
      }
      r.temp = std::clamp(round_tenth(values[0]), kTempBounds.lo, kTempBounds.hi);
      r.rh = std::clamp(round_tenth(values[1]), kPercentBounds.lo, kPercentBounds.hi);
      r.oxy = std::clamp(round_tenth(values[2]), kPercentBounds.lo, kPercentBounds.hi);
      readings.push_back(r);
    }
  }
  std::stable_sort(readings.begin(), readings.end(), [](const SensorReading& a, const SensorReading& b) {
    return a.ts_ms != b.ts_ms ? a.ts_ms < b.ts_ms : a.node_id < b.node_id;
  });
  return readings;
}

std::string RunLog::to_jsonl() const {
  std::string out;
  for (const auto& e : events) out += alert_to_json(e) + "\n";
  return out;
}

RunLog run_scenario(const ScenarioScript& script, std::span<AlertSink* const> sinks) {
  EdgePipeline pipeline(script.threshold);
  for (const auto& node : script.nodes) pipeline.register_node(node.id);
  RunLog log;
  for (const auto& reading : scenario_readings(script)) {
    for (auto& event : pipeline.ingest(reading)) {
      for (auto* sink : sinks) sink->deliver(event);
      log.events.push_back(std::move(event));
    }
  }
  return log;
}

}  // namespace greenshield
