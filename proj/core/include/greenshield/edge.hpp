#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "greenshield/dataset.hpp"

namespace greenshield {

struct SensorReading {
  std::string node_id;
  std::int64_t ts_ms = 0;
  double temp = 0.0;
  double rh = 0.0;
  double oxy = 0.0;
  bool flame = false;

  FeatureVector features() const { return {temp, rh, oxy}; }
};

/// Welford running mean and population variance.
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 0 ? m2_ / static_cast<double>(count_) : 0.0; }
  double stddev() const;

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

enum class Signal { Temp, Rh, Oxy };
inline constexpr std::array<Signal, 3> kSignals = {Signal::Temp, Signal::Rh, Signal::Oxy};

std::string_view signal_name(Signal signal);
double signal_value(const SensorReading& r, Signal signal);

struct ThresholdConfig {
  std::uint64_t warmup = 30;
  double k = 3.0;
  double epsilon = 0.5;  // minimum half-width of the acceptance band
};

/// Per-node adaptive threshold state. A reading is anomalous on a signal when
/// it lies further than max(k * sigma, epsilon) from the running mean.
struct ThresholdState {
  ThresholdConfig config;
  std::array<RunningStats, 3> stats;
  std::uint64_t count = 0;
  std::optional<std::int64_t> last_ts;
};

enum class AlertKind { Buzzer, Sms };

struct FlameCause {};
struct AnomalyCause {
  Signal signal = Signal::Temp;
  double value = 0.0;
  double mean = 0.0;
  double sigma = 0.0;
};
using AlertCause = std::variant<FlameCause, AnomalyCause>;

struct AlertEvent {
  AlertKind kind = AlertKind::Sms;
  std::string node_id;
  std::int64_t ts_ms = 0;
  AlertCause cause;
  FeatureVector reading;
  std::string message;  // Sms only

  bool is_flame() const { return std::holds_alternative<FlameCause>(cause); }
};

struct IngestResult {
  ThresholdState state;
  std::vector<AlertEvent> events;
};

/// Flame readings raise a Buzzer and an Sms immediately and are kept out of
/// the running statistics. Other readings are tested against statistics that
/// exclude them, then folded in. Anomalies raise one Sms per signal.
/// Throws StaleTimestamp or OutOfRange.
IngestResult ingest(const ThresholdState& state, const SensorReading& reading);

/// Renders the SMS text. Throws WrongKind for non-Sms events.
std::string format_sms(const AlertEvent& event);

std::string iso8601_utc(std::int64_t ts_ms);

std::string alert_to_json(const AlertEvent& event);
/// Inverse of alert_to_json. Throws MalformedDocument.
AlertEvent alert_from_json(const std::string& text);
std::string reading_to_json(const SensorReading& reading);
/// Parses the telemetry wire format {node_id, ts_ms, temp, rh, oxy, flame}.
/// Throws MalformedDocument naming the offending field.
SensorReading reading_from_json(const std::string& text);

class AlertSink {
 public:
  virtual ~AlertSink() = default;
  /// May be called from several threads at once.
  virtual void deliver(const AlertEvent& event) = 0;
};

/// JSON-lines writer.
class LogSink final : public AlertSink {
 public:
  explicit LogSink(std::ostream& out) : out_(out) {}
  void deliver(const AlertEvent& event) override;

 private:
  std::mutex mutex_;
  std::ostream& out_;
};

class MemorySink final : public AlertSink {
 public:
  void deliver(const AlertEvent& event) override;
  std::vector<AlertEvent> events() const;

 private:
  mutable std::mutex mutex_;
  std::vector<AlertEvent> events_;
};

/// Thread-safe registry of per-node threshold state. Readings for one node
/// are serialized; different nodes proceed independently.
class EdgePipeline {
 public:
  explicit EdgePipeline(ThresholdConfig config = {}, bool auto_register = false)
      : config_(config), auto_register_(auto_register) {}

  void register_node(const std::string& node_id);
  bool has_node(const std::string& node_id) const;
  /// Throws UnknownNode, StaleTimestamp or OutOfRange.
  std::vector<AlertEvent> ingest(const SensorReading& reading);

 private:
  struct Slot {
    std::mutex mutex;
    ThresholdState state;
  };
  Slot* slot_for(const std::string& node_id);

  ThresholdConfig config_;
  bool auto_register_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<Slot>> nodes_;
};

// ---------------------------------------------------------------------------
// Scenario replay

struct SignalBaseline {
  double mean = 0.0;
  double sd = 0.0;
};

struct NodeScript {
  std::string id;
  std::int64_t offset_ms = 0;
  std::int64_t interval_ms = 1000;
  std::uint64_t count = 0;
  std::array<SignalBaseline, 3> baseline{};  // temp, rh, oxy
};

struct InjectedEvent {
  enum class Type { Flame, Step };
  Type type = Type::Flame;
  std::string node;
  std::int64_t at_ms = 0;  // offset from the scenario epoch
  Signal signal = Signal::Temp;
  double delta = 0.0;
};

// Script file:
// {
//   "seed": 7, "epoch_ms": 1704067200000,
//   "threshold": {"warmup": 30, "k": 3, "epsilon": 0.5},
//   "nodes": [{"id": "n1", "offset_ms": 0, "interval_ms": 1000, "count": 120,
//              "baseline": {"temp": {"mean": 25, "sd": 0.5}, "rh": {...}, "oxy": {...}}}],
//   "events": [{"type": "flame", "node": "n1", "at_ms": 10000},
//              {"type": "step", "node": "n1", "at_ms": 60000, "signal": "temp", "delta": 5}]
// }
// Optional: seed (0), epoch_ms (0), threshold (defaults), events ([]), offset_ms (0).
struct ScenarioScript {
  std::uint64_t seed = 0;
  std::int64_t epoch_ms = 0;
  ThresholdConfig threshold;
  std::vector<NodeScript> nodes;
  std::vector<InjectedEvent> events;
};

/// Throws MalformedScript.
ScenarioScript parse_scenario(const std::string& text);
ScenarioScript load_scenario(const std::string& path);

/// All scripted readings ordered by (timestamp, node id). A flame event
/// marks the first reading of its node at or after at_ms; a step shifts the
/// signal for every reading from at_ms on. Values are rounded to 0.1.
std::vector<SensorReading> scenario_readings(const ScenarioScript& script);

struct RunLog {
  std::vector<AlertEvent> events;
  std::string to_jsonl() const;
};

RunLog run_scenario(const ScenarioScript& script, std::span<AlertSink* const> sinks);

}  // namespace greenshield
