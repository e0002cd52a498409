#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "greenshield/edge.hpp"
#include "greenshield/error.hpp"
#include "oracles.hpp"

using namespace greenshield;

namespace {

constexpr std::int64_t kNewYear2024 = 1704067200000;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

SensorReading reading(std::int64_t ts, double temp, double rh = 40.0, double oxy = 21.0, bool flame = false) {
  return {"n1", ts, temp, rh, oxy, flame};
}

ThresholdState warmed_up(Rng& rng, std::uint64_t n) {
  ThresholdState state;
  for (std::uint64_t i = 0; i < n; ++i) {
    state = ingest(state, reading(static_cast<std::int64_t>(i), rng.normal(25.0, 0.5))).state;
  }
  return state;
}

std::string demo_script(const std::string& events) {
  return R"({"seed": 7, "epoch_ms": 1704067200000,
    "nodes": [{"id": "n1", "interval_ms": 1000, "count": 120,
               "baseline": {"temp": {"mean": 25, "sd": 0.3}, "rh": {"mean": 45, "sd": 0.5},
                            "oxy": {"mean": 21, "sd": 0.1}}},
              {"id": "n2", "offset_ms": 500, "interval_ms": 1000, "count": 120,
               "baseline": {"temp": {"mean": 24, "sd": 0.3}, "rh": {"mean": 50, "sd": 0.5},
                            "oxy": {"mean": 20.9, "sd": 0.1}}}],
    "events": )" +
         events + "}";
}

}  // namespace

TEST_CASE("Welford statistics match a two-pass computation") {
  Rng rng(17);
  std::vector<double> xs;
  RunningStats stats;
  for (int i = 0; i < 10000; ++i) {
    xs.push_back(rng.normal(1000.0, 3.0));
    stats.add(xs.back());
  }
  const auto [mean, variance] = oracle::two_pass(xs);
  CHECK(std::abs(stats.mean() - mean) <= 1e-9);
  CHECK(std::abs(stats.variance() - variance) <= 1e-9);
  CHECK(stats.count() == 10000);
}

TEST_CASE("a flame on the first reading raises a buzzer and an sms") {
  const auto result = ingest(ThresholdState{}, reading(0, 25.0, 40.0, 21.0, true));
  REQUIRE(result.events.size() == 2);
  CHECK(result.events[0].kind == AlertKind::Buzzer);
  CHECK(result.events[1].kind == AlertKind::Sms);
  CHECK(result.events[0].is_flame());
  CHECK(result.events[1].is_flame());
  CHECK(result.state.count == 0);
  CHECK(result.state.stats[0].count() == 0);
}

TEST_CASE("adaptive band after warmup") {
  Rng rng(3);
  const auto state = warmed_up(rng, 50);
  CHECK(ingest(state, reading(100, 26.0)).events.empty());
  const auto hot = ingest(state, reading(100, 40.0));
  REQUIRE(hot.events.size() == 1);
  CHECK(hot.events[0].kind == AlertKind::Sms);
  const auto& cause = std::get<AnomalyCause>(hot.events[0].cause);
  CHECK(cause.signal == Signal::Temp);
  CHECK(cause.value == 40.0);
  CHECK(cause.mean == state.stats[0].mean());
  CHECK(hot.state.stats[0].count() == 51);
}

TEST_CASE("no anomaly can fire during warmup") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    ThresholdState state;
    for (std::int64_t i = 0; i < 30; ++i) {
      const auto r = ingest(state, reading(i, -50.0 + 110.0 * rng.uniform(), 100.0 * rng.uniform(), 100.0 * rng.uniform()));
      CHECK(r.events.empty());
      state = r.state;
    }
  }
}

TEST_CASE("a constant stream never alerts") {
  ThresholdState state;
  for (std::int64_t i = 0; i < 500; ++i) {
    const auto r = ingest(state, reading(i, 25.0));
    CHECK(r.events.empty());
    state = r.state;
  }
  CHECK(state.stats[0].stddev() == 0.0);
}

TEST_CASE("the epsilon floor absorbs small deviations on a flat signal") {
  ThresholdState state;
  for (std::int64_t i = 0; i < 40; ++i) state = ingest(state, reading(i, 25.0)).state;
  CHECK(ingest(state, reading(100, 25.4)).events.empty());
  CHECK(ingest(state, reading(100, 25.6)).events.size() == 1);
}

TEST_CASE("stale and duplicate timestamps are rejected") {
  const auto state = ingest(ThresholdState{}, reading(1000, 25.0)).state;
  CHECK(code_of([&] { ingest(state, reading(1000, 25.0)); }) == ErrorCode::StaleTimestamp);
  CHECK(code_of([&] { ingest(state, reading(999, 25.0)); }) == ErrorCode::StaleTimestamp);
  CHECK(code_of([&] { ingest(state, reading(2000, 25.0, 140.0)); }) == ErrorCode::OutOfRange);
}

TEST_CASE("sms text") {
  const auto flame = ingest(ThresholdState{}, {"n1", kNewYear2024, 31.0, 40.0, 21.0, true});
  CHECK(flame.events[1].message ==
        "GREENSHIELD ALERT node=n1 time=2024-01-01T00:00:00Z cause=FLAME temp=31.0C rh=40.0% oxy=21.0%");
  CHECK(format_sms(flame.events[1]) == flame.events[1].message);
  CHECK(code_of([&] { format_sms(flame.events[0]); }) == ErrorCode::WrongKind);

  AlertEvent anomaly;
  anomaly.kind = AlertKind::Sms;
  anomaly.node_id = "ridge-7";
  anomaly.ts_ms = kNewYear2024 + 61250;
  anomaly.cause = AnomalyCause{Signal::Rh, 12.0, 45.0, 1.0};
  anomaly.reading = {28.25, 12.0, 20.95};
  CHECK(format_sms(anomaly) ==
        "GREENSHIELD ALERT node=ridge-7 time=2024-01-01T00:01:01.250Z cause=ANOMALY:rh temp=28.2C rh=12.0% oxy=20.9%");
}

TEST_CASE("iso8601 rendering") {
  CHECK(iso8601_utc(0) == "1970-01-01T00:00:00Z");
  CHECK(iso8601_utc(kNewYear2024 + 5) == "2024-01-01T00:00:00.005Z");
  CHECK(iso8601_utc(-1) == "1969-12-31T23:59:59.999Z");
}

TEST_CASE("alert and reading json round trips") {
  const auto flame = ingest(ThresholdState{}, {"n1", kNewYear2024, 31.0, 40.0, 21.0, true});
  for (const auto& e : flame.events) {
    const auto text = alert_to_json(e);
    CHECK(alert_to_json(alert_from_json(text)) == text);
  }
  AlertEvent anomaly;
  anomaly.node_id = "n2";
  anomaly.cause = AnomalyCause{Signal::Oxy, 30.0, 21.0, 0.2};
  anomaly.reading = {25, 40, 30};
  anomaly.message = format_sms(anomaly);
  CHECK(alert_to_json(alert_from_json(alert_to_json(anomaly))) == alert_to_json(anomaly));

  const SensorReading r{"n3", 42, 25.5, 40.25, 21.0, true};
  const auto back = reading_from_json(reading_to_json(r));
  CHECK(back.node_id == "n3");
  CHECK(back.ts_ms == 42);
  CHECK(back.rh == 40.25);
  CHECK(back.flame);
  CHECK(code_of([] { reading_from_json(R"({"node_id":"a","ts_ms":1,"temp":20,"rh":40,"oxy":21})"); }) ==
        ErrorCode::MalformedDocument);
  CHECK(code_of([] { alert_from_json(R"({"kind":"siren"})"); }) == ErrorCode::MalformedDocument);
}

TEST_CASE("pipeline registry") {
  EdgePipeline strict;
  CHECK(code_of([&] { strict.ingest(reading(0, 25.0)); }) == ErrorCode::UnknownNode);
  strict.register_node("n1");
  CHECK(strict.ingest(reading(0, 25.0)).empty());
  CHECK(code_of([&] { strict.ingest(reading(0, 25.0)); }) == ErrorCode::StaleTimestamp);

  EdgePipeline open({}, true);
  CHECK(open.ingest(reading(0, 25.0, 40.0, 21.0, true)).size() == 2);
  CHECK(open.has_node("n1"));
}

TEST_CASE("scenario: a flame at ten seconds") {
  const auto script = parse_scenario(demo_script(R"([{"type": "flame", "node": "n1", "at_ms": 10000}])"));
  MemorySink sink;
  AlertSink* sinks[] = {&sink};
  const auto log = run_scenario(script, sinks);
  std::vector<AlertEvent> flames;
  for (const auto& e : log.events) {
    if (e.is_flame()) flames.push_back(e);
  }
  REQUIRE(flames.size() == 2);
  CHECK(flames[0].kind == AlertKind::Buzzer);
  CHECK(flames[1].kind == AlertKind::Sms);
  CHECK(flames[0].ts_ms == kNewYear2024 + 10000);
  CHECK(flames[0].node_id == "n1");
  CHECK(sink.events().size() == log.events.size());
}

TEST_CASE("scenario: a persistent step is caught on its first reading") {
  const auto script = parse_scenario(
      demo_script(R"([{"type": "step", "node": "n2", "at_ms": 60000, "signal": "temp", "delta": 3}])"));
  const auto log = run_scenario(script, {});
  bool seen = false;
  for (const auto& e : log.events) {
    if (e.node_id != "n2" || e.is_flame()) continue;
    const auto& cause = std::get<AnomalyCause>(e.cause);
    if (cause.signal != Signal::Temp || e.ts_ms < kNewYear2024 + 60000) continue;
    CHECK(e.ts_ms == kNewYear2024 + 60500);
    seen = true;
    break;
  }
  CHECK(seen);
}

TEST_CASE("scenario replay is deterministic") {
  const auto text = demo_script(R"([{"type": "flame", "node": "n2", "at_ms": 30000},
                                    {"type": "step", "node": "n1", "at_ms": 90000, "signal": "rh", "delta": -15}])");
  const auto a = run_scenario(parse_scenario(text), {}).to_jsonl();
  const auto b = run_scenario(parse_scenario(text), {}).to_jsonl();
  CHECK(a == b);
  CHECK_FALSE(a.empty());

  std::ostringstream streamed;
  LogSink sink(streamed);
  AlertSink* sinks[] = {&sink};
  run_scenario(parse_scenario(text), sinks);
  CHECK(streamed.str() == a);
}

TEST_CASE("scenario edge cases") {
  CHECK(run_scenario(parse_scenario(R"({"nodes": []})"), {}).events.empty());
  const auto readings = scenario_readings(parse_scenario(demo_script("[]")));
  CHECK(readings.size() == 240);
  for (std::size_t i = 1; i < readings.size(); ++i) CHECK(readings[i - 1].ts_ms <= readings[i].ts_ms);

  CHECK(code_of([] { parse_scenario("{"); }) == ErrorCode::MalformedScript);
  CHECK(code_of([] { parse_scenario(R"({"seed": 1})"); }) == ErrorCode::MalformedScript);
  CHECK(code_of([] { parse_scenario(demo_script(R"([{"type": "meteor", "node": "n1", "at_ms": 0}])")); }) ==
        ErrorCode::MalformedScript);
  CHECK(code_of([] { parse_scenario(demo_script(R"([{"type": "flame", "node": "n9", "at_ms": 0}])")); }) ==
        ErrorCode::MalformedScript);
}
