#include "greenshield/service.hpp"

#include <algorithm>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "greenshield/error.hpp"
#include "greenshield/metrics.hpp"
#include "greenshield/serialization.hpp"
#include "json_io.hpp"

namespace greenshield {
namespace {

using detail::json;

constexpr std::size_t kDefaultPageSize = 100;
constexpr std::size_t kMaxPageSize = 500;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

bool key_less(const AlertEvent& a, std::uint64_t seq_a, const AlertEvent& b, std::uint64_t seq_b) {
  if (a.ts_ms != b.ts_ms) return a.ts_ms < b.ts_ms;
  if (a.node_id != b.node_id) return a.node_id < b.node_id;
  return seq_a < seq_b;
}

std::optional<std::uint64_t> parse_unsigned(const std::string& text) {
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

HttpResult fail(int status, std::string_view code, std::string_view message, std::string_view field = {}) {
  return {status, error_body(code, message, field)};
}

}  // namespace

std::string error_body(std::string_view code, std::string_view message, std::string_view field) {
  json inner = {{"code", std::string(code)}, {"message", std::string(message)}};
  if (!field.empty()) inner["field"] = std::string(field);
  return detail::dump_canonical({{"error", inner}});
}

ServedModel load_served_model(const std::filesystem::path& path) {
  const json doc = detail::parse_document(read_file(path));
  ServedModel served;
  if (doc.is_object() && doc.contains("selected")) {
    const auto& file = detail::require(doc, "model_file");
    if (!file.is_string()) throw Error(ErrorCode::MalformedDocument, "model_file must be a string", "model_file");
    served.model = load_model(path.parent_path() / file.get<std::string>());
    if (doc.contains("trained_at") && doc["trained_at"].is_string()) {
      served.trained_at = doc["trained_at"].get<std::string>();
    }
    const std::string kind(model_kind_id(kind_of(served.model)));
    if (doc.contains("reports") && doc["reports"].contains(kind)) {
      // round-trip through the typed report to validate the schema
      served.metrics_json = report_to_json(detail::report_from(doc["reports"][kind]));
    }
  } else {
    served.model = model_from_json(doc.dump());
  }
  served.version = content_version(model_to_json(served.model));
  return served;
}

std::string prediction_json(const ServedModel& served, const FeatureVector& x) {
  const double p = predict_probability(served.model, x);
  const int label = predict_label(served.model, x);
  return detail::dump_canonical({{"label", label == kFire ? "fire" : "not fire"},
                                 {"model_kind", std::string(model_kind_id(kind_of(served.model)))},
                                 {"model_version", served.version},
                                 {"probability", p}});
}

// ---------------------------------------------------------------------------

AlertStore::AlertStore(std::optional<std::filesystem::path> log_path) : log_path_(std::move(log_path)) {
  if (!log_path_ || !std::filesystem::exists(*log_path_)) return;
  std::ifstream in(*log_path_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    insert(alert_from_json(line));
  }
}

void AlertStore::insert(AlertEvent event) {
  const std::uint64_t seq = next_seq_++;
  auto it = std::upper_bound(entries_.begin(), entries_.end(), 0, [&](int, const Entry& e) {
    return key_less(event, seq, e.event, e.seq);
  });
  entries_.insert(it, Entry{seq, std::move(event)});
}

void AlertStore::append(const AlertEvent& event) {
  std::lock_guard lock(mutex_);
  if (log_path_) {
    std::ofstream out(*log_path_, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::Io, "cannot append to " + log_path_->string());
    out << alert_to_json(event) << '\n';
  }
  insert(event);
}

AlertPage AlertStore::page(const std::optional<std::string>& after, std::size_t limit) const {
  std::lock_guard lock(mutex_);
  std::size_t end = entries_.size();  // exclusive upper position in ascending order
  if (after) {
    const auto seq = parse_unsigned(*after);
    auto it = seq ? std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.seq == *seq; })
                  : entries_.end();
    if (it == entries_.end()) throw Error(ErrorCode::InvalidArgument, "unknown cursor", "after");
    end = static_cast<std::size_t>(it - entries_.begin());
  }
  AlertPage page;
  std::size_t pos = end;
  while (pos > 0 && page.events.size() < limit) {
    --pos;
    page.events.push_back(entries_[pos].event);
  }
  if (pos > 0 && !page.events.empty()) page.cursor = std::to_string(entries_[pos].seq);
  return page;
}

std::size_t AlertStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

WebhookSink::WebhookSink(std::string url) : url_(std::move(url)) {}

void WebhookSink::deliver(const AlertEvent& event) {
  if (event.kind != AlertKind::Sms) return;
  std::string error;
  try {
    const auto scheme_end = url_.find("://");
    const auto path_start = url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);
    httplib::Client client(base);
    client.set_connection_timeout(1, 0);
    client.set_read_timeout(2, 0);
    auto response = client.Post(path, event.message, "text/plain");
    if (!response) {
      error = "webhook " + url_ + ": " + httplib::to_string(response.error());
    } else if (response->status >= 300) {
      error = "webhook " + url_ + ": HTTP " + std::to_string(response->status);
    }
  } catch (const std::exception& e) {
    error = "webhook " + url_ + ": " + e.what();
  }
  if (!error.empty()) {
    std::lock_guard lock(mutex_);
    failures_.push_back(error);
  }
}

std::size_t WebhookSink::failures() const {
  std::lock_guard lock(mutex_);
  return failures_.size();
}

std::vector<std::string> WebhookSink::failure_messages() const {
  std::lock_guard lock(mutex_);
  return failures_;
}

// ---------------------------------------------------------------------------

struct Service::Impl {
  httplib::Server server;
  std::thread server_thread;

  // asynchronous fan-out to optional external sinks
  std::unique_ptr<WebhookSink> webhook;
  std::mutex queue_mutex;
  std::condition_variable queue_cv;
  std::deque<AlertEvent> queue;
  bool stopping = false;
  std::thread dispatcher;

  void dispatch_loop() {
    for (;;) {
      std::unique_lock lock(queue_mutex);
      queue_cv.wait(lock, [&] { return stopping || !queue.empty(); });
      if (queue.empty()) return;
      AlertEvent event = std::move(queue.front());
      queue.pop_front();
      lock.unlock();
      if (webhook) webhook->deliver(event);
    }
  }

  void enqueue(std::vector<AlertEvent> events) {
    if (!webhook) return;
    {
      std::lock_guard lock(queue_mutex);
      for (auto& e : events) queue.push_back(std::move(e));
    }
    queue_cv.notify_one();
  }
};

Service::Service(ServiceOptions options)
    : options_(std::move(options)),
      pipeline_(options_.thresholds, /*auto_register=*/true),
      store_(options_.alert_log),
      impl_(std::make_unique<Impl>()) {
  if (options_.model_path) {
    try {
      model_ = std::make_shared<const ServedModel>(load_served_model(*options_.model_path));
    } catch (const Error& e) {
      load_error_ = e.what();
    }
  } else {
    load_error_ = "no model path configured";
  }
  if (options_.webhook) {
    impl_->webhook = std::make_unique<WebhookSink>(*options_.webhook);
    impl_->dispatcher = std::thread([this] { impl_->dispatch_loop(); });
  }

  auto& server = impl_->server;
  const std::string origin = options_.cors_origin;
  server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  server.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  auto reply = [](httplib::Response& res, const HttpResult& result) {
    res.status = result.status;
    res.set_content(result.body, "application/json");
  };
  server.Post("/api/v1/predict", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, predict(req.body));
  });
  server.Post("/api/v1/telemetry", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, telemetry(req.body));
  });
  server.Get("/api/v1/alerts", [this, reply](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> after;
    std::optional<std::string> limit;
    if (req.has_param("after")) after = req.get_param_value("after");
    if (req.has_param("limit")) limit = req.get_param_value("limit");
    reply(res, alerts(after, limit));
  });
  server.Get("/api/v1/model", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, model_info());
  });
  server.set_error_handler([reply](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) reply(res, fail(404, "not_found", "no such endpoint"));
  });
  server.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    }
    reply(res, fail(500, "internal", message));
  });
}

Service::~Service() {
  stop();
  {
    std::lock_guard lock(impl_->queue_mutex);
    impl_->stopping = true;
  }
  impl_->queue_cv.notify_all();
  if (impl_->dispatcher.joinable()) impl_->dispatcher.join();
}

void Service::set_model(std::shared_ptr<const ServedModel> model) {
  std::lock_guard lock(model_mutex_);
  model_ = std::move(model);
}

std::shared_ptr<const ServedModel> Service::model() const {
  std::lock_guard lock(model_mutex_);
  return model_;
}

HttpResult Service::predict(const std::string& body) const {
  const auto served = model();
  if (!served) return fail(503, "no_model", "no model loaded");

  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception&) {
    return fail(400, "malformed_body", "request body is not valid JSON");
  }
  if (!doc.is_object()) return fail(400, "malformed_body", "request body must be a JSON object");

  std::array<double, kNumFeatures> values{};
  constexpr std::array<const char*, kNumFeatures> names = {"temp", "rh", "oxy"};
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    auto it = doc.find(names[j]);
    if (it == doc.end()) return fail(400, "missing_field", std::string("missing field '") + names[j] + "'", names[j]);
    if (!it->is_number()) return fail(400, "invalid_type", std::string("field '") + names[j] + "' must be a number", names[j]);
    values[j] = it->get<double>();
  }
  const FeatureVector x = FeatureVector::from(values);
  try {
    validate_features(x);
  } catch (const Error& e) {
    return fail(400, "out_of_range", e.what(), e.detail());
  }
  return {200, prediction_json(*served, x)};
}

HttpResult Service::telemetry(const std::string& body) {
  SensorReading reading;
  try {
    reading = reading_from_json(body);
  } catch (const Error& e) {
    const auto code = e.code() == ErrorCode::OutOfRange ? "out_of_range" : "malformed_body";
    return fail(400, code, e.what(), e.detail());
  }
  std::vector<AlertEvent> events;
  try {
    events = pipeline_.ingest(reading);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StaleTimestamp) return fail(409, "stale_timestamp", e.what(), "ts_ms");
    return fail(400, std::string(error_code_name(e.code())), e.what(), e.detail());
  }
  for (const auto& event : events) store_.append(event);
  const std::size_t produced = events.size();
  impl_->enqueue(std::move(events));
  return {202, detail::dump_canonical({{"accepted", true}, {"alerts", produced}})};
}

HttpResult Service::alerts(const std::optional<std::string>& after, const std::optional<std::string>& limit) const {
  std::size_t page_size = kDefaultPageSize;
  if (limit) {
    const auto parsed = parse_unsigned(*limit);
    if (!parsed || *parsed < 1 || *parsed > kMaxPageSize) {
      return fail(400, "bad_limit", "limit must be an integer in [1, 500]", "limit");
    }
    page_size = static_cast<std::size_t>(*parsed);
  }
  AlertPage page;
  try {
    page = store_.page(after, page_size);
  } catch (const Error& e) {
    return fail(400, "bad_cursor", e.what(), "after");
  }
  json events = json::array();
  for (const auto& e : page.events) events.push_back(json::parse(alert_to_json(e)));
  return {200, detail::dump_canonical({{"events", events}, {"cursor", page.cursor ? json(*page.cursor) : json(nullptr)}})};
}

HttpResult Service::model_info() const {
  const auto served = model();
  if (!served) return fail(503, "no_model", load_error_.empty() ? "no model loaded" : load_error_);
  json doc = {{"kind", std::string(model_kind_id(kind_of(served->model)))},
              {"version", served->version},
              {"trained_at", served->trained_at.empty() ? json(nullptr) : json(served->trained_at)},
              {"metrics", served->metrics_json ? json::parse(*served->metrics_json) : json(nullptr)}};
  return {200, detail::dump_canonical(doc)};
}

int Service::start() {
  auto& server = impl_->server;
  int port = options_.port;
  if (port == 0) {
    port = server.bind_to_any_port(options_.addr);
    if (port < 0) throw Error(ErrorCode::Io, "cannot bind " + options_.addr);
  } else if (!server.bind_to_port(options_.addr, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + options_.addr + ":" + std::to_string(port) + " (port in use?)");
  }
  impl_->server_thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return port;
}

void Service::run() {
  if (!impl_->server.bind_to_port(options_.addr, options_.port)) {
    throw Error(ErrorCode::Io,
                "cannot bind " + options_.addr + ":" + std::to_string(options_.port) + " (port in use?)");
  }
  impl_->server.listen_after_bind();
}

void Service::stop() {
  impl_->server.stop();
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

}  // namespace greenshield
