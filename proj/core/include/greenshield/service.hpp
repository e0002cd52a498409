#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "greenshield/edge.hpp"
#include "greenshield/models.hpp"

namespace greenshield {

/// The model a service instance answers with, plus the metadata reported by
/// GET /api/v1/model.
struct ServedModel {
  FireModel model;
  std::string version;           // content hash of the canonical model document
  std::string trained_at;        // empty when loaded from a bare model file
  std::optional<std::string> metrics_json;  // EvalReport of the selected model
};

/// Accepts either a selected.json written by training (the referenced model
/// file is resolved next to it) or a bare model file.
ServedModel load_served_model(const std::filesystem::path& path);

/// Canonical prediction body shared by the HTTP API and the CLI:
/// {"label", "model_kind", "model_version", "probability"}.
std::string prediction_json(const ServedModel& served, const FeatureVector& x);

struct AlertPage {
  std::vector<AlertEvent> events;  // newest first
  std::optional<std::string> cursor;
};

/// Append-only alert store ordered by (timestamp, node id, arrival). When a
/// log path is given, existing lines are replayed on construction and every
/// append is written through as one JSON line.
class AlertStore {
 public:
  explicit AlertStore(std::optional<std::filesystem::path> log_path = std::nullopt);

  void append(const AlertEvent& event);
  /// Events strictly older than `after` (all events when empty), newest
  /// first. Throws InvalidArgument for an unknown cursor.
  AlertPage page(const std::optional<std::string>& after, std::size_t limit) const;
  std::size_t size() const;

 private:
  struct Entry {
    std::uint64_t seq;
    AlertEvent event;
  };
  void insert(AlertEvent event);

  mutable std::mutex mutex_;
  std::optional<std::filesystem::path> log_path_;
  std::vector<Entry> entries_;  // ascending key order
  std::uint64_t next_seq_ = 0;
};

/// Posts the SMS text of each Sms event to an HTTP endpoint. Failures are
/// counted and never propagate.
class WebhookSink final : public AlertSink {
 public:
  explicit WebhookSink(std::string url);
  void deliver(const AlertEvent& event) override;
  std::size_t failures() const;
  std::vector<std::string> failure_messages() const;

 private:
  std::string url_;
  mutable std::mutex mutex_;
  std::vector<std::string> failures_;
};

struct ServiceOptions {
  std::string addr = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> model_path;
  std::optional<std::filesystem::path> alert_log;
  std::string cors_origin = "*";
  std::optional<std::string> webhook;
  ThresholdConfig thresholds;
};

struct HttpResult {
  int status = 200;
  std::string body;
};

/// Error envelope {"error": {"code", "message", "field"?}}.
std::string error_body(std::string_view code, std::string_view message, std::string_view field = {});

class Service {
 public:
  /// A model that fails to load leaves the service up, answering 503.
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResult predict(const std::string& body) const;
  HttpResult telemetry(const std::string& body);
  HttpResult alerts(const std::optional<std::string>& after, const std::optional<std::string>& limit) const;
  HttpResult model_info() const;

  void set_model(std::shared_ptr<const ServedModel> model);
  std::shared_ptr<const ServedModel> model() const;
  const std::string& load_error() const { return load_error_; }

  /// Binds and serves on a background thread; returns the bound port
  /// (options.port, or an ephemeral port when it is 0). Throws Io on bind failure.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  ServiceOptions options_;
  mutable std::mutex model_mutex_;
  std::shared_ptr<const ServedModel> model_;
  std::string load_error_;
  EdgePipeline pipeline_;
  AlertStore store_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace greenshield
