#include "cli.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "greenshield/dataset.hpp"
#include "greenshield/edge.hpp"
#include "greenshield/error.hpp"
#include "greenshield/metrics.hpp"
#include "greenshield/pipeline.hpp"
#include "greenshield/serialization.hpp"
#include "greenshield/service.hpp"

namespace greenshield::cli {
namespace {

struct TrainFlags {
  std::string data;
  std::string model_out = "models";
  std::string format = "table";
  std::string trained_at;
  std::string kernel = "rbf";
  TrainConfig config;
};

std::string default_trained_at() {
  // Reproducible-build convention; keeps repeated runs byte-identical.
  std::int64_t seconds = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) seconds = std::strtoll(epoch, nullptr, 10);
  return iso8601_utc(seconds * 1000);
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--seed", f.config.seed, "Seed for splitting and training")->capture_default_str();
  cmd->add_option("--lr", f.config.logreg.learning_rate, "Logistic regression learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iters", f.config.logreg.max_iters, "Logistic regression iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tol", f.config.logreg.tol, "Logistic regression loss-decrease tolerance")->capture_default_str();
  cmd->add_option("--n-trees", f.config.forest.n_trees, "Number of trees")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-depth", f.config.forest.max_depth, "Maximum tree depth")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--min-samples-split", f.config.forest.min_samples_split, "Minimum samples to split a node")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--svm-c", f.config.svm.C, "SVM regularization constant C")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--svm-kernel", f.kernel, "SVM kernel: linear, rbf or poly")
      ->check(CLI::IsMember({"linear", "rbf", "poly"}))
      ->capture_default_str();
  cmd->add_option("--svm-gamma", f.config.svm.gamma, "RBF gamma (0 = 1/n_features)")->capture_default_str();
  cmd->add_option("--svm-max-passes", f.config.svm.max_passes, "SMO violation-free sweeps before stopping")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--svm-epochs", f.config.svm.epochs, "Linear SVM epochs")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_format_flag(CLI::App* cmd, std::string& format) {
  cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "json"}))->capture_default_str();
}

int cmd_gen_data(const std::string& out_path, std::size_t n, std::uint64_t seed, std::ostream& out) {
  const auto rows = generate_dataset(n, seed);
  save_csv(out_path, rows);
  out << "wrote " << rows.size() << " rows to " << out_path << '\n';
  return 0;
}

int cmd_train(TrainFlags& f, std::ostream& out) {
  f.config.svm.kernel = parse_kernel(f.kernel);
  const auto split = prepare_dataset(load_csv(f.data), f.config.seed);
  const auto trained = train_all(split, f.config);
  write_training_outputs(trained, f.model_out, f.trained_at.empty() ? default_trained_at() : f.trained_at);

  if (f.format == "json") {
    std::string body = "{\"reports\":[";
    for (std::size_t i = 0; i < trained.reports.size(); ++i) {
      body += (i ? "," : "") + report_to_json(trained.reports[i]);
    }
    body += "],\"selected\":\"" + std::string(model_kind_id(trained.selected)) + "\"}";
    out << body << '\n';
  } else {
    out << render_table(trained.reports);
    out << "selected: " << model_kind_display(trained.selected) << " (" << model_kind_id(trained.selected) << ")\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data, std::uint64_t seed, const std::string& format,
                 std::ostream& out) {
  const auto served = load_served_model(model_path);
  const auto split = prepare_dataset(load_csv(data), seed);
  const auto report = evaluate(served.model, split.test);
  if (format == "json") {
    out << report_to_json(report) << '\n';
  } else {
    const std::vector<EvalReport> reports{report};
    out << render_table(reports);
  }
  return 0;
}

int cmd_predict(const std::string& model_path, const FeatureVector& x, const std::string& format, std::ostream& out) {
  const auto served = load_served_model(model_path);
  if (format == "json") {
    out << prediction_json(served, x) << '\n';
    return 0;
  }
  char probability[32];
  std::snprintf(probability, sizeof(probability), "%.4f", predict_probability(served.model, x));
  out << "probability: " << probability << '\n'
      << "label: " << (predict_label(served.model, x) == kFire ? "fire" : "not fire") << '\n';
  return 0;
}

int cmd_simulate(const std::string& script_path, const std::string& webhook, std::ostream& out, std::ostream& err) {
  const auto script = load_scenario(script_path);
  LogSink log(out);
  std::vector<AlertSink*> sinks{&log};
  std::unique_ptr<WebhookSink> hook;
  if (!webhook.empty()) {
    hook = std::make_unique<WebhookSink>(webhook);
    sinks.push_back(hook.get());
  }
  run_scenario(script, sinks);
  if (hook) {
    for (const auto& message : hook->failure_messages()) err << "warning: delivery failed: " << message << '\n';
  }
  return 0;
}

int cmd_serve(ServiceOptions options, std::ostream& err) {
  Service service(std::move(options));
  if (!service.model()) err << "warning: " << service.load_error() << "; /api/v1/predict will answer 503\n";
  service.run();
  return 0;
}

}  // namespace

int exit_code_for(int error_code_ordinal) { return 10 + error_code_ordinal; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forest-fire risk models, edge alert simulation and prediction service", "greenshield"};
  app.require_subcommand(1);

  std::string gen_out;
  std::size_t gen_n = 500;
  std::uint64_t gen_seed = 42;
  auto* gen = app.add_subcommand("gen-data", "Write the seeded synthetic benchmark dataset");
  gen->add_option("--out", gen_out, "Output CSV path")->required();
  gen->add_option("--n", gen_n, "Number of rows (>= 50)")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Train, evaluate and select among all three models");
  train->add_option("--data", train_flags.data, "Input CSV")->required();
  train->add_option("--model-out", train_flags.model_out, "Output directory for model files")->capture_default_str();
  train->add_option("--trained-at", train_flags.trained_at, "Timestamp recorded in selected.json");
  add_format_flag(train, train_flags.format);
  add_train_flags(train, train_flags);

  std::string eval_model;
  std::string eval_data;
  std::uint64_t eval_seed = 42;
  std::string eval_format = "table";
  auto* eval = app.add_subcommand("evaluate", "Evaluate a model on the held-out split of a dataset");
  eval->add_option("--model", eval_model, "Model file or selected.json")->required();
  eval->add_option("--data", eval_data, "Input CSV")->required();
  eval->add_option("--seed", eval_seed, "Split seed used at training time")->capture_default_str();
  add_format_flag(eval, eval_format);

  std::string predict_model;
  FeatureVector predict_x;
  std::string predict_format = "table";
  auto* predict = app.add_subcommand("predict", "Predict the fire probability for one reading");
  predict->add_option("--model", predict_model, "Model file or selected.json")->required();
  predict->add_option("--temp", predict_x.temp, "Temperature, deg C")->required()->check(CLI::Range(kTempBounds.lo, kTempBounds.hi));
  predict->add_option("--rh", predict_x.rh, "Relative humidity, %")->required()->check(CLI::Range(kPercentBounds.lo, kPercentBounds.hi));
  predict->add_option("--oxy", predict_x.oxy, "Oxygen level, %")->required()->check(CLI::Range(kPercentBounds.lo, kPercentBounds.hi));
  add_format_flag(predict, predict_format);

  std::string sim_script;
  std::string sim_webhook;
  auto* simulate = app.add_subcommand("simulate", "Replay a sensor scenario and print the alert log");
  simulate->add_option("--script", sim_script, "Scenario JSON file")->required();
  simulate->add_option("--webhook", sim_webhook, "URL receiving each SMS text as a POST");

  ServiceOptions serve_options;
  std::string serve_model;
  std::string serve_alert_log;
  std::string serve_webhook;
  auto* serve = app.add_subcommand("serve", "Run the HTTP prediction and telemetry service");
  serve->add_option("--addr", serve_options.addr, "Listen address")->capture_default_str();
  serve->add_option("--port", serve_options.port, "Listen port")->check(CLI::Range(0, 65535))->capture_default_str();
  serve->add_option("--model", serve_model, "Model file or selected.json");
  serve->add_option("--alert-log", serve_alert_log, "Append-only JSON-lines alert store");
  serve->add_option("--cors-origin", serve_options.cors_origin, "Allowed CORS origin")->capture_default_str();
  serve->add_option("--webhook", serve_webhook, "URL receiving each SMS text as a POST");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_data(gen_out, gen_n, gen_seed, out);
    if (*train) return cmd_train(train_flags, out);
    if (*eval) return cmd_evaluate(eval_model, eval_data, eval_seed, eval_format, out);
    if (*predict) return cmd_predict(predict_model, predict_x, predict_format, out);
    if (*simulate) return cmd_simulate(sim_script, sim_webhook, out, err);
    if (*serve) {
      if (!serve_model.empty()) serve_options.model_path = serve_model;
      if (!serve_alert_log.empty()) serve_options.alert_log = serve_alert_log;
      if (!serve_webhook.empty()) serve_options.webhook = serve_webhook;
      return cmd_serve(std::move(serve_options), err);
    }
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}

}  // namespace greenshield::cli
