#include "json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "greenshield/error.hpp"
#include "greenshield/serialization.hpp"

namespace greenshield::detail {
namespace {

void write_value(std::string& out, const json& value, int indent, int level) {
  auto newline = [&](int depth) {
    if (indent < 0) return;
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * depth), ' ');
  };
  switch (value.type()) {
    case json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out.push_back(',');
        first = false;
        newline(level + 1);
        out += json(key).dump();
        out += indent < 0 ? ":" : ": ";
        write_value(out, item, indent, level + 1);
      }
      newline(level);
      out.push_back('}');
      return;
    }
    case json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      out.push_back('[');
      bool first = true;
      for (const auto& item : value) {
        if (!first) out.push_back(',');
        first = false;
        newline(level + 1);
        write_value(out, item, indent, level + 1);
      }
      newline(level);
      out.push_back(']');
      return;
    }
    case json::value_t::number_float: {
      const double v = value.get<double>();
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "cannot serialize a non-finite real");
      char buffer[32];
      std::snprintf(buffer, sizeof(buffer), "%.17g", v);
      out += buffer;
      return;
    }
    default:
      out += value.dump();
  }
}

json point_json(std::span<const double> values) { return json(std::vector<double>(values.begin(), values.end())); }

std::array<double, kNumFeatures> require_point(const json& object, const char* key) {
  const json& array = require(object, key);
  if (!array.is_array() || array.size() != kNumFeatures) {
    throw Error(ErrorCode::MalformedDocument,
                std::string("field '") + key + "' must be an array of " + std::to_string(kNumFeatures) + " numbers",
                key);
  }
  std::array<double, kNumFeatures> out{};
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if (!array[j].is_number()) throw Error(ErrorCode::MalformedDocument, std::string("non-numeric entry in '") + key + "'", key);
    out[j] = array[j].get<double>();
  }
  return out;
}

std::uint64_t require_count(const json& object, const char* key) {
  const json& v = require(object, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw Error(ErrorCode::MalformedDocument, std::string("field '") + key + "' must be a non-negative integer", key);
  }
  return v.get<std::uint64_t>();
}

json scaler_json(const ScalingParams& s) { return {{"mean", point_json(s.mean)}, {"stddev", point_json(s.stddev)}}; }

ScalingParams scaler_from(const json& doc) {
  const json& s = require(doc, "scaler");
  ScalingParams out;
  out.mean = require_point(s, "mean");
  out.stddev = require_point(s, "stddev");
  return out;
}

json tree_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes) {
    if (const auto* leaf = std::get_if<TreeLeaf>(&node)) {
      nodes.push_back({{"counts", {leaf->class_counts[0], leaf->class_counts[1]}}});
    } else {
      const auto& split = std::get<TreeSplit>(node);
      nodes.push_back({{"feature", split.feature},
                       {"threshold", split.threshold},
                       {"left", split.left},
                       {"right", split.right}});
    }
  }
  return nodes;
}

DecisionTree tree_from(const json& nodes) {
  if (!nodes.is_array() || nodes.empty()) throw Error(ErrorCode::MalformedDocument, "tree must be a non-empty array");
  DecisionTree tree;
  const auto count = nodes.size();
  for (std::size_t i = 0; i < count; ++i) {
    const json& node = nodes[i];
    if (!node.is_object()) throw Error(ErrorCode::MalformedDocument, "tree node must be an object");
    if (node.contains("counts")) {
      const json& c = node["counts"];
      if (!c.is_array() || c.size() != 2 || !c[0].is_number_unsigned() || !c[1].is_number_unsigned()) {
        throw Error(ErrorCode::MalformedDocument, "leaf counts must be two non-negative integers", "counts");
      }
      TreeLeaf leaf{{c[0].get<std::uint32_t>(), c[1].get<std::uint32_t>()}};
      if (leaf.class_counts[0] + leaf.class_counts[1] == 0) {
        throw Error(ErrorCode::MalformedDocument, "leaf must hold at least one sample", "counts");
      }
      tree.nodes.emplace_back(leaf);
    } else {
      TreeSplit split;
      split.feature = require_count(node, "feature");
      split.threshold = require_number(node, "threshold");
      split.left = static_cast<std::uint32_t>(require_count(node, "left"));
      split.right = static_cast<std::uint32_t>(require_count(node, "right"));
      // children always follow their parent, which also rules out cycles
      if (split.feature >= kNumFeatures || split.left <= i || split.right <= i || split.left >= count ||
          split.right >= count) {
        throw Error(ErrorCode::MalformedDocument, "tree split references an invalid feature or child");
      }
      tree.nodes.emplace_back(split);
    }
  }
  return tree;
}

}  // namespace

std::string dump_canonical(const json& value, int indent) {
  std::string out;
  write_value(out, value, indent, 0);
  return out;
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("invalid JSON: ") + e.what());
  }
}

const json& require(const json& object, const char* key) {
  if (!object.is_object()) throw Error(ErrorCode::MalformedDocument, "expected a JSON object", key);
  auto it = object.find(key);
  if (it == object.end()) throw Error(ErrorCode::MalformedDocument, std::string("missing field '") + key + "'", key);
  return *it;
}

double require_number(const json& object, const char* key) {
  const json& v = require(object, key);
  if (!v.is_number()) throw Error(ErrorCode::MalformedDocument, std::string("field '") + key + "' must be a number", key);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::MalformedDocument, std::string("field '") + key + "' is not finite", key);
  return d;
}

json report_json(const EvalReport& report) {
  json roc = json::array();
  for (const auto& p : report.roc.points) {
    roc.push_back({{"fpr", p.fpr},
                   {"tpr", p.tpr},
                   {"threshold", std::isfinite(p.threshold) ? json(p.threshold) : json(nullptr)}});
  }
  return {
      {"kind", std::string(model_kind_id(report.kind))},
      {"confusion", {{"tp", report.confusion.tp}, {"tn", report.confusion.tn}, {"fp", report.confusion.fp}, {"fn", report.confusion.fn}}},
      {"accuracy", report.accuracy},
      {"precision", report.precision},
      {"recall", report.recall},
      {"f1", report.f1},
      {"auc", report.auc ? json(*report.auc) : json(nullptr)},
      {"roc", roc},
  };
}

EvalReport report_from(const json& doc) {
  EvalReport report;
  const json& kind = require(doc, "kind");
  if (!kind.is_string()) throw Error(ErrorCode::MalformedDocument, "field 'kind' must be a string", "kind");
  report.kind = parse_model_kind(kind.get<std::string>());
  const json& c = require(doc, "confusion");
  report.confusion = {require_count(c, "tp"), require_count(c, "tn"), require_count(c, "fp"), require_count(c, "fn")};
  auto unit = [&](const char* key) {
    const double v = require_number(doc, key);
    if (v < 0.0 || v > 1.0) throw Error(ErrorCode::MalformedDocument, std::string("field '") + key + "' outside [0, 1]", key);
    return v;
  };
  report.accuracy = unit("accuracy");
  report.precision = unit("precision");
  report.recall = unit("recall");
  report.f1 = unit("f1");
  if (!require(doc, "auc").is_null()) report.auc = unit("auc");
  const json& roc = require(doc, "roc");
  if (!roc.is_array()) throw Error(ErrorCode::MalformedDocument, "field 'roc' must be an array", "roc");
  for (const auto& p : roc) {
    RocPoint point;
    point.fpr = require_number(p, "fpr");
    point.tpr = require_number(p, "tpr");
    const json& t = require(p, "threshold");
    if (!t.is_null()) point.threshold = require_number(p, "threshold");
    report.roc.points.push_back(point);
  }
  return report;
}

json model_json(const FireModel& model) {
  json params;
  if (const auto* m = std::get_if<LogisticModel>(&model)) {
    params = {{"intercept", m->intercept}, {"coefficients", point_json(m->coefficients)}};
  } else if (const auto* m = std::get_if<ForestModel>(&model)) {
    json trees = json::array();
    for (const auto& tree : m->trees) trees.push_back(tree_json(tree));
    params = {{"n_trees", m->n_trees},
              {"feature_subset_size", m->feature_subset_size},
              {"seed", m->seed},
              {"trees", trees}};
  } else {
    const auto& svm = std::get<SvmModel>(model);
    params = {{"kernel", std::string(kernel_name(svm.kernel))},
              {"C", svm.C},
              {"bias", svm.bias},
              {"platt", {{"a", svm.platt_a}, {"b", svm.platt_b}}},
              {"converged", svm.converged}};
    if (svm.kernel == KernelType::Linear) {
      params["weights"] = point_json(svm.weights);
    } else {
      params["gamma"] = svm.gamma;
      json vectors = json::array();
      for (const auto& sv : svm.support_vectors) vectors.push_back(point_json(sv));
      params["support_vectors"] = vectors;
      params["dual_coef"] = svm.dual_coef;
    }
  }
  return {{"format_version", kModelFormatVersion},
          {"kind", std::string(model_kind_id(kind_of(model)))},
          {"scaler", scaler_json(scaler_of(model))},
          {"parameters", params}};
}

FireModel model_from(const json& doc) {
  const json& version = require(doc, "format_version");
  if (!version.is_number_integer()) {
    throw Error(ErrorCode::MalformedDocument, "format_version must be an integer", "format_version");
  }
  if (version.get<std::int64_t>() != kModelFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                "unsupported model format_version " + std::to_string(version.get<std::int64_t>()), "format_version");
  }
  const json& kind_field = require(doc, "kind");
  if (!kind_field.is_string()) throw Error(ErrorCode::MalformedDocument, "field 'kind' must be a string", "kind");
  const ModelKind kind = parse_model_kind(kind_field.get<std::string>());
  const ScalingParams scaler = scaler_from(doc);
  const json& params = require(doc, "parameters");

  switch (kind) {
    case ModelKind::LogisticRegression: {
      LogisticModel m;
      m.scaler = scaler;
      m.intercept = require_number(params, "intercept");
      m.coefficients = require_point(params, "coefficients");
      return m;
    }
    case ModelKind::RandomForest: {
      ForestModel m;
      m.scaler = scaler;
      m.n_trees = static_cast<int>(require_count(params, "n_trees"));
      m.feature_subset_size = static_cast<int>(require_count(params, "feature_subset_size"));
      m.seed = require_count(params, "seed");
      const json& trees = require(params, "trees");
      if (!trees.is_array()) throw Error(ErrorCode::MalformedDocument, "field 'trees' must be an array", "trees");
      for (const auto& t : trees) m.trees.push_back(tree_from(t));
      if (m.n_trees < 1 || m.trees.size() != static_cast<std::size_t>(m.n_trees)) {
        throw Error(ErrorCode::MalformedDocument, "n_trees does not match the stored trees", "n_trees");
      }
      return m;
    }
    case ModelKind::Svm: {
      SvmModel m;
      m.scaler = scaler;
      const json& kernel = require(params, "kernel");
      if (!kernel.is_string()) throw Error(ErrorCode::MalformedDocument, "field 'kernel' must be a string", "kernel");
      const auto kernel_text = kernel.get<std::string>();
      if (kernel_text == "linear") m.kernel = KernelType::Linear;
      else if (kernel_text == "rbf") m.kernel = KernelType::Rbf;
      else throw Error(ErrorCode::MalformedDocument, "unsupported kernel '" + kernel_text + "'", "kernel");
      m.C = require_number(params, "C");
      m.bias = require_number(params, "bias");
      const json& platt = require(params, "platt");
      m.platt_a = require_number(platt, "a");
      m.platt_b = require_number(platt, "b");
      const json& converged = require(params, "converged");
      if (!converged.is_boolean()) throw Error(ErrorCode::MalformedDocument, "field 'converged' must be a boolean", "converged");
      m.converged = converged.get<bool>();
      if (m.kernel == KernelType::Linear) {
        m.weights = require_point(params, "weights");
      } else if (m.kernel == KernelType::Rbf) {
        m.gamma = require_number(params, "gamma");
        const json& vectors = require(params, "support_vectors");
        const json& coef = require(params, "dual_coef");
        if (!vectors.is_array() || !coef.is_array() || vectors.size() != coef.size()) {
          throw Error(ErrorCode::MalformedDocument, "support_vectors and dual_coef must be arrays of equal length");
        }
        for (std::size_t i = 0; i < vectors.size(); ++i) {
          json wrapper = {{"v", vectors[i]}, {"c", coef[i]}};
          m.support_vectors.push_back(require_point(wrapper, "v"));
          const double c = require_number(wrapper, "c");
          if (std::abs(c) > m.C * (1.0 + 1e-12)) {
            throw Error(ErrorCode::MalformedDocument, "dual coefficient exceeds C", "dual_coef");
          }
          m.dual_coef.push_back(c);
        }
      } else {
        throw Error(ErrorCode::NotImplemented, "polynomial kernel is not implemented", "kernel");
      }
      return m;
    }
  }
  throw Error(ErrorCode::MalformedDocument, "unknown model kind", "kind");
}

}  // namespace greenshield::detail

namespace greenshield {

std::string model_to_json(const FireModel& model) { return detail::dump_canonical(detail::model_json(model)); }

FireModel model_from_json(const std::string& text) {
  try {
    return detail::model_from(detail::parse_document(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const FireModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

FireModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return model_from_json(text.str());
}

std::string content_version(const std::string& text) {
  // 64-bit FNV-1a
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

}  // namespace greenshield
