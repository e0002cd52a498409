#include "greenshield/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "greenshield/error.hpp"
#include "greenshield/random.hpp"
#include "greenshield/serialization.hpp"
#include "json_io.hpp"

namespace greenshield {
namespace {

double tenth(double v) { return std::round(v * 10.0) / 10.0; }

double draw(Rng& rng, GaussianFeature g, FeatureBounds bounds) {
  return std::clamp(tenth(rng.normal(g.mean, g.sd)), bounds.lo, bounds.hi);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text << '\n';
}

}  // namespace

std::vector<RawRecord> generate_dataset(std::size_t n, std::uint64_t seed) {
  if (n < kMinGeneratedRows) {
    throw Error(ErrorCode::InvalidN, "n must be at least " + std::to_string(kMinGeneratedRows));
  }
  Rng rng(seed);
  std::vector<int> labels(n, kNotFire);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>((n + 1) / 2), kFire);
  rng.shuffle(std::span<int>(labels));

  std::vector<RawRecord> rows;
  rows.reserve(n);
  for (int label : labels) {
    const ClassCluster& c = label == kFire ? kFireCluster : kNotFireCluster;
    const bool fire = label == kFire;
    RawRecord r;
    r.label = label;
    r.day = static_cast<double>(1 + rng.index(30));
    r.mon = static_cast<double>(6 + rng.index(4));
    r.yr = 2012;
    r.temp = draw(rng, c.temp, kTempBounds);
    r.rh = draw(rng, c.rh, kPercentBounds);
    r.oxy = draw(rng, c.oxy, kPercentBounds);
    // Pass-through columns: plausible magnitudes, loosely class dependent.
    r.ws = std::max(0.0, tenth(rng.normal(15.0, 3.0)));
    r.rain = fire ? 0.0 : std::max(0.0, tenth(rng.normal(0.5, 1.0)));
    r.ffmc = std::clamp(tenth(rng.normal(fire ? 85.0 : 60.0, 8.0)), 0.0, 101.0);
    r.dmc = std::max(0.0, tenth(rng.normal(fire ? 18.0 : 6.0, 5.0)));
    r.dc = std::max(0.0, tenth(rng.normal(fire ? 60.0 : 20.0, 20.0)));
    r.isi = std::max(0.0, tenth(rng.normal(fire ? 6.0 : 1.5, 2.0)));
    r.bui = std::max(0.0, tenth(rng.normal(fire ? 20.0 : 7.0, 6.0)));
    r.fwi = std::max(0.0, tenth(rng.normal(fire ? 9.0 : 1.0, 3.0)));
    rows.push_back(r);
  }
  return rows;
}

SplitResult prepare_dataset(std::span<const RawRecord> raw, std::uint64_t seed) {
  if (raw.empty()) throw Error(ErrorCode::EmptyInput, "dataset has no rows");
  const auto imputed = impute_missing(raw);
  const auto cleaned = remove_outliers(imputed);
  const auto samples = select_features(cleaned);
  return split(samples, seed);
}

FireModel TrainedModels::model(ModelKind kind) const {
  switch (kind) {
    case ModelKind::LogisticRegression: return logreg;
    case ModelKind::RandomForest: return forest;
    case ModelKind::Svm: return svm;
  }
  return svm;
}

TrainedModels train_all(const SplitResult& split, const TrainConfig& cfg) {
  require_both_classes(split.train);
  TrainedModels out;
  out.logreg = logreg_train(split.train, cfg);
  out.forest = forest_train(split.train, cfg);
  out.svm = svm_train(split.train, cfg);
  out.reports = {evaluate(out.logreg, split.test), evaluate(out.forest, split.test), evaluate(out.svm, split.test)};
  out.selected = select_model(out.reports);
  return out;
}

void write_training_outputs(const TrainedModels& trained, const std::filesystem::path& dir,
                            const std::string& trained_at) {
  std::filesystem::create_directories(dir);
  detail::json reports = detail::json::object();
  std::string selected_version;
  for (ModelKind kind : {ModelKind::LogisticRegression, ModelKind::RandomForest, ModelKind::Svm}) {
    const std::string id(model_kind_id(kind));
    const std::string text = model_to_json(trained.model(kind));
    write_file(dir / (id + ".json"), text);
    if (kind == trained.selected) selected_version = content_version(text);
  }
  for (const auto& report : trained.reports) {
    reports[std::string(model_kind_id(report.kind))] = detail::report_json(report);
  }
  const std::string selected_id(model_kind_id(trained.selected));
  const detail::json doc = {{"selected", selected_id},
                            {"model_file", selected_id + ".json"},
                            {"version", selected_version},
                            {"trained_at", trained_at},
                            {"reports", reports}};
  write_file(dir / "selected.json", detail::dump_canonical(doc, 2));
}

}  // namespace greenshield
