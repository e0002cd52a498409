#include <algorithm>

#include "greenshield/error.hpp"
#include "greenshield/models.hpp"

namespace greenshield {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view model_kind_id(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogisticRegression: return "logreg";
    case ModelKind::RandomForest: return "forest";
    case ModelKind::Svm: return "svm";
  }
  return "unknown";
}

std::string_view model_kind_display(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogisticRegression: return "Logistic Regression";
    case ModelKind::RandomForest: return "Random Forest";
    case ModelKind::Svm: return "Support Vector";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view id) {
  if (id == "logreg") return ModelKind::LogisticRegression;
  if (id == "forest") return ModelKind::RandomForest;
  if (id == "svm") return ModelKind::Svm;
  throw Error(ErrorCode::MalformedDocument, "unknown model kind '" + std::string(id) + "'", "kind");
}

std::string_view kernel_name(KernelType kernel) {
  switch (kernel) {
    case KernelType::Linear: return "linear";
    case KernelType::Rbf: return "rbf";
    case KernelType::Polynomial: return "poly";
  }
  return "unknown";
}

KernelType parse_kernel(std::string_view name) {
  if (name == "linear") return KernelType::Linear;
  if (name == "rbf") return KernelType::Rbf;
  if (name == "poly" || name == "polynomial") return KernelType::Polynomial;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(name) + "'", "kernel");
}

ModelKind kind_of(const FireModel& m) {
  return std::visit(Overloaded{
                        [](const LogisticModel&) { return ModelKind::LogisticRegression; },
                        [](const ForestModel&) { return ModelKind::RandomForest; },
                        [](const SvmModel&) { return ModelKind::Svm; },
                    },
                    m);
}

const ScalingParams& scaler_of(const FireModel& m) {
  return std::visit([](const auto& model) -> const ScalingParams& { return model.scaler; }, m);
}

double predict_probability(const FireModel& m, const FeatureVector& x) {
  const double p = std::visit(
      Overloaded{
          [&](const LogisticModel& model) { return logreg_predict_proba(model, x); },
          [&](const ForestModel& model) { return forest_predict(model, x).probability; },
          [&](const SvmModel& model) { return platt_probability(model, svm_decision(model, x)); },
      },
      m);
  return std::clamp(p, 0.0, 1.0);
}

int predict_label(const FireModel& m, const FeatureVector& x) {
  return std::visit(
      Overloaded{
          [&](const LogisticModel& model) { return logreg_predict_proba(model, x) >= 0.5 ? kFire : kNotFire; },
          [&](const ForestModel& model) { return forest_predict(model, x).label; },
          [&](const SvmModel& model) { return svm_label(svm_decision(model, x)); },
      },
      m);
}

void require_both_classes(std::span<const LabeledSample> samples) {
  const bool has_fire = std::any_of(samples.begin(), samples.end(), [](const auto& s) { return s.label == kFire; });
  const bool has_not_fire =
      std::any_of(samples.begin(), samples.end(), [](const auto& s) { return s.label == kNotFire; });
  if (!has_fire || !has_not_fire) {
    throw Error(ErrorCode::SingleClassInput, "training data must contain both fire and not-fire samples");
  }
}

}  // namespace greenshield
