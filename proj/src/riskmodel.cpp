#include "eqlab/riskmodel.hpp"

#include <algorithm>
#include <cmath>

#include "eqlab/error.hpp"
#include "eqlab/io.hpp"
#include "eqlab/rng.hpp"

namespace eqlab {
namespace {

constexpr std::uint64_t kProxyDomain = 0x70726f78796c6162ULL;  // "proxylab"
constexpr int kMaxHalvings = 60;
constexpr double kStepTolerance = 1e-6;

constexpr double kMinCurvature = 1e-13;

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// softplus(z + d) - softplus(z), accurate when d is tiny.
double softplus_change(double z, double d) {
  if (z > 30.0 || z + d > 30.0) return softplus(z + d) - softplus(z);
  return std::log1p(sigmoid(z) * std::expm1(d));
}

// Change in the penalized log-likelihood for beta -> beta + delta, summed
// term by term so gains far below the objective's rounding level still
// register near the optimum.
double objective_change(const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                        const Eigen::VectorXd& delta_eta, const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& delta, double ridge) {
  double change = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    change += y(i) * delta_eta(i) - softplus_change(eta(i), delta_eta(i));
  }
  const auto b = beta.tail(beta.size() - 1);
  const auto d = delta.tail(delta.size() - 1);
  return change - 0.5 * ridge * (2.0 * b.dot(d) + d.squaredNorm());
}

}  // namespace

std::string_view to_string(LabelKind kind) {
  return kind == LabelKind::True ? "true" : "proxy";
}

LabelKind label_kind_from_string(std::string_view text) {
  if (text == "true") return LabelKind::True;
  if (text == "proxy") return LabelKind::Proxy;
  throw ValidationError("label kind must be 'true' or 'proxy', got '" +
                        std::string(text) + "'");
}

FeatureSet parse_feature_list(std::string_view list) {
  FeatureSet fs{false, false, false, "White"};
  if (list.empty() || list == "none") return fs;
  for (const auto name : io::split_csv_line(list)) {
    if (name == "age") {
      fs.use_age = true;
    } else if (name == "bmi") {
      fs.use_bmi = true;
    } else if (name == "group") {
      fs.use_group = true;
    } else {
      throw ValidationError("unknown feature '" + std::string(name) +
                            "' (expected age, bmi, group)");
    }
  }
  return fs;
}

Design build_design(const Dataset& data, const FeatureSet& features, LabelKind kind) {
  if (data.empty()) throw EmptyDatasetError("cannot fit a model to an empty dataset");

  Design design;
  std::vector<int> indicator_of(data.groups().size(), -1);
  if (features.use_group) {
    if (!data.groups().find(features.reference_group)) {
      throw EncodingError("reference group '" + features.reference_group +
                          "' is not declared by the dataset");
    }
    for (std::size_t g = 0; g < data.groups().size(); ++g) {
      const auto& label = data.groups().labels()[g];
      if (label == features.reference_group) continue;
      indicator_of[g] = static_cast<int>(design.group_columns.size());
      design.group_columns.push_back(label);
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index group_offset =
      1 + (features.use_age ? 1 : 0) + (features.use_bmi ? 1 : 0);
  const Eigen::Index k = group_offset + static_cast<Eigen::Index>(design.group_columns.size());
  design.x = Eigen::MatrixXd::Zero(n, k);
  design.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Person& p = data.persons()[static_cast<std::size_t>(i)];
    Eigen::Index col = 0;
    design.x(i, col++) = 1.0;
    if (features.use_age) design.x(i, col++) = standardized_age(p.age);
    if (features.use_bmi) design.x(i, col++) = standardized_bmi(p.bmi);
    const int indicator = indicator_of[index(p.group)];
    if (indicator >= 0) design.x(i, group_offset + indicator) = 1.0;
    const bool label = kind == LabelKind::True ? p.diabetes : p.doctor_diagnosis;
    design.y(i) = label ? 1.0 : 0.0;
  }
  return design;
}

double penalized_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
  const double penalty = beta.tail(beta.size() - 1).squaredNorm();
  return ll - 0.5 * ridge * penalty;
}

Eigen::VectorXd penalized_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd residual(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) residual(i) = y(i) - sigmoid(eta(i));
  Eigen::VectorXd grad = x.transpose() * residual;
  grad.tail(grad.size() - 1) -= ridge * beta.tail(beta.size() - 1);
  return grad;
}

FittedModel fit_logistic(const Dataset& data, const FeatureSet& features,
                         LabelKind kind, const FitOptions& options) {
  if (!(options.ridge_penalty >= 0.0)) throw ValidationError("ridge penalty must be >= 0");
  const Design design = build_design(data, features, kind);
  const Eigen::MatrixXd& x = design.x;
  const Eigen::VectorXd& y = design.y;
  const Eigen::Index k = x.cols();
  const double ridge = options.ridge_penalty;

  FittedModel model;
  model.feature_set = features;
  model.label_kind = kind;
  model.group_columns = design.group_columns;
  model.ridge_penalty = ridge;

  // Start from the base-rate intercept, clamped away from 0 and 1.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  const double n = static_cast<double>(y.size());
  const double base_rate = std::clamp(y.sum() / n, 0.5 / n, 1.0 - 0.5 / n);
  beta(0) = logit(base_rate);

  double objective = penalized_log_likelihood(x, y, beta, ridge);
  model.objective_trace.push_back(objective);
  Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd grad = penalized_gradient(x, y, beta, ridge);

  // Converged once the gradient is below tolerance and the Newton step has
  // collapsed; a separable fit keeps taking unit-size steps toward infinity
  // until its curvature underflows.
  int iteration = 0;
  bool converged = false;
  while (true) {
    Eigen::VectorXd weights(x.rows());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double p = sigmoid(eta(i));
      weights(i) = p * (1.0 - p);
    }
    Eigen::MatrixXd information = x.transpose() * weights.asDiagonal() * x;
    for (Eigen::Index j = 1; j < k; ++j) information(j, j) += ridge;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(information);
    const double curvature = ldlt.vectorD().minCoeff();
    if (ldlt.info() != Eigen::Success ||
        !(curvature > kMinCurvature * std::max(1.0, ldlt.vectorD().maxCoeff()))) {
      break;
    }
    const Eigen::VectorXd step = ldlt.solve(grad);

    if (grad.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance &&
        step.allFinite() && step.lpNorm<Eigen::Infinity>() <= kStepTolerance) {
      converged = true;
      break;
    }
    if (iteration >= options.max_iterations) break;
    ++iteration;

    double scale = 1.0;
    bool improved = false;
    for (int h = 0; h <= kMaxHalvings && step.allFinite(); ++h, scale *= 0.5) {
      const Eigen::VectorXd delta = scale * step;
      const Eigen::VectorXd delta_eta = x * delta;
      const double gain = objective_change(y, eta, delta_eta, beta, delta, ridge);
      if (gain >= 0.0) {
        beta += delta;
        eta += delta_eta;
        objective += gain;
        improved = true;
        break;
      }
    }
    if (!improved) break;
    model.objective_trace.push_back(objective);
    grad = penalized_gradient(x, y, beta, ridge);
  }

  model.coefficients.assign(beta.data(), beta.data() + beta.size());
  model.gradient_max_norm = grad.lpNorm<Eigen::Infinity>();
  model.converged = converged;
  model.iterations = iteration;
  return model;
}

double predict(const FittedModel& model, std::string_view group, double age, double bmi) {
  const auto& fs = model.feature_set;
  const auto& b = model.coefficients;
  std::size_t col = 0;
  double eta = b.at(col++);
  if (fs.use_age) eta += b.at(col++) * standardized_age(age);
  if (fs.use_bmi) eta += b.at(col++) * standardized_bmi(bmi);
  if (fs.use_group && group != fs.reference_group) {
    auto it = std::find(model.group_columns.begin(), model.group_columns.end(), group);
    if (it == model.group_columns.end()) {
      throw EncodingError("group '" + std::string(group) + "' is unknown to the model encoding");
    }
    eta += b.at(col + static_cast<std::size_t>(it - model.group_columns.begin()));
  }
  return sigmoid(eta);
}

double predict(const FittedModel& model, const Dataset& data, const Person& person) {
  return predict(model, data.groups().label(person.group), person.age, person.bmi);
}

std::vector<double> predict_all(const FittedModel& model, const Dataset& data) {
  std::vector<double> scores;
  scores.reserve(data.size());
  for (const auto& p : data.persons()) scores.push_back(predict(model, data, p));
  return scores;
}

Dataset apply_proxy_labels(const Dataset& data, const std::map<std::string, double>& detection,
                           std::uint64_t seed) {
  for (const auto& [label, d] : detection) {
    if (!data.groups().find(label)) {
      throw EncodingError("detection probability given for unknown group '" + label + "'");
    }
    if (!(d >= 0.0 && d <= 1.0)) {
      throw ValidationError("detection probability for " + label + " must be in [0,1]");
    }
  }
  const auto counts = data.group_counts();
  std::vector<double> by_group(data.groups().size(), 0.0);
  for (std::size_t g = 0; g < by_group.size(); ++g) {
    const auto& label = data.groups().labels()[g];
    auto it = detection.find(label);
    if (it == detection.end()) {
      if (counts[g] > 0) throw EncodingError("no detection probability for group '" + label + "'");
      continue;
    }
    by_group[g] = it->second;
  }

  std::vector<Person> persons = data.persons();
  for (auto& p : persons) {
    CounterStream rng(seed, kProxyDomain, index(p.group), static_cast<std::uint64_t>(p.id));
    const bool detected = rng.bernoulli(by_group[index(p.group)]);
    p.doctor_diagnosis = p.diabetes && detected;
  }
  return Dataset(data.groups(), std::move(persons), data.provenance());
}

// ---------------------------------------------------------------- JSON

nlohmann::json model_to_json(const FittedModel& model) {
  nlohmann::json fs;
  fs["use_age"] = model.feature_set.use_age;
  fs["use_bmi"] = model.feature_set.use_bmi;
  fs["use_group"] = model.feature_set.use_group;
  fs["reference_group"] = model.feature_set.reference_group;
  fs["group_columns"] = model.group_columns;
  nlohmann::json j;
  j["feature_set"] = fs;
  j["label_kind"] = to_string(model.label_kind);
  j["coefficients"] = model.coefficients;
  j["ridge_penalty"] = model.ridge_penalty;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  return j;
}

FittedModel model_from_json(const nlohmann::json& j) {
  FittedModel model;
  try {
    const auto& fs = j.at("feature_set");
    model.feature_set.use_age = fs.at("use_age").get<bool>();
    model.feature_set.use_bmi = fs.at("use_bmi").get<bool>();
    model.feature_set.use_group = fs.at("use_group").get<bool>();
    model.feature_set.reference_group = fs.value("reference_group", std::string("White"));
    model.group_columns = fs.value("group_columns", std::vector<std::string>{});
    model.label_kind = label_kind_from_string(j.at("label_kind").get<std::string>());
    model.coefficients = j.at("coefficients").get<std::vector<double>>();
    model.ridge_penalty = j.at("ridge_penalty").get<double>();
    model.converged = j.at("converged").get<bool>();
    model.iterations = j.at("iterations").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model file: ") + e.what());
  }
  const std::size_t expected = 1 + (model.feature_set.use_age ? 1 : 0) +
                               (model.feature_set.use_bmi ? 1 : 0) +
                               (model.feature_set.use_group ? model.group_columns.size() : 0);
  if (model.coefficients.size() != expected) {
    throw SchemaError("model file: expected " + std::to_string(expected) +
                      " coefficients, found " + std::to_string(model.coefficients.size()));
  }
  return model;
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, model_to_json(model).dump(2) + "\n");
}

FittedModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace eqlab
