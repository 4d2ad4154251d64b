#include <nlohmann/json.hpp>

#include "appstress/error.hpp"
#include "appstress/svm.hpp"

namespace appstress {

namespace {

using nlohmann::json;

constexpr std::string_view kModule = "svm";
constexpr std::string_view kBinaryFormat = "appstress.binary_svm";
constexpr std::string_view kMulticlassFormat = "appstress.multiclass_svm";
constexpr int kVersion = 1;

json kernel_to_json(const KernelSpec& k) {
  return {{"kind", to_string(k.kind)}, {"gamma", k.gamma}, {"degree", k.degree}, {"coef0", k.coef0}};
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec k;
  const auto kind = parse_kernel_kind(j.at("kind").get<std::string>());
  if (!kind) raise(ErrorKind::Schema, kModule, "unknown kernel kind");
  k.kind = *kind;
  k.gamma = j.at("gamma").get<double>();
  k.degree = j.at("degree").get<int>();
  k.coef0 = j.at("coef0").get<double>();
  k.validate();
  return k;
}

json binary_to_json(const BinarySvmModel& m) {
  json support = json::array();
  for (std::size_t i = 0; i < m.support_points.size(); ++i) {
    support.push_back({{"index", m.support_indices[i]},
                       {"alpha", m.support_alphas[i]},
                       {"label", m.support_labels[i]},
                       {"point", m.support_points[i]}});
  }
  return {{"format", kBinaryFormat},
          {"version", kVersion},
          {"kernel", kernel_to_json(m.kernel)},
          {"c", m.c},
          {"scaler", {{"mean", m.scaler.mean}, {"sd", m.scaler.sd}}},
          {"support", std::move(support)},
          {"bias", m.bias},
          {"converged", m.converged},
          {"passes", m.passes}};
}

void expect_format(const json& j, std::string_view format) {
  if (!j.is_object() || j.value("format", std::string{}) != format) {
    raise(ErrorKind::Schema, kModule, "expected a '" + std::string(format) + "' document");
  }
  if (j.value("version", 0) != kVersion) raise(ErrorKind::Schema, kModule, "unsupported model version");
}

BinarySvmModel binary_from_json(const json& j) {
  expect_format(j, kBinaryFormat);
  BinarySvmModel m;
  m.kernel = kernel_from_json(j.at("kernel"));
  m.c = j.at("c").get<double>();
  m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
  m.scaler.sd = j.at("scaler").at("sd").get<std::vector<double>>();
  if (m.scaler.mean.size() != m.scaler.sd.size()) raise(ErrorKind::Schema, kModule, "scaler size mismatch");
  for (const auto& s : j.at("support")) {
    m.support_indices.push_back(s.at("index").get<std::size_t>());
    m.support_alphas.push_back(s.at("alpha").get<double>());
    m.support_labels.push_back(s.at("label").get<int>());
    m.support_points.push_back(s.at("point").get<std::vector<double>>());
    if (m.support_points.back().size() != m.scaler.dim()) {
      raise(ErrorKind::Schema, kModule, "support point dimension mismatch");
    }
  }
  m.bias = j.at("bias").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.passes = j.at("passes").get<int>();
  return m;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    raise(ErrorKind::Schema, kModule, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace

std::string serialize_model(const BinarySvmModel& model) { return binary_to_json(model).dump(2) + "\n"; }

std::string serialize_model(const MulticlassModel& model) {
  json pairs = json::array();
  for (const auto& [pair, binary] : model.pairwise) {
    pairs.push_back({{"positive", pair.first}, {"negative", pair.second}, {"model", binary_to_json(binary)}});
  }
  const json doc = {{"format", kMulticlassFormat},
                    {"version", kVersion},
                    {"classes", model.classes},
                    {"pairwise", std::move(pairs)}};
  return doc.dump(2) + "\n";
}

BinarySvmModel deserialize_binary_model(std::string_view text) {
  return guarded([&] { return binary_from_json(json::parse(text)); });
}

MulticlassModel deserialize_multiclass_model(std::string_view text) {
  return guarded([&] {
    const json doc = json::parse(text);
    expect_format(doc, kMulticlassFormat);
    MulticlassModel m;
    m.classes = doc.at("classes").get<std::vector<int>>();
    if (m.classes.empty()) raise(ErrorKind::Schema, kModule, "model lists no classes");
    for (const auto& p : doc.at("pairwise")) {
      m.pairwise.emplace(std::pair{p.at("positive").get<int>(), p.at("negative").get<int>()},
                         binary_from_json(p.at("model")));
    }
    return m;
  });
}

}  // namespace appstress
