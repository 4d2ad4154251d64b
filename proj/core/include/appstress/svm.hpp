#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace appstress {

/// Kernel families, declared in increasing order of model complexity; grid
/// search breaks accuracy ties toward the front of this list.
enum class KernelKind { Linear, Polynomial, Rbf };

std::string_view to_string(KernelKind kind);
std::optional<KernelKind> parse_kernel_kind(std::string_view name);

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  double gamma = 1.0;  // Rbf only
  int degree = 3;      // Polynomial only
  double coef0 = 1.0;  // Polynomial only

  static KernelSpec linear() { return {}; }
  static KernelSpec rbf(double gamma) { return {KernelKind::Rbf, gamma, 3, 1.0}; }
  static KernelSpec polynomial(int degree, double coef0 = 1.0) {
    return {KernelKind::Polynomial, 1.0, degree, coef0};
  }

  /// Raises invalid-argument for gamma <= 0 or degree < 1.
  void validate() const;
  /// "linear", "rbf(gamma=0.1)", "poly(degree=2,coef0=1)".
  std::string describe() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Linear: <x,y>. Rbf: exp(-gamma |x-y|^2). Polynomial: (<x,y> + coef0)^degree.
double kernel_eval(const KernelSpec& kernel, std::span<const double> x, std::span<const double> y);

struct SvmParams {
  double c = 1.0;          // soft-margin constant
  double kkt_tol = 1e-3;   // KKT tolerance the returned model satisfies when converged
  int max_passes = 100;    // full sweeps over the training set
  double eps = 1e-8;       // alpha threshold for bounds and the support set

  void validate() const;
};

/// Feature rows with integer class labels.
struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t size() const noexcept { return y.size(); }
  bool empty() const noexcept { return y.empty(); }
  std::size_t dim() const noexcept { return x.empty() ? 0 : x.front().size(); }
  void add(std::vector<double> row, int label) {
    x.push_back(std::move(row));
    y.push_back(label);
  }
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Per-dimension z-score transform. Standard deviations are population
/// values floored at 1e-12.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> sd;

  static Scaler fit(std::span<const std::vector<double>> rows);
  std::vector<double> apply(std::span<const double> row) const;
  std::size_t dim() const noexcept { return mean.size(); }

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

/// Raw dual solution over every training point.
struct DualSolution {
  std::vector<double> alphas;
  double bias = 0.0;
  bool converged = false;
  int passes = 0;
};

/// SMO on the points exactly as given (no scaling). `labels` are +1/-1.
/// Deterministic: sweeps visit indices in ascending order and ties in the
/// second-choice heuristic go to the lowest index.
DualSolution solve_dual(std::span<const std::vector<double>> points, std::span<const int> labels,
                        const KernelSpec& kernel, const SvmParams& params);

/// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K(x_i, x_j)
double dual_objective(std::span<const std::vector<double>> points, std::span<const int> labels,
                      std::span<const double> alphas, const KernelSpec& kernel);

struct BinarySvmModel {
  KernelSpec kernel;
  double c = 1.0;
  Scaler scaler;
  std::vector<std::vector<double>> support_points;  // already scaled
  std::vector<double> support_alphas;
  std::vector<int> support_labels;
  std::vector<std::size_t> support_indices;  // positions in the training set
  double bias = 0.0;
  bool converged = true;
  int passes = 0;

  std::size_t dim() const noexcept { return scaler.dim(); }

  friend bool operator==(const BinarySvmModel&, const BinarySvmModel&) = default;
};

/// Standardizes the data, runs SMO, and keeps the points with alpha > eps.
/// Raises degenerate-labels when only one class is present and
/// invalid-argument for labels other than +1/-1, ragged or non-finite rows,
/// or bad parameters. A run that exhausts max_passes returns a model with
/// `converged == false`.
BinarySvmModel solve_smo(std::span<const std::vector<double>> points, std::span<const int> labels,
                         const KernelSpec& kernel, const SvmParams& params);

/// sum_i alpha_i y_i K(sv_i, scale(x)) + bias
double decision_value(const BinarySvmModel& model, std::span<const double> x);

/// Dual objective of the stored support set.
double dual_objective(const BinarySvmModel& model);

/// Worst-case violations of the dual constraints and optimality conditions
/// of a model against its training set.
struct KktReport {
  double box_violation = 0.0;       // max over i of distance of alpha_i outside [0, C]
  double equality_residual = 0.0;   // |sum alpha_i y_i|
  double kkt_violation = 0.0;       // worst margin-condition breach
  std::size_t points = 0;

  bool satisfied(double kkt_tol, double equality_tol) const {
    return box_violation <= 0.0 && equality_residual <= equality_tol && kkt_violation <= kkt_tol;
  }
  void merge(const KktReport& other);
};

KktReport check_kkt(const BinarySvmModel& model, std::span<const std::vector<double>> points,
                    std::span<const int> labels);

/// One-vs-one ensemble. For the pair (a, b) with a < b, class a takes the
/// +1 role. A model with a single class and no pairs always predicts it.
struct MulticlassModel {
  std::vector<int> classes;
  std::map<std::pair<int, int>, BinarySvmModel> pairwise;

  static MulticlassModel constant(int label) { return {{label}, {}}; }
  bool is_constant() const noexcept { return pairwise.empty(); }
  bool converged() const;

  friend bool operator==(const MulticlassModel&, const MulticlassModel&) = default;
};

/// Trains one binary model per class pair on that pair's rows only.
/// Raises degenerate-labels when fewer than two classes are present.
MulticlassModel train_multiclass(const Dataset& data, const KernelSpec& kernel, const SvmParams& params);

/// Majority vote; ties go to the class with the larger summed
/// |decision value| over every pairwise model it takes part in, then to the
/// smaller label.
int predict_multiclass(const MulticlassModel& model, std::span<const double> x);

/// KKT report merged over every pairwise model.
KktReport check_kkt(const MulticlassModel& model, const Dataset& data);

/// Most frequent label; ties go to the smaller label.
int majority_label(std::span<const int> labels);

// JSON documents; doubles are written in shortest round-trip form, so a
// reload compares equal to the original.
std::string serialize_model(const BinarySvmModel& model);
std::string serialize_model(const MulticlassModel& model);
BinarySvmModel deserialize_binary_model(std::string_view text);
MulticlassModel deserialize_multiclass_model(std::string_view text);

}  // namespace appstress
