#include "appstress/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "appstress/error.hpp"

namespace appstress {

namespace {

constexpr std::string_view kModule = "svm";

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void check_rows(std::span<const std::vector<double>> points, std::size_t label_count) {
  if (points.size() != label_count) {
    raise(ErrorKind::InvalidArgument, kModule, "point and label counts differ");
  }
  if (points.empty()) raise(ErrorKind::InvalidArgument, kModule, "empty training set");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) raise(ErrorKind::InvalidArgument, kModule, "ragged feature rows");
    for (const double v : p) {
      if (!std::isfinite(v)) raise(ErrorKind::InvalidArgument, kModule, "non-finite feature value");
    }
  }
}

void check_binary_labels(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (const int y : labels) {
    if (y == 1) {
      pos = true;
    } else if (y == -1) {
      neg = true;
    } else {
      raise(ErrorKind::InvalidArgument, kModule, "binary labels must be +1 or -1");
    }
  }
  if (!pos || !neg) raise(ErrorKind::DegenerateLabels, kModule, "training data holds a single class");
}

// Platt's SMO with a dense Gram matrix and an error cache over every point.
class SmoSolver {
 public:
  SmoSolver(std::span<const std::vector<double>> points, std::span<const int> labels, const KernelSpec& kernel,
            const SvmParams& params)
      : n_(points.size()), c_(params.c), eps_(params.eps), params_(params), y_(labels.begin(), labels.end()),
        alpha_(n_, 0.0), error_(n_), gram_(n_ * n_), diag_(n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i; j < n_; ++j) {
        const double k = kernel_eval(kernel, points[i], points[j]);
        gram_[i * n_ + j] = k;
        gram_[j * n_ + i] = k;
      }
    }
    for (std::size_t i = 0; i < n_; ++i) diag_[i] = gram_[i * n_ + i];
    // alpha = 0, b = 0  =>  f = 0  =>  E_i = -y_i
    for (std::size_t i = 0; i < n_; ++i) error_[i] = -static_cast<double>(y_[i]);
  }

  DualSolution run() {
    // The examine loop tests KKT conditions against the running threshold.
    // The returned bias is recomputed afterwards, which can shift margins by
    // up to the loop tolerance, so the loop starts at half the target and
    // tightens until the final model meets kkt_tol.
    tol_ = 0.5 * params_.kkt_tol;
    int full_sweeps = 0;
    bool converged = false;
    while (true) {
      converged = sweep_until_stable(full_sweeps);
      if (!converged) break;
      if (final_violation(final_bias()) <= params_.kkt_tol || tol_ < 1e-12) break;
      tol_ *= 0.25;
    }
    return {alpha_, final_bias(), converged, full_sweeps};
  }

 private:
  double k(std::size_t i, std::size_t j) const { return gram_[i * n_ + j]; }
  bool at_lower(double a) const { return a <= eps_; }
  bool at_upper(double a) const { return a >= c_ - eps_; }
  bool non_bound(std::size_t i) const { return !at_lower(alpha_[i]) && !at_upper(alpha_[i]); }

  // Alternates full sweeps with sweeps over non-bound points. Returns true
  // once a full sweep changes nothing.
  bool sweep_until_stable(int& full_sweeps) {
    bool examine_all = true;
    std::size_t bound_sweeps = 0;
    const std::size_t bound_sweep_cap = std::max<std::size_t>(100, 10 * n_);
    while (true) {
      int changed = 0;
      if (examine_all) {
        ++full_sweeps;
        for (std::size_t i = 0; i < n_; ++i) changed += examine(i);
        if (changed == 0) return true;
        if (full_sweeps >= params_.max_passes) return false;
        examine_all = false;
        bound_sweeps = 0;
      } else {
        for (std::size_t i = 0; i < n_; ++i) {
          if (non_bound(i)) changed += examine(i);
        }
        if (changed == 0 || ++bound_sweeps >= bound_sweep_cap) examine_all = true;
      }
    }
  }

  int examine(std::size_t i2) {
    const double y2 = y_[i2];
    const double a2 = alpha_[i2];
    const double e2 = error_[i2];
    const double r2 = e2 * y2;
    if (!((r2 < -tol_ && !at_upper(a2)) || (r2 > tol_ && !at_lower(a2)))) return 0;

    // Second choice: the non-bound point with the largest (E1 - E2)^2 / eta,
    // the objective gain of an unclipped step.
    std::size_t best = n_;
    double best_gap = -1.0;
    std::size_t non_bound_count = 0;
    const double* row2 = &gram_[i2 * n_];
    const double k22 = row2[i2];
    for (std::size_t i = 0; i < n_; ++i) {
      if (!non_bound(i)) continue;
      ++non_bound_count;
      const double diff = error_[i] - e2;
      const double eta = std::max(diag_[i] + k22 - 2.0 * row2[i], 1e-12);
      const double gap = diff * diff / eta;
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (non_bound_count > 1 && best != n_ && take_step(best, i2)) return 1;
    for (std::size_t i = 0; i < n_; ++i) {
      if (non_bound(i) && take_step(i, i2)) return 1;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (take_step(i, i2)) return 1;
    }
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double alph1 = alpha_[i1];
    const double alph2 = alpha_[i2];
    const double y1 = y_[i1];
    const double y2 = y_[i2];
    const double e1 = error_[i1];
    const double e2 = error_[i2];
    const double s = y1 * y2;

    double lo = 0.0, hi = 0.0;
    if (s < 0) {
      lo = std::max(0.0, alph2 - alph1);
      hi = std::min(c_, c_ + alph2 - alph1);
    } else {
      lo = std::max(0.0, alph2 + alph1 - c_);
      hi = std::min(c_, alph2 + alph1);
    }
    if (hi - lo <= eps_ * 1e-3) return false;

    const double k11 = k(i1, i1);
    const double k12 = k(i1, i2);
    const double k22 = k(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    double a2 = 0.0;
    if (eta > 0.0) {
      a2 = std::clamp(alph2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Objective gain along the constraint line at each end point.
      const auto gain = [&](double cand2) {
        const double d2 = cand2 - alph2;
        const double d1 = -s * d2;
        return -(y1 * e1 * d1 + y2 * e2 * d2) - 0.5 * (d1 * d1 * k11 + d2 * d2 * k22 + 2.0 * s * d1 * d2 * k12);
      };
      const double g_lo = gain(lo);
      const double g_hi = gain(hi);
      if (g_lo > g_hi + eps_) {
        a2 = lo;
      } else if (g_hi > g_lo + eps_) {
        a2 = hi;
      } else {
        a2 = alph2;
      }
    }
    if (a2 < eps_) {
      a2 = 0.0;
    } else if (a2 > c_ - eps_) {
      a2 = c_;
    }
    if (std::abs(a2 - alph2) < eps_ * (a2 + alph2 + eps_)) return false;

    // Clamp only absorbs roundoff; [lo, hi] already keeps a1 inside the box.
    const double a1 = std::clamp(alph1 + s * (alph2 - a2), 0.0, c_);

    const double d1 = y1 * (a1 - alph1);
    const double d2 = y2 * (a2 - alph2);
    const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    double b_new = 0.0;
    if (!at_lower(a1) && !at_upper(a1)) {
      b_new = b1;
    } else if (!at_lower(a2) && !at_upper(a2)) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }
    const double db = b_new - b_;
    for (std::size_t i = 0; i < n_; ++i) error_[i] += d1 * k(i1, i) + d2 * k(i2, i) + db;
    alpha_[i1] = a1;
    alpha_[i2] = a2;
    b_ = b_new;
    return true;
  }

  // sum_j alpha_j y_j K(x_j, x_i), without bias.
  double raw_output(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (alpha_[j] != 0.0) s += alpha_[j] * y_[j] * k(j, i);
    }
    return s;
  }

  // Mean of y_i - raw_i over unbounded support vectors, or the midpoint of
  // the feasible bias interval when every alpha sits at a bound.
  double final_bias() const {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (alpha_[i] > eps_ && alpha_[i] < c_ - eps_) {
        sum += y_[i] - raw_output(i);
        ++count;
      }
    }
    if (count > 0) return sum / static_cast<double>(count);

    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const double g = y_[i] - raw_output(i);
      // alpha = 0 needs y f >= 1; alpha = C needs y f <= 1.
      const bool lower_bound = at_lower(alpha_[i]) == (y_[i] > 0);
      if (lower_bound) {
        lower = std::max(lower, g);
      } else {
        upper = std::min(upper, g);
      }
    }
    if (!std::isfinite(lower)) return upper;
    if (!std::isfinite(upper)) return lower;
    return 0.5 * (lower + upper);
  }

  double final_violation(double bias) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double margin = y_[i] * (raw_output(i) + bias);
      double v = 0.0;
      if (alpha_[i] <= eps_) {
        v = 1.0 - margin;
      } else if (alpha_[i] >= c_ - eps_) {
        v = margin - 1.0;
      } else {
        v = std::abs(margin - 1.0);
      }
      worst = std::max(worst, v);
    }
    return worst;
  }

  std::size_t n_;
  double c_;
  double eps_;
  SvmParams params_;
  std::vector<int> y_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  std::vector<double> gram_;
  std::vector<double> diag_;
  double b_ = 0.0;
  double tol_ = 1e-3;
};

}  // namespace

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Polynomial: return "poly";
    case KernelKind::Rbf: return "rbf";
  }
  return "linear";
}

std::optional<KernelKind> parse_kernel_kind(std::string_view name) {
  if (name == "linear") return KernelKind::Linear;
  if (name == "poly" || name == "polynomial") return KernelKind::Polynomial;
  if (name == "rbf") return KernelKind::Rbf;
  return std::nullopt;
}

void KernelSpec::validate() const {
  if (kind == KernelKind::Rbf && !(gamma > 0.0 && std::isfinite(gamma))) {
    raise(ErrorKind::InvalidArgument, kModule, "rbf gamma must be positive");
  }
  if (kind == KernelKind::Polynomial && (degree < 1 || !std::isfinite(coef0))) {
    raise(ErrorKind::InvalidArgument, kModule, "polynomial degree must be at least 1");
  }
}

std::string KernelSpec::describe() const {
  std::ostringstream out;
  switch (kind) {
    case KernelKind::Linear: out << "linear"; break;
    case KernelKind::Rbf: out << "rbf(gamma=" << gamma << ')'; break;
    case KernelKind::Polynomial: out << "poly(degree=" << degree << ",coef0=" << coef0 << ')'; break;
  }
  return out.str();
}

double kernel_eval(const KernelSpec& kernel, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) raise(ErrorKind::InvalidArgument, kModule, "kernel arguments differ in dimension");
  switch (kernel.kind) {
    case KernelKind::Linear:
      return dot(x, y);
    case KernelKind::Rbf: {
      double d2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
      }
      return std::exp(-kernel.gamma * d2);
    }
    case KernelKind::Polynomial: {
      const double base = dot(x, y) + kernel.coef0;
      double out = 1.0;
      for (int i = 0; i < kernel.degree; ++i) out *= base;
      return out;
    }
  }
  return 0.0;
}

void SvmParams::validate() const {
  if (!(c > 0.0 && std::isfinite(c))) raise(ErrorKind::InvalidArgument, kModule, "C must be positive");
  if (!(kkt_tol > 0.0) || !(eps > 0.0)) raise(ErrorKind::InvalidArgument, kModule, "tolerances must be positive");
  if (max_passes < 1) raise(ErrorKind::InvalidArgument, kModule, "max_passes must be at least 1");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.x.reserve(indices.size());
  out.y.reserve(indices.size());
  for (const auto i : indices) out.add(x[i], y[i]);
  return out;
}

Scaler Scaler::fit(std::span<const std::vector<double>> rows) {
  Scaler s;
  if (rows.empty()) return s;
  const std::size_t dim = rows.front().size();
  const auto n = static_cast<double>(rows.size());
  s.mean.assign(dim, 0.0);
  s.sd.assign(dim, 0.0);
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < dim; ++d) s.mean[d] += r[d];
  }
  for (auto& m : s.mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double dev = r[d] - s.mean[d];
      s.sd[d] += dev * dev;
    }
  }
  for (auto& v : s.sd) v = std::max(std::sqrt(v / n), 1e-12);
  return s;
}

std::vector<double> Scaler::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) raise(ErrorKind::InvalidArgument, kModule, "feature dimension mismatch");
  std::vector<double> out(row.size());
  for (std::size_t d = 0; d < row.size(); ++d) out[d] = (row[d] - mean[d]) / sd[d];
  return out;
}

DualSolution solve_dual(std::span<const std::vector<double>> points, std::span<const int> labels,
                        const KernelSpec& kernel, const SvmParams& params) {
  params.validate();
  kernel.validate();
  check_rows(points, labels.size());
  check_binary_labels(labels);
  SmoSolver solver(points, labels, kernel, params);
  return solver.run();
}

double dual_objective(std::span<const std::vector<double>> points, std::span<const int> labels,
                      std::span<const double> alphas, const KernelSpec& kernel) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] == 0.0) continue;
    linear += alphas[i];
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      if (alphas[j] == 0.0) continue;
      quad += alphas[i] * alphas[j] * labels[i] * labels[j] * kernel_eval(kernel, points[i], points[j]);
    }
  }
  return linear - 0.5 * quad;
}

BinarySvmModel solve_smo(std::span<const std::vector<double>> points, std::span<const int> labels,
                         const KernelSpec& kernel, const SvmParams& params) {
  params.validate();
  kernel.validate();
  check_rows(points, labels.size());
  check_binary_labels(labels);

  BinarySvmModel model;
  model.kernel = kernel;
  model.c = params.c;
  model.scaler = Scaler::fit(points);
  std::vector<std::vector<double>> scaled;
  scaled.reserve(points.size());
  for (const auto& p : points) scaled.push_back(model.scaler.apply(p));

  SmoSolver solver(scaled, labels, kernel, params);
  const DualSolution sol = solver.run();
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    if (sol.alphas[i] > params.eps) {
      model.support_points.push_back(std::move(scaled[i]));
      model.support_alphas.push_back(sol.alphas[i]);
      model.support_labels.push_back(labels[i]);
      model.support_indices.push_back(i);
    }
  }
  model.bias = sol.bias;
  model.converged = sol.converged;
  model.passes = sol.passes;
  return model;
}

double decision_value(const BinarySvmModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) raise(ErrorKind::InvalidArgument, kModule, "feature dimension mismatch");
  const std::vector<double> z = model.scaler.apply(x);
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_points.size(); ++i) {
    f += model.support_alphas[i] * model.support_labels[i] * kernel_eval(model.kernel, model.support_points[i], z);
  }
  return f;
}

double dual_objective(const BinarySvmModel& model) {
  return dual_objective(model.support_points, model.support_labels, model.support_alphas, model.kernel);
}

void KktReport::merge(const KktReport& other) {
  box_violation = std::max(box_violation, other.box_violation);
  equality_residual = std::max(equality_residual, other.equality_residual);
  kkt_violation = std::max(kkt_violation, other.kkt_violation);
  points += other.points;
}

KktReport check_kkt(const BinarySvmModel& model, std::span<const std::vector<double>> points,
                    std::span<const int> labels) {
  std::vector<double> alpha(points.size(), 0.0);
  KktReport report;
  report.points = points.size();
  double equality = 0.0;
  for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
    const std::size_t i = model.support_indices.at(s);
    if (i >= points.size()) raise(ErrorKind::InvalidArgument, kModule, "support index outside training set");
    const double a = model.support_alphas[s];
    alpha[i] = a;
    equality += a * model.support_labels[s];
    report.box_violation = std::max({report.box_violation, -a, a - model.c});
  }
  report.equality_residual = std::abs(equality);
  // eps is not stored in the model; the default support threshold applies.
  const double eps = SvmParams{}.eps;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double margin = labels[i] * decision_value(model, points[i]);
    double v = 0.0;
    if (alpha[i] <= eps) {
      v = 1.0 - margin;
    } else if (alpha[i] >= model.c - eps) {
      v = margin - 1.0;
    } else {
      v = std::abs(margin - 1.0);
    }
    report.kkt_violation = std::max(report.kkt_violation, v);
  }
  return report;
}

bool MulticlassModel::converged() const {
  return std::all_of(pairwise.begin(), pairwise.end(), [](const auto& kv) { return kv.second.converged; });
}

namespace {

struct PairData {
  std::vector<std::vector<double>> points;
  std::vector<int> labels;
};

PairData pair_data(const Dataset& data, int a, int b) {
  PairData out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.y[i] == a || data.y[i] == b) {
      out.points.push_back(data.x[i]);
      out.labels.push_back(data.y[i] == a ? 1 : -1);
    }
  }
  return out;
}

}  // namespace

MulticlassModel train_multiclass(const Dataset& data, const KernelSpec& kernel, const SvmParams& params) {
  std::vector<int> classes = data.y;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) raise(ErrorKind::DegenerateLabels, kModule, "degenerate label set");

  MulticlassModel model;
  model.classes = classes;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      const PairData pd = pair_data(data, classes[i], classes[j]);
      model.pairwise.emplace(std::pair{classes[i], classes[j]}, solve_smo(pd.points, pd.labels, kernel, params));
    }
  }
  return model;
}

int predict_multiclass(const MulticlassModel& model, std::span<const double> x) {
  if (model.classes.empty()) raise(ErrorKind::InvalidArgument, kModule, "empty multiclass model");
  if (model.is_constant()) return model.classes.front();

  std::map<int, std::pair<int, double>> tally;  // label -> (votes, summed |decision|)
  for (const int c : model.classes) tally[c] = {0, 0.0};
  for (const auto& [pair, binary] : model.pairwise) {
    const double dv = decision_value(binary, x);
    ++tally[dv > 0.0 ? pair.first : pair.second].first;
    tally[pair.first].second += std::abs(dv);
    tally[pair.second].second += std::abs(dv);
  }
  // Ascending label order, strict comparisons: the smallest label survives
  // a full tie.
  int best = model.classes.front();
  for (const auto& [label, score] : tally) {
    const auto& top = tally[best];
    if (score.first > top.first || (score.first == top.first && score.second > top.second)) best = label;
  }
  return best;
}

KktReport check_kkt(const MulticlassModel& model, const Dataset& data) {
  KktReport report;
  for (const auto& [pair, binary] : model.pairwise) {
    const PairData pd = pair_data(data, pair.first, pair.second);
    report.merge(check_kkt(binary, pd.points, pd.labels));
  }
  return report;
}

int majority_label(std::span<const int> labels) {
  if (labels.empty()) raise(ErrorKind::InvalidArgument, kModule, "majority of an empty label set");
  std::map<int, std::size_t> counts;
  for (const int y : labels) ++counts[y];
  int best = counts.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts) {
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

}  // namespace appstress
