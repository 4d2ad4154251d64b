#include <algorithm>
#include <cmath>
#include <limits>

#include "appstress/error.hpp"
#include "appstress/synth.hpp"

namespace appstress {

namespace {

constexpr std::string_view kModule = "synth";

// Gaussian elimination with partial pivoting on a dense square system.
// Returns false when a pivot is numerically zero.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  double scale = 0.0;
  for (const auto& row : a) {
    for (const double v : row) scale = std::max(scale, std::abs(v));
  }
  const double tiny = 1e-10 * std::max(scale, 1.0);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < tiny) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return true;
}

}  // namespace

OracleSolution brute_force_svm_oracle(std::span<const std::vector<double>> points, std::span<const int> labels,
                                      const KernelSpec& kernel, double c) {
  const std::size_t n = points.size();
  if (n > 6) raise(ErrorKind::InvalidArgument, kModule, "brute-force oracle is limited to 6 points");
  if (labels.size() != n || n == 0) raise(ErrorKind::InvalidArgument, kModule, "point and label counts differ");
  if (!(c > 0.0)) raise(ErrorKind::InvalidArgument, kModule, "C must be positive");
  kernel.validate();
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (std::any_of(labels.begin(), labels.end(), [](int y) { return y != 1 && y != -1; })) {
    raise(ErrorKind::InvalidArgument, kModule, "labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) raise(ErrorKind::DegenerateLabels, kModule, "oracle input holds a single class");

  // Q_ij = y_i y_j K(x_i, x_j)
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q[i][j] = labels[i] * labels[j] * kernel_eval(kernel, points[i], points[j]);
  }
  const auto objective = [&](const std::vector<double>& a) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lin += a[i];
      for (std::size_t j = 0; j < n; ++j) quad += a[i] * q[i][j] * a[j];
    }
    return lin - 0.5 * quad;
  };
  const double feas_tol = 1e-9 * std::max(1.0, c);

  OracleSolution best;
  best.objective = -std::numeric_limits<double>::infinity();
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < n; ++i) patterns *= 3;

  std::vector<int> state(n);  // 0: alpha = 0, 1: alpha = C, 2: free
  for (std::size_t p = 0; p < patterns; ++p) {
    std::size_t code = p;
    std::vector<std::size_t> free;
    std::vector<double> alpha(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = static_cast<int>(code % 3);
      code /= 3;
      if (state[i] == 1) alpha[i] = c;
      if (state[i] == 2) free.push_back(i);
    }

    double bias = 0.0;
    if (!free.empty()) {
      // Stationarity for free i: (Q alpha)_i + y_i b = 1, plus y^T alpha = 0.
      const std::size_t m = free.size();
      std::vector<std::vector<double>> a(m + 1, std::vector<double>(m + 1, 0.0));
      std::vector<double> rhs(m + 1, 0.0);
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = free[r];
        for (std::size_t s = 0; s < m; ++s) a[r][s] = q[i][free[s]];
        a[r][m] = labels[i];
        double fixed = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (state[j] == 1) fixed += q[i][j] * c;
        }
        rhs[r] = 1.0 - fixed;
      }
      for (std::size_t s = 0; s < m; ++s) a[m][s] = labels[free[s]];
      double fixed_eq = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (state[j] == 1) fixed_eq += labels[j] * c;
      }
      rhs[m] = -fixed_eq;
      std::vector<double> sol;
      if (!solve_linear(a, rhs, sol)) continue;
      bool inside = true;
      for (std::size_t s = 0; s < m; ++s) {
        if (sol[s] < -feas_tol || sol[s] > c + feas_tol) inside = false;
        alpha[free[s]] = std::clamp(sol[s], 0.0, c);
      }
      if (!inside) continue;
      bias = sol[m];
    }

    double eq = 0.0;
    for (std::size_t i = 0; i < n; ++i) eq += labels[i] * alpha[i];
    if (std::abs(eq) > feas_tol) continue;

    if (free.empty()) {
      // Every alpha at a bound leaves b anywhere in the interval the KKT
      // inequalities allow; take its midpoint, as the solver does.
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        double g = 0.0;
        for (std::size_t j = 0; j < n; ++j) g += alpha[j] * q[i][j];
        // y_i (raw_i + b) >= 1 when alpha_i = 0, <= 1 when alpha_i = C.
        const double edge = labels[i] * (1.0 - g);
        const bool lower = (state[i] == 0) == (labels[i] > 0);
        if (lower) {
          lo = std::max(lo, edge);
        } else {
          hi = std::min(hi, edge);
        }
      }
      if (std::isfinite(lo) && std::isfinite(hi)) {
        bias = 0.5 * (lo + hi);
      } else if (std::isfinite(lo)) {
        bias = lo;
      } else if (std::isfinite(hi)) {
        bias = hi;
      }
    }

    ++best.candidates;
    const double value = objective(alpha);
    if (value > best.objective) {
      best.objective = value;
      best.alphas = alpha;
      best.bias = bias;
    }
  }
  if (best.candidates == 0) raise(ErrorKind::InvalidArgument, kModule, "no feasible candidate found");
  return best;
}

}  // namespace appstress
