#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "appstress/svm.hpp"

namespace appstress {

struct FoldSpec {
  int k = 10;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct Folds {
  std::vector<std::vector<std::size_t>> sets;  // each sorted ascending
  int requested_k = 0;
  bool reduced = false;  // true when n < k forced leave-one-out

  std::size_t k() const noexcept { return sets.size(); }
};

/// Seeded partition of [0, n) into k folds whose sizes differ by at most
/// one; when stratified, each class's per-fold counts also differ by at
/// most one. Raises invalid-argument for n < 2 or k < 2.
Folds make_folds(std::size_t n, std::span<const int> labels, const FoldSpec& spec);

/// Trains a multiclass model, falling back to a constant majority-class
/// model when the data holds a single label.
MulticlassModel fit_classifier(const Dataset& data, const KernelSpec& kernel, const SvmParams& params);

/// Unweighted mean of per-fold held-out accuracy.
double cross_validate(const Dataset& data, const KernelSpec& kernel, const SvmParams& params,
                      const FoldSpec& spec);

struct GridPoint {
  KernelSpec kernel;
  double c = 1.0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Preference order among equally accurate points: kernel family
/// (linear, poly, rbf), then smaller C, then smaller gamma or degree.
bool simpler_than(const GridPoint& a, const GridPoint& b);

struct Grid {
  std::vector<KernelSpec> kernels;
  std::vector<double> c_values;

  /// C in {0.1, 1, 10, 100} crossed with linear, rbf gamma in
  /// {0.01, 0.1, 1, 10}, and poly degree in {2, 3} with coef0 = 1.
  static Grid defaults();
  std::vector<GridPoint> points() const;
  void validate() const;
};

/// Reads `key = v1, v2, ...` lines: `c`, `linear` (true/false), `rbf_gamma`,
/// `poly_degree`, `poly_coef0`. `#` starts a comment. Raises config errors.
Grid parse_grid(std::istream& in);

struct GridEntry {
  GridPoint point;
  double cv_accuracy = 0.0;
};

struct SelectionResult {
  GridPoint best;
  SvmParams best_params;
  double cv_accuracy = 0.0;
  std::vector<GridEntry> table;  // in Grid::points() order
  std::size_t folds = 0;
  std::vector<int> held_out;  // best point's prediction for each sample, from the fold holding it out
};

/// Scores every grid point on identical folds and keeps the most accurate,
/// breaking ties with simpler_than. `threads` only changes wall time.
SelectionResult grid_search(const Dataset& data, const Grid& grid, const FoldSpec& spec,
                            const SvmParams& base = {}, unsigned threads = 1);

void write_selection_table(std::ostream& out, const SelectionResult& result);

}  // namespace appstress
