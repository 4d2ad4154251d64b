#include "appstress/model_selection.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <map>
#include <string>
#include <tuple>

#include "appstress/csv.hpp"
#include "appstress/error.hpp"
#include "appstress/parallel.hpp"
#include "appstress/rng.hpp"

namespace appstress {

namespace {

constexpr std::string_view kModule = "model_selection";

bool single_class(std::span<const int> labels) {
  return std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) == labels.end();
}

// Mean accuracy over pre-built folds.
struct CvOutcome {
  double accuracy = 0.0;     // unweighted mean over folds
  std::vector<int> held_out;  // prediction for each sample from the fold that held it out
};

CvOutcome cross_validate_on(const Dataset& data, const Folds& folds, const KernelSpec& kernel,
                            const SvmParams& params) {
  CvOutcome out;
  out.held_out.assign(data.size(), 0);
  std::vector<char> held_out(data.size());
  double sum = 0.0;
  for (const auto& fold : folds.sets) {
    std::fill(held_out.begin(), held_out.end(), 0);
    for (const auto i : fold) held_out[i] = 1;
    std::vector<std::size_t> train;
    train.reserve(data.size() - fold.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!held_out[i]) train.push_back(i);
    }
    const MulticlassModel model = fit_classifier(data.subset(train), kernel, params);
    std::size_t correct = 0;
    for (const auto i : fold) {
      out.held_out[i] = predict_multiclass(model, data.x[i]);
      if (out.held_out[i] == data.y[i]) ++correct;
    }
    sum += static_cast<double>(correct) / static_cast<double>(fold.size());
  }
  out.accuracy = sum / static_cast<double>(folds.k());
  return out;
}

std::vector<double> parse_numbers(std::string_view text, std::size_t line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item(trim(text.substr(pos, comma - pos)));
    if (!item.empty()) {
      try {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        out.push_back(v);
      } catch (const std::exception&) {
        raise(ErrorKind::Config, kModule, "grid line " + std::to_string(line) + ": bad number '" + item + "'");
      }
    }
    pos = comma + 1;
  }
  return out;
}

}  // namespace

Folds make_folds(std::size_t n, std::span<const int> labels, const FoldSpec& spec) {
  if (n < 2) raise(ErrorKind::InvalidArgument, kModule, "cross-validation needs at least 2 samples");
  if (spec.k < 2) raise(ErrorKind::InvalidArgument, kModule, "k must be at least 2");
  if (spec.stratified && labels.size() != n) raise(ErrorKind::InvalidArgument, kModule, "label count differs from n");

  Folds folds;
  folds.requested_k = spec.k;
  std::size_t k = static_cast<std::size_t>(spec.k);
  if (n < k) {
    k = n;
    folds.reduced = true;
  }

  // Shuffle within each class, lay the classes end to end, then deal the
  // sequence round-robin. Consecutive runs dealt round-robin spread evenly,
  // which gives both the size and the per-class balance.
  Rng rng(spec.seed);
  std::vector<std::size_t> order;
  order.reserve(n);
  if (spec.stratified) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    for (auto& [label, members] : by_class) {
      rng.shuffle(std::span(members));
      order.insert(order.end(), members.begin(), members.end());
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) order.push_back(i);
    rng.shuffle(std::span(order));
  }

  folds.sets.assign(k, {});
  for (std::size_t p = 0; p < order.size(); ++p) folds.sets[p % k].push_back(order[p]);
  for (auto& s : folds.sets) std::sort(s.begin(), s.end());
  return folds;
}

MulticlassModel fit_classifier(const Dataset& data, const KernelSpec& kernel, const SvmParams& params) {
  if (data.empty()) raise(ErrorKind::InvalidArgument, kModule, "cannot fit an empty dataset");
  if (single_class(data.y)) return MulticlassModel::constant(data.y.front());
  return train_multiclass(data, kernel, params);
}

double cross_validate(const Dataset& data, const KernelSpec& kernel, const SvmParams& params,
                      const FoldSpec& spec) {
  const Folds folds = make_folds(data.size(), data.y, spec);
  return cross_validate_on(data, folds, kernel, params).accuracy;
}

bool simpler_than(const GridPoint& a, const GridPoint& b) {
  const auto shape = [](const GridPoint& p) {
    const double param = p.kernel.kind == KernelKind::Rbf          ? p.kernel.gamma
                         : p.kernel.kind == KernelKind::Polynomial ? static_cast<double>(p.kernel.degree)
                                                                   : 0.0;
    const double coef0 = p.kernel.kind == KernelKind::Polynomial ? p.kernel.coef0 : 0.0;
    return std::tuple(static_cast<int>(p.kernel.kind), p.c, param, coef0);
  };
  return shape(a) < shape(b);
}

Grid Grid::defaults() {
  Grid g;
  g.c_values = {0.1, 1.0, 10.0, 100.0};
  g.kernels.push_back(KernelSpec::linear());
  for (const double gamma : {0.01, 0.1, 1.0, 10.0}) g.kernels.push_back(KernelSpec::rbf(gamma));
  for (const int degree : {2, 3}) g.kernels.push_back(KernelSpec::polynomial(degree, 1.0));
  return g;
}

std::vector<GridPoint> Grid::points() const {
  std::vector<GridPoint> out;
  out.reserve(kernels.size() * c_values.size());
  for (const auto& k : kernels) {
    for (const double c : c_values) out.push_back({k, c});
  }
  return out;
}

void Grid::validate() const {
  if (kernels.empty() || c_values.empty()) raise(ErrorKind::Config, kModule, "grid must not be empty");
  for (const double c : c_values) {
    if (!(c > 0.0)) raise(ErrorKind::Config, kModule, "grid C values must be positive");
  }
  for (const auto& k : kernels) {
    if ((k.kind == KernelKind::Rbf && !(k.gamma > 0.0)) || (k.kind == KernelKind::Polynomial && k.degree < 1)) {
      raise(ErrorKind::Config, kModule, "invalid kernel in grid: " + k.describe());
    }
  }
}

Grid parse_grid(std::istream& in) {
  if (!in.good()) raise(ErrorKind::Io, kModule, "grid stream is not readable");
  std::vector<double> c_values, gammas, degrees;
  std::vector<double> coef0 = {1.0};
  bool linear = false;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = trim(std::string_view(line).substr(0, line.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      raise(ErrorKind::Config, kModule, "grid line " + std::to_string(line_number) + ": expected key = values");
    }
    const std::string key = to_lower(trim(text.substr(0, eq)));
    const std::string_view value = trim(text.substr(eq + 1));
    if (key == "c") {
      c_values = parse_numbers(value, line_number);
    } else if (key == "linear") {
      const std::string v = to_lower(value);
      if (v != "true" && v != "false") raise(ErrorKind::Config, kModule, "grid: linear must be true or false");
      linear = v == "true";
    } else if (key == "rbf_gamma") {
      gammas = parse_numbers(value, line_number);
    } else if (key == "poly_degree") {
      degrees = parse_numbers(value, line_number);
    } else if (key == "poly_coef0") {
      coef0 = parse_numbers(value, line_number);
    } else {
      raise(ErrorKind::Config, kModule, "grid: unknown key '" + key + "'");
    }
  }
  Grid g;
  g.c_values = c_values;
  if (linear) g.kernels.push_back(KernelSpec::linear());
  for (const double gamma : gammas) g.kernels.push_back(KernelSpec::rbf(gamma));
  for (const double d : degrees) {
    if (d != static_cast<int>(d)) raise(ErrorKind::Config, kModule, "grid: poly_degree must be integral");
    for (const double c0 : coef0) g.kernels.push_back(KernelSpec::polynomial(static_cast<int>(d), c0));
  }
  g.validate();
  return g;
}

SelectionResult grid_search(const Dataset& data, const Grid& grid, const FoldSpec& spec, const SvmParams& base,
                            unsigned threads) {
  grid.validate();
  const Folds folds = make_folds(data.size(), data.y, spec);
  const std::vector<GridPoint> points = grid.points();

  std::vector<CvOutcome> outcomes(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    SvmParams params = base;
    params.c = points[i].c;
    outcomes[i] = cross_validate_on(data, folds, points[i].kernel, params);
  });
  std::vector<double> accuracy(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) accuracy[i] = outcomes[i].accuracy;

  SelectionResult result;
  result.folds = folds.k();
  std::size_t best = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.table.push_back({points[i], accuracy[i]});
    if (accuracy[i] > accuracy[best] ||
        (accuracy[i] == accuracy[best] && simpler_than(points[i], points[best]))) {
      best = i;
    }
  }
  result.best = points[best];
  result.cv_accuracy = accuracy[best];
  result.best_params = base;
  result.best_params.c = points[best].c;
  result.held_out = std::move(outcomes[best].held_out);
  return result;
}

void write_selection_table(std::ostream& out, const SelectionResult& result) {
  out << std::left << std::setw(28) << "kernel" << std::right << std::setw(10) << "C" << std::setw(14)
      << "cv_accuracy" << '\n';
  for (const auto& e : result.table) {
    const bool chosen = e.point == result.best;
    out << std::left << std::setw(28) << e.point.kernel.describe() << std::right << std::setw(10) << e.point.c
        << std::setw(14) << std::fixed << std::setprecision(4) << e.cv_accuracy << std::defaultfloat
        << (chosen ? "  *" : "") << '\n';
  }
}

}  // namespace appstress
