#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "appstress/csv.hpp"
#include "appstress/evaluation.hpp"

namespace appstress {

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double v) { return fixed(100.0 * v, 3) + "%"; }

std::string short_number(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

void write_row(std::ostream& out, const UserResult& r) {
  out << csv_field(r.user_id) << ',' << fixed(r.cv_accuracy) << ',' << fixed(r.test_accuracy) << ','
      << fixed(r.precision) << ',' << fixed(r.recall) << ',' << r.n_train << ',' << r.n_test << ','
      << csv_field(r.selected.kernel.describe()) << ',' << short_number(r.selected.c) << ','
      << (r.fallback ? 1 : 0) << ',' << (r.converged ? 1 : 0) << '\n';
}

}  // namespace

void write_report_csv(std::ostream& out, const EvaluationReport& report) {
  out << "user_id,cv_accuracy,test_accuracy,precision,recall,n_train,n_test,kernel,c,fallback,converged\n";
  for (const auto& r : report.rows) write_row(out, r);
  const auto& a = report.averages;
  out << "average," << fixed(a.cv_accuracy) << ',' << fixed(a.test_accuracy) << ',' << fixed(a.precision) << ','
      << fixed(a.recall) << ",,,,,,\n";
  if (report.pooled) write_row(out, *report.pooled);
}

void write_report_table(std::ostream& out, const EvaluationReport& report) {
  constexpr int kId = 14;
  constexpr int kCol = 16;
  const auto line = [&] { out << std::string(kId + 4 * kCol, '-') << '\n'; };
  const auto row = [&](std::string_view id, double cv, double test, double p, double r) {
    out << std::left << std::setw(kId) << id << std::right << std::setw(kCol) << percent(cv) << std::setw(kCol)
        << percent(test) << std::setw(kCol) << percent(p) << std::setw(kCol) << percent(r) << '\n';
  };

  line();
  out << std::left << std::setw(kId) << "User ID" << std::right << std::setw(kCol) << "CV accuracy"
      << std::setw(kCol) << "Test accuracy" << std::setw(kCol) << "Precision" << std::setw(kCol) << "Recall"
      << '\n';
  line();
  for (const auto& r : report.rows) row(r.user_id, r.cv_accuracy, r.test_accuracy, r.precision, r.recall);
  line();
  const auto& a = report.averages;
  row("Average", a.cv_accuracy, a.test_accuracy, a.precision, a.recall);
  if (report.pooled) {
    const auto& p = *report.pooled;
    row("Pooled", p.cv_accuracy, p.test_accuracy, p.precision, p.recall);
  }
  line();
  for (const auto& s : report.skipped) {
    out << "skipped " << s.user_id << " (" << s.labeled_days << " labeled days): " << s.reason << '\n';
  }
  if (report.pooled) out << "pooled row: " << report.pooled->n_test << " days, k-fold held-out scores\n";
}

void write_category_usage_csv(std::ostream& out, std::span<const CategoryUsage> usage) {
  out << "category,uses_per_day,seconds_per_use\n";
  for (const auto& u : usage) {
    out << to_string(u.category) << ',' << fixed(u.uses_per_day) << ',' << fixed(u.seconds_per_use) << '\n';
  }
}

void write_category_svg(std::ostream& out, std::span<const CategoryUsage> usage) {
  constexpr double kWidth = 640, kHeight = 480, kLeft = 80, kRight = 40, kTop = 40, kBottom = 70;
  double max_x = 1.0, max_y = 1.0;
  for (const auto& u : usage) {
    max_x = std::max(max_x, u.uses_per_day);
    max_y = std::max(max_y, u.seconds_per_use);
  }
  max_x *= 1.1;
  max_y *= 1.1;
  const auto px = [&](double x) { return kLeft + x / max_x * (kWidth - kLeft - kRight); };
  const auto py = [&](double y) { return kHeight - kBottom - y / max_y * (kHeight - kTop - kBottom); };
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#7f7f7f"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kLeft << "\" y2=\"" << kTop
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = max_x * t / 4.0, yv = max_y * t / 4.0;
    out << "<text x=\"" << fixed(px(xv), 1) << "\" y=\"" << py(0) + 16 << "\" text-anchor=\"middle\">"
        << fixed(xv, 1) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(py(yv) + 4, 1) << "\" text-anchor=\"end\">"
        << fixed(yv, 0) << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 20
      << "\" text-anchor=\"middle\">mean uses per day</text>\n";
  out << "<text transform=\"translate(20," << (kTop + kHeight - kBottom) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">mean seconds per use</text>\n";
  for (std::size_t i = 0; i < usage.size(); ++i) {
    const auto& u = usage[i];
    const auto color = colors[static_cast<std::size_t>(u.category) % std::size(colors)];
    out << "<circle cx=\"" << fixed(px(u.uses_per_day), 2) << "\" cy=\"" << fixed(py(u.seconds_per_use), 2)
        << "\" r=\"6\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << fixed(px(u.uses_per_day) + 9, 2) << "\" y=\"" << fixed(py(u.seconds_per_use) + 4, 2)
        << "\">" << to_string(u.category) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace appstress
