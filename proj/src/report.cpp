#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "convex_auction/bounds.hpp"
#include "convex_auction/error.hpp"
#include "convex_auction/sim.hpp"

namespace convex_auction {

namespace {

std::string format6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

template <typename Field>
void write_table(std::ostream& out, const ExperimentReport& report, Field field) {
  out << "Num Bidders";
  for (Mechanism m : report.mechanisms) out << ',' << mechanism_info(m).column;
  out << '\n';
  if (report.mechanisms.empty()) return;
  for (std::size_t ni = 0; ni < report.n_values.size(); ++ni) {
    out << report.n_values[ni];
    for (std::size_t mi = 0; mi < report.mechanisms.size(); ++mi) {
      const CellStats& cell = report.cells[mi][ni];
      out << ',';
      if (cell.defined) out << format6(field(cell));
    }
    out << '\n';
  }
}

std::string guarantee_column(Mechanism m, int n, double d) {
  if (d < 2.0) return "";
  GuaranteeRequest req;
  req.bidders = n;
  req.exponent = d;
  switch (m) {
    case Mechanism::prior_free:
      if (n < 2) return "";
      req.kind = GuaranteeKind::prior_free;
      break;
    case Mechanism::posted_median: req.kind = GuaranteeKind::median_reserve; break;
    case Mechanism::posted_cost_optimized: req.kind = GuaranteeKind::cost_optimized; break;
    default: return "";
  }
  return format6(guarantee(req).value);
}

}  // namespace

void write_revenue_csv(std::ostream& out, const ExperimentReport& report) {
  write_table(out, report, [](const CellStats& c) { return c.mean_revenue; });
}

void write_ratio_csv(std::ostream& out, const ExperimentReport& report) {
  write_table(out, report, [](const CellStats& c) { return c.mean_ratio; });
}

ReportFiles write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  ReportFiles files{dir / "mean_revenue.csv", dir / "ratio.csv"};
  {
    std::ofstream out(files.revenue);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + files.revenue.string());
    write_revenue_csv(out, report);
    if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + files.revenue.string());
  }
  {
    std::ofstream out(files.ratio);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + files.ratio.string());
    write_ratio_csv(out, report);
    if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + files.ratio.string());
  }
  return files;
}

void print_summary(std::ostream& out, const ExperimentReport& report, double d) {
  if (report.n_values.empty()) return;
  const std::size_t last = report.n_values.size() - 1;
  const int n = report.n_values[last];
  out << "Performance at N = " << n << "\n";
  out << std::left << std::setw(36) << "Method" << std::setw(16) << "Mean Revenue"
      << std::setw(16) << "Ratio to Opt" << "Guarantee\n";
  out << std::setw(36) << "BIC Opt" << std::setw(16) << format6(report.opt_revenue[last])
      << std::setw(16) << "1" << "\n";
  for (std::size_t mi = 0; mi < report.mechanisms.size(); ++mi) {
    const CellStats& cell = report.cells[mi][last];
    const Mechanism m = report.mechanisms[mi];
    out << std::setw(36) << mechanism_info(m).column;
    if (!cell.defined) {
      out << "undefined at this N\n";
      continue;
    }
    out << std::setw(16) << format6(cell.mean_revenue) << std::setw(16)
        << format6(cell.mean_ratio) << guarantee_column(m, n, d) << "\n";
  }
  out << std::right;
}

}  // namespace convex_auction
