#include "fpg/uc/report.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fpg/grid/io.hpp"

namespace fpg::uc {

double FeasibilityReport::total_l1() const {
  double total = 0.0;
  for (const auto& [g, s] : groups) total += s.l1_violation;
  return total;
}

double FeasibilityReport::family_l1(Family f) const {
  double total = 0.0;
  for (const auto& [g, s] : groups)
    if (family_of(g) == f) total += s.l1_violation;
  return total;
}

FeasibilityReport summarize(const ConstraintResiduals& residuals, double tol) {
  FeasibilityReport rep;
  for (Group g : kAllGroups) {
    const Eigen::MatrixXd& m = residuals[g];
    GroupSummary s;
    if (m.size() > 0) {
      s.max_violation = m.cwiseAbs().maxCoeff();
      s.l1_violation = m.cwiseAbs().sum();
    }
    rep.feasible = rep.feasible && s.max_violation <= tol;
    rep.groups[g] = s;
  }
  rep.total_lines = static_cast<std::size_t>(residuals.line_upper.rows());
  for (Eigen::Index l = 0; l < residuals.line_upper.rows(); ++l) {
    const double worst = std::max(residuals.line_upper.row(l).maxCoeff(),
                                  residuals.line_lower.row(l).maxCoeff());
    if (worst > tol) ++rep.overloaded_lines;
  }
  rep.overload_frequency =
      rep.total_lines == 0 ? 0.0
                           : static_cast<double>(rep.overloaded_lines) / static_cast<double>(rep.total_lines);
  return rep;
}

FeasibilityReport feasibility_report(const UcDecision& dec, const grid::GridCase& grid,
                                     const grid::Scenario& scenario, const UcParams& params,
                                     double tol) {
  if (tol < 0.0) throw std::invalid_argument("feasibility_report: tol must be >= 0");
  return summarize(all_residuals(dec, grid, scenario, params), tol);
}

std::vector<ResidualRow> residual_rows(const ConstraintResiduals& residuals) {
  std::vector<ResidualRow> rows;
  for (Group g : kAllGroups) {
    const Eigen::MatrixXd& m = residuals[g];
    for (Eigen::Index t = 0; t < m.cols(); ++t) {
      ResidualRow r{g, static_cast<std::size_t>(t), 0.0, 0.0};
      if (m.rows() > 0) {
        r.max_violation = m.col(t).cwiseAbs().maxCoeff();
        r.l1_violation = m.col(t).cwiseAbs().sum();
      }
      rows.push_back(r);
    }
  }
  return rows;
}

void write_residual_csv(const std::vector<ResidualRow>& rows, std::ostream& out) {
  out << "group,period,max_violation,l1_violation\n";
  for (const auto& r : rows) {
    out << group_name(r.group) << ',' << r.period << ',' << grid::format_double(r.max_violation)
        << ',' << grid::format_double(r.l1_violation) << '\n';
  }
}

std::vector<ResidualRow> read_residual_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "group,period,max_violation,l1_violation") {
    throw std::runtime_error("residual csv: bad header");
  }
  std::vector<ResidualRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string group, period, mx, l1;
    if (!std::getline(ss, group, ',') || !std::getline(ss, period, ',') ||
        !std::getline(ss, mx, ',') || !std::getline(ss, l1)) {
      throw std::runtime_error("residual csv: short row '" + line + "'");
    }
    rows.push_back({group_from_name(group), std::stoul(period), std::stod(mx), std::stod(l1)});
  }
  return rows;
}

}  // namespace fpg::uc
