#include "fpg/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fpg/grid/io.hpp"

namespace fpg::harness {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw std::invalid_argument(std::string(what) + ": bad number '" + s + "'");
  }
  return v;
}

long to_long(const std::string& s, const char* what) {
  const double v = to_double(s, what);
  if (v != std::floor(v)) throw std::invalid_argument(std::string(what) + ": bad index '" + s + "'");
  return static_cast<long>(v);
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

bool ViolationTable::operator==(const ViolationTable& o) const {
  if (methods != o.methods || epochs != o.epochs || values.size() != o.values.size()) return false;
  for (std::size_t e = 0; e < values.size(); ++e) {
    if (values[e].size() != o.values[e].size()) return false;
    for (std::size_t m = 0; m < values[e].size(); ++m) {
      const double a = values[e][m], b = o.values[e][m];
      if (!(a == b || (std::isnan(a) && std::isnan(b)))) return false;
    }
  }
  return true;
}

void write_violation_csv(std::ostream& out, const ViolationTable& t) {
  out << "epoch";
  for (const auto& m : t.methods) out << ',' << m;
  out << '\n';
  for (std::size_t e = 0; e < t.epochs.size(); ++e) {
    out << t.epochs[e];
    for (double v : t.values[e]) {
      out << ',';
      if (!std::isnan(v)) out << grid::format_double(v);
    }
    out << '\n';
  }
}

ViolationTable read_violation_csv(std::istream& in) {
  ViolationTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("violation csv: empty");
  auto head = split(line);
  if (head.empty() || head[0] != "epoch") throw std::invalid_argument("violation csv: bad header");
  t.methods.assign(head.begin() + 1, head.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != t.methods.size() + 1) {
      throw std::invalid_argument("violation csv: wrong field count: " + line);
    }
    t.epochs.push_back(static_cast<std::size_t>(to_long(c[0], "violation csv")));
    std::vector<double> row;
    for (std::size_t m = 1; m < c.size(); ++m) {
      row.push_back(c[m].empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : to_double(c[m], "violation csv"));
    }
    t.values.push_back(row);
  }
  return t;
}

void write_violation_svg(std::ostream& out, const ViolationTable& t) {
  const double width = 640, height = 400, left = 70, right = 110, top = 20, bottom = 50;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : t.values)
    for (double v : row)
      if (std::isfinite(v) && v > 0.0) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!std::isfinite(lo)) lo = hi = 1.0;
  const double ylo = std::floor(std::log10(lo)), yhi = std::max(ylo + 1.0, std::ceil(std::log10(hi)));
  const double e0 = t.epochs.empty() ? 0.0 : static_cast<double>(t.epochs.front());
  const double e1 = t.epochs.empty() ? 1.0 : std::max(e0 + 1.0, static_cast<double>(t.epochs.back()));
  auto px = [&](double e) { return left + (e - e0) / (e1 - e0) * (width - left - right); };
  auto py = [&](double v) {
    return top + (yhi - std::log10(v)) / (yhi - ylo) * (height - top - bottom);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  for (double d = ylo; d <= yhi; d += 1.0) {
    const double y = py(std::pow(10.0, d));
    out << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - right << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d
        << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">epoch</text>\n";
  out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2 << "\" transform=\"rotate(-90 16 "
      << (top + height - bottom) / 2 << ")\" text-anchor=\"middle\">constraint violation</text>\n";
  out << "<text x=\"" << left << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\">"
      << e0 << "</text>\n";
  out << "<text x=\"" << width - right << "\" y=\"" << height - bottom + 16
      << "\" text-anchor=\"middle\">" << e1 << "</text>\n";
  for (std::size_t m = 0; m < t.methods.size(); ++m) {
    const char* color = kColors[m % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t e = 0; e < t.epochs.size(); ++e) {
      const double v = t.values[e][m];
      if (std::isfinite(v) && v > 0.0) {
        out << px(static_cast<double>(t.epochs[e])) << ',' << py(v) << ' ';
      }
    }
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(m + 1);
    out << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << width - right + 30 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - right + 35 << "\" y=\"" << ly << "\">" << t.methods[m]
        << "</text>\n";
  }
  out << "</svg>\n";
}

uc::UcDecision read_solution_csv(std::istream& in, const grid::GridCase& grid, std::size_t horizon) {
  uc::UcDecision d = uc::UcDecision::zeros(grid, horizon);
  std::string line;
  if (!std::getline(in, line) || line != "var,generator_or_bus,period,value") {
    throw std::invalid_argument("solution csv: unexpected header");
  }
  const std::size_t expected =
      (2 * grid.generators.size() + grid.renewables.size() + grid.bus_count()) * horizon;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 4) throw std::invalid_argument("solution csv: expected 4 fields: " + line);
    const long who = to_long(c[1], "solution csv");
    const long t = to_long(c[2], "solution csv");
    const double v = to_double(c[3], "solution csv");
    if (t < 0 || static_cast<std::size_t>(t) >= horizon) {
      throw std::invalid_argument("solution csv: period out of range: " + line);
    }
    Eigen::MatrixXd* target = nullptr;
    long row = who;
    if (c[0] == "S") target = &d.commitment;
    else if (c[0] == "P_G") target = &d.dispatch;
    else if (c[0] == "P_R") target = &d.renewable;
    else if (c[0] == "delta") {
      target = &d.angle;
      row = static_cast<long>(grid.bus_index(static_cast<int>(who)));
    } else {
      throw std::invalid_argument("solution csv: unknown variable " + c[0]);
    }
    if (row < 0 || row >= target->rows()) throw std::invalid_argument("solution csv: index out of range: " + line);
    (*target)(row, t) = v;
    ++count;
  }
  if (count != expected) {
    throw std::invalid_argument("solution csv: expected " + std::to_string(expected) + " entries, got " +
                                std::to_string(count));
  }
  return d;
}

}  // namespace fpg::harness
