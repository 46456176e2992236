#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "costsel/cost.hpp"
#include "costsel/error.hpp"
#include "costsel/format.hpp"
#include "costsel/schedule.hpp"
#include "costsel/sequences.hpp"

namespace costsel {

inline constexpr std::string_view kScheduleHeader = "cost,val_accuracy,test_accuracy,variables,source";

inline void write_schedule(std::ostream& out, const ModelSchedule& schedule) {
  out << kScheduleHeader << '\n';
  for (const auto& r : schedule) {
    out << r.cost.to_string() << ',' << format_double(r.val_accuracy) << ','
        << (r.test_accuracy ? format_double(*r.test_accuracy) : std::string()) << ',' << r.variables.to_string()
        << ',' << to_string(r.source) << '\n';
  }
}

/// Reads a schedule file and re-checks every schedule invariant.
inline ModelSchedule read_schedule(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyDataset, "schedule file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kScheduleHeader) throw ParseError(0, 1, "unexpected schedule header '" + line + "'");
  std::vector<ModelRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto f = split_fields(line, ',');
    if (f.size() != 5) throw ParseError(row, std::min<std::size_t>(f.size(), 5) + 1, "expected 5 fields");
    ModelRecord r;
    std::size_t col = 1;
    try {
      r.cost = Cost::parse(f[0]);
      col = 2;
      r.val_accuracy = parse_double(f[1]);
      col = 3;
      if (!f[2].empty()) r.test_accuracy = parse_double(f[2]);
      col = 4;
      r.variables = VariableSet::parse(f[3]);
      col = 5;
      r.source = parse_source(f[4]);
    } catch (const Error& e) {
      throw ParseError(row, col, e.what());
    }
    records.push_back(std::move(r));
  }
  return ModelSchedule::validated(std::move(records));
}

/// One line per trained subset: size, cost, val_accuracy, variables.
inline void write_trace(std::ostream& out, const SequenceRun& run) {
  out << "size,cost,val_accuracy,variables\n";
  for (const auto& r : run.records) {
    out << r.variables.size() << ',' << r.cost.to_string() << ',' << format_double(r.val_accuracy) << ','
        << r.variables.to_string() << '\n';
  }
}

/// Step-function plot of accuracy against budget: one horizontal segment per
/// record (class "step"), vertical risers between them, and an open circle at
/// the right end of every step except the last.
inline std::string render_staircase_svg(const ModelSchedule& schedule, const std::string& title = "model schedule") {
  constexpr double width = 640, height = 400, margin = 50;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<title>" << title << "</title>\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<line class=\"axis\" x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  svg << "<line class=\"axis\" x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">budget</text>\n";
  svg << "<text x=\"15\" y=\"" << height / 2 << "\" transform=\"rotate(-90 15 " << height / 2
      << ")\" text-anchor=\"middle\">accuracy</text>\n";
  if (!schedule.empty()) {
    const double c_lo = 0.0;
    const double c_hi = schedule.records().back().cost.value() * 1.1 + 1e-9;
    double a_lo = schedule[0].val_accuracy, a_hi = schedule.records().back().val_accuracy;
    if (a_hi - a_lo < 1e-9) {
      a_lo -= 0.05;
      a_hi += 0.05;
    }
    const double pad = (a_hi - a_lo) * 0.1;
    a_lo -= pad;
    a_hi += pad;
    auto px = [&](double c) { return margin + (c - c_lo) / (c_hi - c_lo) * (width - 2 * margin); };
    auto py = [&](double a) { return height - margin - (a - a_lo) / (a_hi - a_lo) * (height - 2 * margin); };
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const double x0 = px(schedule[i].cost.value());
      const double x1 = px(i + 1 < schedule.size() ? schedule[i + 1].cost.value() : c_hi);
      const double y = py(schedule[i].val_accuracy);
      svg << "<line class=\"step\" x1=\"" << x0 << "\" y1=\"" << y << "\" x2=\"" << x1 << "\" y2=\"" << y
          << "\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
      svg << "<circle class=\"closed\" cx=\"" << x0 << "\" cy=\"" << y << "\" r=\"3\" fill=\"steelblue\"/>\n";
      if (i + 1 < schedule.size()) {
        const double y_next = py(schedule[i + 1].val_accuracy);
        svg << "<circle class=\"open\" cx=\"" << x1 << "\" cy=\"" << y << "\" r=\"3\" fill=\"white\" "
            << "stroke=\"steelblue\"/>\n";
        svg << "<line class=\"riser\" x1=\"" << x1 << "\" y1=\"" << y << "\" x2=\"" << x1 << "\" y2=\"" << y_next
            << "\" stroke=\"steelblue\" stroke-dasharray=\"2,2\"/>\n";
      }
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace costsel
