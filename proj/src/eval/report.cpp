#include "easeg/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace easeg::eval {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

PhaseStats stats_of(const std::string& phase, const std::vector<double>& xs) {
  PhaseStats s;
  s.phase = phase;
  s.n_cases = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / xs.size());
  return s;
}

}  // namespace

PhaseReport phase_report(const std::vector<CaseResult>& results) {
  // group by phase, preserving first-appearance order
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> grouped;
  for (const auto& r : results) {
    std::string phase = vol::to_string(r.phase);
    if (!grouped.count(phase)) order.push_back(phase);
    grouped[phase].push_back(r.dsc);
  }

  PhaseReport report;
  std::ostringstream table, rows;
  table << "phase                 n   mean dsc   std\n";
  table << "--------------------------------------------\n";
  rows << "kind,phase,case,value\n";
  for (const auto& phase : order) {
    PhaseStats s = stats_of(phase, grouped[phase]);
    report.stats.push_back(s);
    char line[128];
    std::snprintf(line, sizeof(line), "%-20s %3d   %s     %s\n", phase.c_str(),
                  s.n_cases, fmt(s.mean).c_str(), fmt(s.stddev).c_str());
    table << line;
  }
  for (const auto& r : results)
    rows << "dsc," << vol::to_string(r.phase) << "," << r.case_id << ","
         << fmt(r.dsc) << "\n";
  for (const auto& s : report.stats) {
    rows << "mean," << s.phase << ",," << fmt(s.mean) << "\n";
    rows << "std," << s.phase << ",," << fmt(s.stddev) << "\n";
  }
  report.table = table.str();
  report.rows = rows.str();
  return report;
}

const std::vector<std::string> kKnownComponents = {
    "separate",
    "joint",
    "synphaseaug",
    "synphaseaug_no_selflearn",
    "ext_attention",
    "ext_attention_no_syn",
};

bool is_known_component(const std::string& flag) {
  return std::find(kKnownComponents.begin(), kKnownComponents.end(), flag) !=
         kKnownComponents.end();
}

AblationReport ablation_matrix(
    const std::vector<std::pair<std::string, std::vector<CaseResult>>>&
        results_per_run) {
  AblationReport report;
  std::vector<std::string> phase_order;
  for (const auto& [component, results] : results_per_run) {
    if (!is_known_component(component))
      throw std::invalid_argument("ablation_matrix: unknown component flag '" +
                                  component + "'");
    AblationRow row;
    row.component = component;
    std::map<std::string, std::vector<double>> grouped;
    for (const auto& r : results) {
      std::string phase = vol::to_string(r.phase);
      if (std::find(phase_order.begin(), phase_order.end(), phase) ==
          phase_order.end())
        phase_order.push_back(phase);
      grouped[phase].push_back(r.dsc);
    }
    for (const auto& [phase, xs] : grouped)
      row.per_phase[phase] = stats_of(phase, xs);
    report.rows.push_back(std::move(row));
  }

  std::ostringstream table, csv;
  table << "component                       ";
  for (const auto& p : phase_order) {
    char h[48];
    std::snprintf(h, sizeof(h), "  %-18s", p.c_str());
    table << h;
  }
  table << "\n";
  csv << "component,phase,n,mean,std\n";
  for (const auto& row : report.rows) {
    char name[64];
    std::snprintf(name, sizeof(name), "%-32s", row.component.c_str());
    table << name;
    for (const auto& p : phase_order) {
      auto it = row.per_phase.find(p);
      if (it == row.per_phase.end()) {
        table << "  -                 ";
      } else {
        char cell[48];
        std::snprintf(cell, sizeof(cell), "  %s +/- %s   ",
                      fmt(it->second.mean).c_str(),
                      fmt(it->second.stddev).c_str());
        table << cell;
      }
    }
    table << "\n";
    for (const auto& [phase, s] : row.per_phase)
      csv << row.component << "," << phase << "," << s.n_cases << ","
          << fmt(s.mean) << "," << fmt(s.stddev) << "\n";
  }
  report.table = table.str();
  report.csv = csv.str();
  return report;
}

}  // namespace easeg::eval
