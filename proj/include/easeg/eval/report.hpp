#pragma once

#include <map>
#include <string>
#include <vector>

#include "easeg/vol/volume.hpp"

namespace easeg::eval {

struct CaseResult {
  std::string case_id;
  vol::PhaseTag phase = vol::PhaseTag::venous;
  double dsc = 0.0;
  double attention_recall = -1.0;  // negative = not measured
};

struct PhaseStats {
  std::string phase;
  int n_cases = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

struct PhaseReport {
  std::vector<PhaseStats> stats;
  std::string table;  // aligned text
  std::string rows;   // machine-readable csv: phase,case,dsc per result
};

PhaseReport phase_report(const std::vector<CaseResult>& results);

// Table-II-style component ablation rows.
extern const std::vector<std::string> kKnownComponents;
bool is_known_component(const std::string& flag);

struct AblationRow {
  std::string component;  // one of kKnownComponents
  std::map<std::string, PhaseStats> per_phase;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::string table;
  std::string csv;  // component,phase,n,mean,std
};

// `results_per_run` pairs a component flag with that run's case results;
// rows appear in the given order. Unknown flags are rejected.
AblationReport ablation_matrix(
    const std::vector<std::pair<std::string, std::vector<CaseResult>>>&
        results_per_run);

}  // namespace easeg::eval
