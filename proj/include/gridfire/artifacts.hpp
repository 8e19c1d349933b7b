#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridfire/benchmarks.hpp"
#include "gridfire/evaluation.hpp"

namespace gridfire {

/// One row of the benchmark comparison table (deterministic, risk-based
/// sweep, robust, and the stochastic plan itself).
struct ReportRow {
  std::string tag;
  std::optional<double> alpha;
  double nondisruptive_shed = 0.0;
  double disruptive_shed = 0.0;
  double disruptive_damage = 0.0;
  double g_n = 0.0;
  double rri = 0.0;
  double worst_case = 0.0;
};

ReportRow report_row_from(const EvaluationReport& rep, const std::string& tag,
                          std::optional<double> alpha, double reference_g_n);

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);
void write_report_json(const std::string& path, const std::vector<ReportRow>& rows,
                       const std::string& case_hash);
std::vector<ReportRow> read_report_json(const std::string& path,
                                        std::string* case_hash = nullptr);

void write_evaluation_json(const std::string& path, const EvaluationReport& rep,
                           const std::string& case_hash);

void write_saa_csv(const std::string& path, const SaaStudy& study);
void write_saa_json(const std::string& path, const SaaStudy& study,
                    const std::string& case_hash);
SaaStudy read_saa_json(const std::string& path);

void write_sensitivity_csv(const std::string& path,
                           const std::vector<SensitivityRow>& rows);

void write_interaction_csv(const std::string& path, const InteractionStudy& study);

/// Run manifest: producing command, case fingerprint, emitted files.
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& case_hash,
                    const std::vector<std::string>& outputs);

uint64_t fnv1a(const std::string& bytes);
std::string file_fingerprint(const std::string& path);

}  // namespace gridfire
