#include "gridfire/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gridfire {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

ReportRow report_row_from(const EvaluationReport& rep, const std::string& tag,
                          std::optional<double> alpha, double reference_g_n) {
  ReportRow row;
  row.tag = tag;
  row.alpha = alpha;
  row.nondisruptive_shed = rep.nondisruptive_shed;
  row.disruptive_shed = rep.disruptive_shed;
  row.disruptive_damage = rep.disruptive_damage;
  row.g_n = rep.g_n;
  row.worst_case = rep.worst_case;
  row.rri = reference_g_n != 0.0 ? (rep.g_n - reference_g_n) / reference_g_n : 0.0;
  return row;
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << "tag,alpha,nondisr_shed,disr_shed,disr_damage,g_n,rri,worst_case\n";
  for (const ReportRow& r : rows) {
    out << r.tag << ",";
    if (r.alpha) out << fmt(*r.alpha);
    out << "," << fmt(r.nondisruptive_shed) << "," << fmt(r.disruptive_shed) << ","
        << fmt(r.disruptive_damage) << "," << fmt(r.g_n) << "," << fmt(r.rri) << ","
        << fmt(r.worst_case) << "\n";
  }
}

namespace {

json row_to_json(const ReportRow& r) {
  json j{{"tag", r.tag},
         {"nondisr_shed", r.nondisruptive_shed},
         {"disr_shed", r.disruptive_shed},
         {"disr_damage", r.disruptive_damage},
         {"g_n", r.g_n},
         {"rri", r.rri},
         {"worst_case", r.worst_case}};
  if (r.alpha) j["alpha"] = *r.alpha;
  return j;
}

}  // namespace

void write_report_json(const std::string& path, const std::vector<ReportRow>& rows,
                       const std::string& case_hash) {
  json jr = json::array();
  for (const ReportRow& r : rows) jr.push_back(row_to_json(r));
  json j{{"format", "gridfire-report/1"}, {"case_hash", case_hash}, {"rows", jr}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

std::vector<ReportRow> read_report_json(const std::string& path, std::string* case_hash) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report: " + path);
  std::vector<ReportRow> rows;
  try {
    json j = json::parse(in);
    if (j.value("format", "") != "gridfire-report/1")
      throw ParseError("unsupported report format");
    if (case_hash) *case_hash = j.value("case_hash", "");
    for (const json& r : j.at("rows")) {
      ReportRow row;
      row.tag = r.at("tag").get<std::string>();
      if (r.contains("alpha")) row.alpha = r.at("alpha").get<double>();
      row.nondisruptive_shed = r.value("nondisr_shed", 0.0);
      row.disruptive_shed = r.value("disr_shed", 0.0);
      row.disruptive_damage = r.value("disr_damage", 0.0);
      row.g_n = r.value("g_n", 0.0);
      row.rri = r.value("rri", 0.0);
      row.worst_case = r.value("worst_case", 0.0);
      rows.push_back(row);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
  return rows;
}

void write_evaluation_json(const std::string& path, const EvaluationReport& rep,
                           const std::string& case_hash) {
  json per = json::array();
  for (const ScenarioCost& c : rep.per_scenario)
    per.push_back({{"pre", c.pre_shed}, {"post", c.post_shed}, {"damage", c.damage}});
  json j{{"format", "gridfire-eval/1"},
         {"case_hash", case_hash},
         {"tag", rep.plan_tag},
         {"nondisr_shed", rep.nondisruptive_shed},
         {"disr_shed", rep.disruptive_shed},
         {"disr_damage", rep.disruptive_damage},
         {"g_n", rep.g_n},
         {"worst_case", rep.worst_case},
         {"per_scenario", per}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write evaluation report: " + path);
  out << j.dump(2) << "\n";
}

void write_saa_csv(const std::string& path, const SaaStudy& study) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write SAA table: " + path);
  out << "size,lb_mean,lb_half_width,lb_min,lb_max,ub_mean,ub_half_width,ub_min,ub_max\n";
  for (const SaaRow& r : study.rows)
    out << r.size << "," << fmt(r.lb_mean) << "," << fmt(r.lb_half_width) << ","
        << fmt(r.lb_min) << "," << fmt(r.lb_max) << "," << fmt(r.ub_mean) << ","
        << fmt(r.ub_half_width) << "," << fmt(r.ub_min) << "," << fmt(r.ub_max) << "\n";
}

void write_saa_json(const std::string& path, const SaaStudy& study,
                    const std::string& case_hash) {
  json cells = json::array();
  for (const SaaCell& c : study.cells)
    cells.push_back({{"size", c.size},
                     {"replicate", c.replicate},
                     {"lower", c.lower},
                     {"upper", c.upper},
                     {"failed", c.failed}});
  json rows = json::array();
  for (const SaaRow& r : study.rows)
    rows.push_back({{"size", r.size},
                    {"lb_mean", r.lb_mean},
                    {"lb_half_width", r.lb_half_width},
                    {"lb_min", r.lb_min},
                    {"lb_max", r.lb_max},
                    {"ub_mean", r.ub_mean},
                    {"ub_half_width", r.ub_half_width},
                    {"ub_min", r.ub_min},
                    {"ub_max", r.ub_max}});
  json j{{"format", "gridfire-saa/1"},
         {"case_hash", case_hash},
         {"cells", cells},
         {"rows", rows}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write SAA report: " + path);
  out << j.dump(2) << "\n";
}

SaaStudy read_saa_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open SAA report: " + path);
  SaaStudy study;
  try {
    json j = json::parse(in);
    if (j.value("format", "") != "gridfire-saa/1")
      throw ParseError("unsupported SAA report format");
    for (const json& c : j.at("cells")) {
      SaaCell cell;
      cell.size = c.at("size").get<int>();
      cell.replicate = c.at("replicate").get<int>();
      cell.lower = c.at("lower").get<double>();
      cell.upper = c.at("upper").get<double>();
      cell.failed = c.value("failed", false);
      study.cells.push_back(cell);
    }
    for (const json& r : j.at("rows")) {
      SaaRow row;
      row.size = r.at("size").get<int>();
      row.lb_mean = r.at("lb_mean").get<double>();
      row.lb_half_width = r.at("lb_half_width").get<double>();
      row.lb_min = r.at("lb_min").get<double>();
      row.lb_max = r.at("lb_max").get<double>();
      row.ub_mean = r.at("ub_mean").get<double>();
      row.ub_half_width = r.at("ub_half_width").get<double>();
      row.ub_min = r.at("ub_min").get<double>();
      row.ub_max = r.at("ub_max").get<double>();
      study.rows.push_back(row);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed SAA report: ") + e.what());
  }
  return study;
}

void write_sensitivity_csv(const std::string& path,
                           const std::vector<SensitivityRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sensitivity table: " + path);
  out << "dp,objective,nondisr_shed,disr_shed,disr_damage,g_n,rri\n";
  for (const SensitivityRow& r : rows)
    out << fmt(r.dp) << "," << fmt(r.objective) << "," << fmt(r.nondisruptive_shed)
        << "," << fmt(r.disruptive_shed) << "," << fmt(r.disruptive_damage) << ","
        << fmt(r.g_n) << "," << fmt(r.rri) << "\n";
}

void write_interaction_csv(const std::string& path, const InteractionStudy& study) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write interaction table: " + path);
  out << "plan,test_set,nondisr_shed,disr_shed,disr_damage,g_n\n";
  for (int p = 0; p < 3; ++p)
    for (int s = 0; s < 3; ++s) {
      const EvaluationReport& rep = study.reports[p][s];
      out << InteractionStudy::label(p) << "," << InteractionStudy::label(s) << ","
          << fmt(rep.nondisruptive_shed) << "," << fmt(rep.disruptive_shed) << ","
          << fmt(rep.disruptive_damage) << "," << fmt(rep.g_n) << "\n";
    }
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& case_hash,
                    const std::vector<std::string>& outputs) {
  json j{{"format", "gridfire-manifest/1"},
         {"command", command},
         {"case_hash", case_hash},
         {"outputs", outputs}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for fingerprinting: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx",
           static_cast<unsigned long long>(fnv1a(ss.str())));
  return buf;
}

}  // namespace gridfire
