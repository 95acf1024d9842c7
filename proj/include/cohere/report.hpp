#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "cohere/agreement.hpp"
#include "cohere/errors.hpp"
#include "cohere/evalproto.hpp"

namespace cohere {

inline constexpr const char* kReportFormatVersion = "# cohere-report v1";

// Write-then-rename so partially written reports never appear.
inline void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << contents;
  }
  fs::rename(tmp, target);
}

namespace reportdet {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace reportdet

// Machine-readable: one row per seed plus a summary row, tab-separated.
inline std::string render_eval_report(const EvalReport& report) {
  std::ostringstream out;
  out << kReportFormatVersion << '\n';
  out << "task\tmodel\ttrain_domain\ttest_domain\tlabels\tseed\tmetric\tprecision\trecall\n";
  const char* labels = report.labels == RaterSource::Expert ? "expert" : "crowd";
  for (std::size_t i = 0; i < report.per_seed.size(); ++i) {
    out << task_name(report.task) << '\t' << report.model << '\t' << report.train_domain << '\t'
        << report.test_domain << '\t' << labels << '\t' << report.seeds[i] << '\t'
        << reportdet::fmt(report.per_seed[i]) << "\t\t\n";
  }
  out << task_name(report.task) << '\t' << report.model << '\t' << report.train_domain << '\t'
      << report.test_domain << '\t' << labels << "\tmean\t" << reportdet::fmt(report.mean) << '\t'
      << (report.task == Task::Minority ? reportdet::fmt(report.precision) : std::string()) << '\t'
      << (report.task == Task::Minority ? reportdet::fmt(report.recall) : std::string()) << '\n';
  out << task_name(report.task) << '\t' << report.model << '\t' << report.train_domain << '\t'
      << report.test_domain << '\t' << labels << "\tstd\t" << reportdet::fmt(report.stddev) << "\t\t\n";
  for (const auto& failure : report.failures)
    out << "# failed run: " << failure << '\n';
  return out.str();
}

inline std::string render_agreement_report(const std::string& domain, const AgreementReport& report) {
  std::ostringstream out;
  out << kReportFormatVersion << '\n';
  out << "domain\traters\trepeats\ticc_mean\ticc_std\tkappa_mean\tkappa_std\n";
  out << domain << '\t' << (report.rater_source == RaterSource::Expert ? "expert" : "crowd") << '\t'
      << report.repeats << '\t' << reportdet::fmt(report.icc_mean) << '\t'
      << reportdet::fmt(report.icc_std) << '\t' << reportdet::fmt(report.kappa_mean) << '\t'
      << reportdet::fmt(report.kappa_std) << '\n';
  return out.str();
}

inline std::string render_significance(const std::vector<SignificanceEntry>& entries) {
  std::ostringstream out;
  out << kReportFormatVersion << '\n';
  out << "domain\tbest_neural\tneural_mean\tbest_non_neural\tnon_neural_value\tp_raw\tp_adjusted\tdagger\n";
  for (const auto& e : entries) {
    out << e.domain << '\t' << e.best_neural << '\t' << reportdet::fmt(e.neural_mean) << '\t'
        << e.best_non_neural << '\t' << reportdet::fmt(e.non_neural_value) << '\t'
        << reportdet::fmt(e.p_raw) << '\t' << reportdet::fmt(e.p_adjusted) << '\t'
        << (e.dagger ? "yes" : "no") << '\n';
  }
  return out.str();
}

// Aligned human-readable table.
inline std::string render_table(const std::vector<std::string>& header,
                                const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size() && c < widths.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < widths.size(); ++c) {
      const std::string& cell = c < row.size() ? row[c] : "";
      out << std::left << std::setw(static_cast<int>(widths[c]) + 2) << cell;
    }
    out << '\n';
  };
  emit(header);
  {
    std::vector<std::string> rule;
    for (auto w : widths) rule.push_back(std::string(w, '-'));
    emit(rule);
  }
  for (const auto& row : rows) emit(row);
  return out.str();
}

inline std::string report_dir(const std::string& root, Task task, const std::string& domain,
                              const std::string& model) {
  return root + "/" + task_name(task) + "/" + domain + "/" + model;
}

// Sparse feature-vector line: "id index:value index:value ...", zeros elided.
inline std::string render_feature_vector(const std::string& id, const std::vector<double>& values) {
  std::ostringstream out;
  out << id;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) continue;
    char buf[48];
    std::snprintf(buf, sizeof buf, " %zu:%.12g", i, values[i]);
    out << buf;
  }
  return out.str();
}

}  // namespace cohere
