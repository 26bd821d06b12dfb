#pragma once

// File formats: data CSV in, constraint JSON in, result tables and fit
// documents out.

#include "betarestrict/constraints.hpp"
#include "betarestrict/experiments.hpp"
#include "betarestrict/fit_result.hpp"
#include "betarestrict/model.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace betarestrict::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180: quoted fields, doubled quotes, embedded separators and line
/// breaks, CRLF or LF endings. The first record is the header.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

struct DatasetSpec {
  std::string response;
  double gamma = 1.0;
  bool intercept = false;
};

/// Response column by name; every other numeric column joins X in file
/// order. Columns with no numeric entries are skipped. Responses touching
/// 0 or 1 are rescaled into (0,1).
Dataset dataset_from_csv(const CsvTable& table, const DatasetSpec& spec);

/// Rows are {"coeffs": [...], "op": "le"|"ge", "bound": x}, either as a
/// top-level array or under "rows". When `intercept_injected` is set,
/// coefficient lists one shorter than p get a leading zero.
ConstraintSet constraints_from_json(const nlohmann::json& doc, Index p, bool intercept_injected = false);
ConstraintSet read_constraints_file(const std::string& path, Index p, bool intercept_injected = false);

/// 17 significant digits, "NA" for NaN.
std::string format_full(double v);
/// Fixed 4 decimals, "NA" for NaN.
std::string format_display(double v);

nlohmann::json fit_to_json(const FitResult& fit, const std::vector<std::string>& names);

/// estimator,coefficient,estimate,sd,mse,re
void write_metrics_csv(std::ostream& out, const MetricsTable& table, const nlohmann::json& manifest);
/// estimator,tsre
void write_tsre_csv(std::ostream& out, const MetricsTable& table, const nlohmann::json& manifest);
/// Coefficient blocks with one line per estimator: Estimates, SD, MSE, RE.
void write_metrics_markdown(std::ostream& out, const MetricsTable& table, const nlohmann::json& manifest,
                            const std::string& title);
/// Estimators side by side (Estimates, SD each), then a TSRE row.
void write_bootstrap_markdown(std::ostream& out, const MetricsTable& table, const nlohmann::json& manifest,
                              const std::string& title);

}  // namespace betarestrict::io
