#include "betarestrict/io.hpp"

#include "betarestrict/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace betarestrict::io {

CsvTable parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool record_has_content = false;

  auto end_field = [&]() {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&]() {
    if (record_has_content || !record.empty() || field_started) {
      end_field();
      records.push_back(std::move(record));
    }
    record.clear();
    record_has_content = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw DomainError("csv: quote inside an unquoted field");
        in_quotes = true;
        field_started = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
        record_has_content = true;
    }
  }
  if (in_quotes) throw DomainError("csv: unterminated quoted field");
  end_record();

  if (records.empty()) throw DomainError("csv: no header row");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw DomainError("csv: record " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                        " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open data file '" + path + "'");
  return parse_csv(in);
}

namespace {

std::optional<double> parse_number(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t");
  std::size_t end = text.find_last_not_of(" \t");
  if (begin == std::string::npos) return std::nullopt;
  const char* first = text.data() + begin;
  const char* last = text.data() + end + 1;
  if (*first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

}  // namespace

Dataset dataset_from_csv(const CsvTable& table, const DatasetSpec& spec) {
  std::ptrdiff_t response_col = -1;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j] == spec.response) response_col = static_cast<std::ptrdiff_t>(j);
  }
  if (response_col < 0) throw DomainError("data: response column '" + spec.response + "' not found in header");
  const auto n = static_cast<Index>(table.rows.size());
  if (n == 0) throw DomainError("data: no observations");

  std::vector<std::size_t> covariates;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) == response_col) continue;
    std::size_t numeric = 0;
    for (const auto& row : table.rows) numeric += parse_number(row[j]).has_value() ? 1 : 0;
    if (numeric == 0) continue;
    if (numeric != table.rows.size()) {
      throw DomainError("data: column '" + table.header[j] + "' mixes numeric and non-numeric entries");
    }
    covariates.push_back(j);
  }

  const Index offset = spec.intercept ? 1 : 0;
  const Index p = static_cast<Index>(covariates.size()) + offset;
  if (p == 0) throw DomainError("data: no numeric covariate columns");
  MatrixXd X(n, p);
  VectorXd y(n);
  std::vector<std::string> names;
  if (spec.intercept) names.emplace_back("intercept");
  for (auto j : covariates) names.push_back(table.header[j]);

  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const auto yi = parse_number(row[static_cast<std::size_t>(response_col)]);
    if (!yi) throw DomainError("data: response in row " + std::to_string(i + 1) + " is not numeric");
    y[i] = *yi;
    if (spec.intercept) X(i, 0) = 1.0;
    for (std::size_t k = 0; k < covariates.size(); ++k) {
      X(i, static_cast<Index>(k) + offset) = *parse_number(row[covariates[k]]);
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (!(y[i] >= 0.0 && y[i] <= 1.0)) {
      throw DomainError("data: response in row " + std::to_string(i + 1) + " is outside [0,1]");
    }
  }
  if ((y.array() == 0.0).any() || (y.array() == 1.0).any()) y = rescale_response(y);
  return make_dataset(std::move(X), std::move(y), spec.gamma, std::move(names));
}

ConstraintSet constraints_from_json(const nlohmann::json& doc, Index p, bool intercept_injected) {
  const nlohmann::json* rows = &doc;
  if (doc.is_object()) {
    if (!doc.contains("rows")) throw InvalidConstraintError("constraints: expected a \"rows\" array");
    rows = &doc.at("rows");
  }
  if (!rows->is_array()) throw InvalidConstraintError("constraints: rows must be an array");

  std::vector<ConstraintRow> parsed;
  for (std::size_t r = 0; r < rows->size(); ++r) {
    const auto& row = (*rows)[r];
    const std::string where = "constraints: row " + std::to_string(r + 1);
    if (!row.is_object() || !row.contains("coeffs") || !row.contains("op") || !row.contains("bound")) {
      throw InvalidConstraintError(where + " needs \"coeffs\", \"op\" and \"bound\"");
    }
    std::vector<double> coeffs;
    try {
      coeffs = row.at("coeffs").get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidConstraintError(where + ": coeffs must be an array of numbers");
    }
    if (intercept_injected && static_cast<Index>(coeffs.size()) == p - 1) coeffs.insert(coeffs.begin(), 0.0);
    if (static_cast<Index>(coeffs.size()) != p) {
      throw ShapeError(where + " has " + std::to_string(coeffs.size()) + " coefficients, the design has " +
                       std::to_string(p) + " columns");
    }
    const auto& op_node = row.at("op");
    const std::string op = op_node.is_string() ? op_node.get<std::string>() : std::string();
    Relation rel;
    if (op == "le" || op == "<=") {
      rel = Relation::LessEqual;
    } else if (op == "ge" || op == ">=") {
      rel = Relation::GreaterEqual;
    } else {
      throw InvalidConstraintError(where + ": op must be \"le\" or \"ge\"");
    }
    if (!row.at("bound").is_number()) throw InvalidConstraintError(where + ": bound must be a number");
    parsed.push_back({Eigen::Map<const VectorXd>(coeffs.data(), p), rel, row.at("bound").get<double>()});
  }
  return normalize(parsed);
}

ConstraintSet read_constraints_file(const std::string& path, Index p, bool intercept_injected) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open constraints file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConstraintError("constraints file '" + path + "' is not valid JSON: " + e.what());
  }
  return constraints_from_json(doc, p, intercept_injected);
}

std::string format_full(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_display(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

nlohmann::json fit_to_json(const FitResult& fit, const std::vector<std::string>& names) {
  nlohmann::json doc;
  doc["method"] = std::string(to_string(fit.method));
  doc["coefficients"] = names;
  doc["estimates"] = std::vector<double>(fit.estimates.data(), fit.estimates.data() + fit.estimates.size());
  doc["sd"] = std::vector<double>(fit.sd.data(), fit.sd.data() + fit.sd.size());
  nlohmann::json diag = nlohmann::json::object();
  if (fit.diagnostics.acceptance_rate) diag["acceptance_rate"] = *fit.diagnostics.acceptance_rate;
  if (fit.diagnostics.rhat) {
    diag["rhat"] = std::vector<double>(fit.diagnostics.rhat->data(),
                                       fit.diagnostics.rhat->data() + fit.diagnostics.rhat->size());
  }
  if (fit.diagnostics.iterations) diag["iterations"] = *fit.diagnostics.iterations;
  if (fit.diagnostics.ridge_k) diag["ridge_k"] = *fit.diagnostics.ridge_k;
  diag["warnings"] = fit.diagnostics.warnings;
  doc["diagnostics"] = diag;
  return doc;
}

namespace {

void write_manifest_comment(std::ostream& out, const nlohmann::json& manifest, const MetricsTable& table) {
  out << "# manifest: " << manifest.dump() << "\n";
  out << "# reference: " << table.reference_label << "\n";
  out << "# replications completed: " << table.completed << ", failed: " << table.failures.size() << "\n";
}

}  // namespace

void write_metrics_csv(std::ostream& out, const MetricsTable& table, const nlohmann::json& manifest) {
  write_manifest_comment(out, manifest, table);
  out << "estimator,coefficient,estimate,sd,mse,re\n";
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < table.coefficient_names.size(); ++j) {
      const auto k = static_cast<Index>(j);
      out << to_string(row.method) << ',' << table.coefficient_names[j] << ',' << format_full(row.mean[k]) << ','
          << format_full(row.sd[k]) << ',' << format_full(row.mse[k]) << ',' << format_full(row.re[k]) << "\n";
    }
  }
}

void write_tsre_csv(std::ostream& out, const MetricsTable& table, const nlohmann::json& manifest) {
  write_manifest_comment(out, manifest, table);
  out << "estimator,tsre\n";
  for (const auto& row : table.rows) out << to_string(row.method) << ',' << format_full(row.tsre) << "\n";
}

void write_metrics_markdown(std::ostream& out, const MetricsTable& table, const nlohmann::json& manifest,
                            const std::string& title) {
  out << "<!-- manifest: " << manifest.dump() << " -->\n\n";
  out << "## " << title << "\n\n";
  out << "| Parameter | Estimator | Estimates | SD | MSE | RE |\n";
  out << "|---|---|---:|---:|---:|---:|\n";
  for (std::size_t j = 0; j < table.coefficient_names.size(); ++j) {
    const auto k = static_cast<Index>(j);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      out << "| " << (r == 0 ? table.coefficient_names[j] : "") << " | " << to_string(row.method) << " | "
          << format_display(row.mean[k]) << " | " << format_display(row.sd[k]) << " | "
          << format_display(row.mse[k]) << " | " << format_display(row.re[k]) << " |\n";
    }
  }
  out << "\n| | ";
  for (const auto& row : table.rows) out << to_string(row.method) << " | ";
  out << "\n|---|";
  for (std::size_t r = 0; r < table.rows.size(); ++r) out << "---:|";
  out << "\n| TSRE | ";
  for (const auto& row : table.rows) out << format_display(row.tsre) << " | ";
  out << "\n\nReplications completed: " << table.completed << ", failed: " << table.failures.size()
      << ". Reference: " << table.reference_label << ".\n";
}

void write_bootstrap_markdown(std::ostream& out, const MetricsTable& table, const nlohmann::json& manifest,
                              const std::string& title) {
  out << "<!-- manifest: " << manifest.dump() << " -->\n\n";
  out << "## " << title << "\n\n| |";
  for (const auto& row : table.rows) out << ' ' << to_string(row.method) << " Estimates | " << to_string(row.method) << " SD |";
  out << "\n|---|";
  for (std::size_t r = 0; r < table.rows.size(); ++r) out << "---:|---:|";
  out << "\n";
  for (std::size_t j = 0; j < table.coefficient_names.size(); ++j) {
    const auto k = static_cast<Index>(j);
    out << "| " << table.coefficient_names[j] << " |";
    for (const auto& row : table.rows) out << ' ' << format_display(row.mean[k]) << " | " << format_display(row.sd[k]) << " |";
    out << "\n";
  }
  out << "\n| |";
  for (const auto& row : table.rows) out << ' ' << to_string(row.method) << " |";
  out << "\n|---|";
  for (std::size_t r = 0; r < table.rows.size(); ++r) out << "---:|";
  out << "\n| TSRE |";
  for (const auto& row : table.rows) out << ' ' << format_display(row.tsre) << " |";
  out << "\n\nReplications completed: " << table.completed << ", failed: " << table.failures.size()
      << ". MSE reference: " << table.reference_label << ".\n";
}

}  // namespace betarestrict::io
