#include "varform/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "varform/errors.hpp"

namespace varform {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string report_to_json(const TestReport& report) {
  std::ostringstream out;
  auto list = [&out](const auto& values, auto&& fmt) {
    out << "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) out << ", ";
      out << fmt(values[i]);
    }
    out << "]";
  };
  out << "{\n";
  out << "  \"g_normalized\": " << format_full(report.g_normalized) << ",\n";
  out << "  \"k_normalized\": " << format_full(report.k_normalized) << ",\n";
  out << "  \"alphas\": ";
  list(report.alphas, format_full);
  out << ",\n  \"critical_values\": ";
  list(report.critical_values, format_full);
  out << ",\n  \"decisions\": ";
  list(report.reject, [](bool b) { return b ? "true" : "false"; });
  out << ",\n  \"p_value\": " << format_full(report.p_value) << ",\n";
  out << "  \"diagnostics\": {\n";
  out << "    \"h_cv\": " << format_full(report.h_cv) << ",\n";
  out << "    \"beta_bandwidth\": " << format_full(report.beta_bandwidth)
      << ",\n";
  out << "    \"t0\": " << format_full(report.t0) << ",\n";
  out << "    \"fn_t0\": " << format_full(report.fn_t0) << ",\n";
  out << "    \"max_condition_number\": " << format_full(report.max_condition)
      << ",\n";
  out << "    \"gram_condition_number\": "
      << format_full(report.gram_condition) << ",\n";
  out << "    \"floor_count\": " << report.floor_count << ",\n";
  out << "    \"n\": " << report.n << ",\n";
  out << "    \"family_dim\": " << report.family_dim << ",\n";
  out << "    \"family\": \"" << report.family << "\"\n";
  out << "  }\n";
  out << "}\n";
  return out.str();
}

std::string trajectory_csv(const StepProcess& lambda,
                           const TransformedProcess& transformed) {
  std::ostringstream out;
  out << "t,lambda,transformed\n";
  for (std::size_t j = 0; j < lambda.times.size(); ++j) {
    out << format_full(lambda.times[j]) << ","
        << format_full(lambda.values[j]) << ",";
    if (j < transformed.values.size()) out << format_full(transformed.values[j]);
    out << "\n";
  }
  return out.str();
}

std::string rejection_table_csv(const RejectionTable& table) {
  // Collect the distinct n values in first-appearance order.
  std::vector<int> sizes;
  for (const auto& cell : table.cells) {
    bool seen = false;
    for (int n : sizes) seen = seen || n == cell.cell.n;
    if (!seen) sizes.push_back(cell.cell.n);
  }
  std::ostringstream out;
  out << "model,c";
  for (int n : sizes) {
    for (double a : table.alphas) {
      out << ",p_n" << n << "_a" << format_short(a);
    }
  }
  for (int n : sizes) {
    for (double a : table.alphas) {
      out << ",se_n" << n << "_a" << format_short(a);
    }
  }
  out << "\n";
  // One row per (model, c) pair in first-appearance order.
  std::vector<std::pair<ScenarioModel, double>> rows;
  for (const auto& cell : table.cells) {
    bool seen = false;
    for (const auto& row : rows) {
      seen = seen ||
             (row.first == cell.cell.model && row.second == cell.cell.c);
    }
    if (!seen) rows.emplace_back(cell.cell.model, cell.cell.c);
  }
  for (const auto& row : rows) {
    out << model_name(row.first) << "," << format_short(row.second);
    auto emit = [&](bool se) {
      for (int n : sizes) {
        const RejectionCell* found = nullptr;
        for (const auto& cell : table.cells) {
          if (cell.cell.model == row.first && cell.cell.c == row.second &&
              cell.cell.n == n) {
            found = &cell;
          }
        }
        for (std::size_t a = 0; a < table.alphas.size(); ++a) {
          out << ",";
          if (found) {
            out << format_short(se ? found->standard_errors[a]
                                   : found->proportions[a]);
          }
        }
      }
    };
    emit(false);
    emit(true);
    out << "\n";
  }
  out << "# bootstrap comparator columns of the source study are not "
         "implemented; see Dette & Hetzler (2008)\n";
  return out.str();
}

std::string critical_value_csv(const CriticalValueTable& table) {
  std::ostringstream out;
  out << "law,alpha,quantile,samples,seed\n";
  for (std::size_t i = 0; i < table.alphas.size(); ++i) {
    out << law_name(table.law) << "," << format_full(table.alphas[i]) << ","
        << format_full(table.quantiles[i]) << "," << table.samples << ","
        << table.seed << "\n";
  }
  return out.str();
}

namespace {

double parse_number(const std::string& field, int line_no, const char* what) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != field.size() || field.empty() || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "input CSV row " << line_no << ": cannot parse " << what << " '"
        << field << "'";
    throw ContractError(msg.str());
  }
  return value;
}

}  // namespace

Sample parse_sample_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw ContractError("input CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,y") {
    throw ContractError("input CSV must start with the header 't,y', got '" +
                        line + "'");
  }
  Sample sample;
  sample.grid.density = Density::uniform();
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      std::ostringstream msg;
      msg << "input CSV row " << line_no << ": expected 't,y', got '" << line
          << "'";
      throw ContractError(msg.str());
    }
    const double t = parse_number(line.substr(0, comma), line_no, "t");
    const double y = parse_number(line.substr(comma + 1), line_no, "y");
    if (t < 0.0 || t > 1.0) {
      std::ostringstream msg;
      msg << "input CSV row " << line_no << ": t = " << t
          << " outside [0, 1]";
      throw ContractError(msg.str());
    }
    if (!sample.grid.points.empty() && t <= sample.grid.points.back()) {
      std::ostringstream msg;
      msg << "input CSV row " << line_no
          << ": t values must be strictly increasing (t = " << t
          << " after " << sample.grid.points.back() << ")";
      throw ContractError(msg.str());
    }
    sample.grid.points.push_back(t);
    sample.responses.push_back(y);
  }
  if (sample.grid.points.empty()) {
    throw ContractError("input CSV holds no data rows");
  }
  return sample;
}

Sample read_sample_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open input file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sample_csv(buf.str());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot open output file '" + path + "'");
  out << content;
  if (!out) throw ContractError("failed writing output file '" + path + "'");
}

}  // namespace varform
