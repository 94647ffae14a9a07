#ifndef VARFORM_REPORT_HPP_
#define VARFORM_REPORT_HPP_

#include <string>

#include "varform/core.hpp"
#include "varform/montecarlo.hpp"
#include "varform/process.hpp"
#include "varform/transform.hpp"

namespace varform {

// Numbers carry 17 significant digits in machine-readable output.
std::string format_full(double v);
// Human-readable tables use 6 significant digits.
std::string format_short(double v);

std::string report_to_json(const TestReport& report);

// Rows (t_j, Lambda(t_j), (T_n Lambda)(t_j)); the transformed column is empty
// beyond t0.
std::string trajectory_csv(const StepProcess& lambda,
                           const TransformedProcess& transformed);

// Table 5.1 layout: one row per (model, c), value columns n x alpha, then
// matching Monte Carlo standard-error columns.
std::string rejection_table_csv(const RejectionTable& table);

std::string critical_value_csv(const CriticalValueTable& table);

// Parses a two-column CSV with header "t,y"; validates ordering and range.
Sample parse_sample_csv(const std::string& text);
Sample read_sample_csv(const std::string& path);

void write_file(const std::string& path, const std::string& content);

}  // namespace varform

#endif  // VARFORM_REPORT_HPP_
