#pragma once

// File formats: mixing-measure CSV (+ JSON atom sidecar), observation and
// decision CSVs, trace CSV, and the JSON study report.  All numbers go
// through format_double so identical inputs produce identical bytes.

#include <string>
#include <vector>

#include <json.hpp>

#include "predrec/baseball.hpp"
#include "predrec/decision.hpp"
#include "predrec/mixing.hpp"
#include "predrec/risk_sim.hpp"

namespace predrec {

// Columns: theta,density,weight.  Atoms go to the sidecar.
std::string measure_to_csv(const MixingMeasure& f);
nlohmann::json atoms_to_json(const MixingMeasure& f);
MixingMeasure measure_from_csv(const std::string& csv_text, const nlohmann::json& atoms_sidecar);

// Observation CSV: columns id,y[,param]; when the param column is missing
// every observation gets `default_param`.
struct ObservationRow {
    std::string id;
    Observation obs;
};
std::vector<ObservationRow> observations_from_csv(const std::string& csv_text,
                                                  double default_param);

// Decision CSVs: id,y,estimate for point estimation,
// id,y,posterior_prob,action for tests.
std::string decisions_to_csv(const std::vector<ObservationRow>& rows,
                             const std::vector<double>& estimates);
std::string decisions_to_csv(const std::vector<ObservationRow>& rows,
                             const std::vector<TestOutcome>& outcomes);

// Long-format trace: n,rep,excess_risk,kl.
std::string trace_to_csv(const std::vector<TraceRow>& rows);

nlohmann::json trace_summary_to_json(const TraceSummary& summary);

nlohmann::json study_report_to_json(const StudyReport& report);

nlohmann::json assumption_report_to_json(const AssumptionReport& report);

}  // namespace predrec
