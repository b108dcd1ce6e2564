#include "predrec/io.hpp"

#include <algorithm>
#include <sstream>

#include "predrec/csv.hpp"
#include "predrec/errors.hpp"

namespace predrec {

std::string measure_to_csv(const MixingMeasure& f) {
    std::ostringstream out;
    out << "theta,density,weight\n";
    for (std::size_t j = 0; j < f.size(); ++j)
        out << format_double(f.nodes()[j]) << ',' << format_double(f.density()[j]) << ','
            << format_double(f.weights()[j]) << '\n';
    return out.str();
}

nlohmann::json atoms_to_json(const MixingMeasure& f) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const Atom& atom : f.atoms())
        atoms.push_back({{"location", atom.location}, {"mass", atom.mass}});
    return nlohmann::json{{"atoms", atoms}};
}

MixingMeasure measure_from_csv(const std::string& csv_text, const nlohmann::json& atoms_sidecar) {
    const CsvTable table = parse_csv(csv_text);
    const int theta_col = table.column("theta");
    const int density_col = table.column("density");
    const int weight_col = table.column("weight");
    if (theta_col < 0 || density_col < 0 || weight_col < 0)
        throw ConfigError("measure CSV must have columns theta,density,weight");
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> density;
    for (const auto& row : table.rows) {
        nodes.push_back(parse_double(row.at(static_cast<std::size_t>(theta_col)), "theta"));
        density.push_back(parse_double(row.at(static_cast<std::size_t>(density_col)), "density"));
        weights.push_back(parse_double(row.at(static_cast<std::size_t>(weight_col)), "weight"));
    }
    std::vector<Atom> atoms;
    if (atoms_sidecar.contains("atoms"))
        for (const auto& entry : atoms_sidecar.at("atoms"))
            atoms.push_back(Atom{entry.at("location").get<double>(), entry.at("mass").get<double>()});
    return MixingMeasure(std::move(nodes), std::move(weights), std::move(density), std::move(atoms));
}

std::vector<ObservationRow> observations_from_csv(const std::string& csv_text,
                                                  double default_param) {
    const CsvTable table = parse_csv(csv_text);
    const int id_col = table.column("id");
    const int y_col = table.column("y");
    if (id_col < 0 || y_col < 0) throw ConfigError("observation CSV must have columns id,y");
    const int param_col = table.column("param");
    const int max_col = std::max({id_col, y_col, param_col});
    std::vector<ObservationRow> rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (static_cast<int>(row.size()) <= max_col)
            throw ConfigError("observation CSV row " + std::to_string(r + 2) + " has too few fields");
        ObservationRow out;
        out.id = row[static_cast<std::size_t>(id_col)];
        out.obs.y = parse_double(row[static_cast<std::size_t>(y_col)], "y");
        out.obs.param = param_col >= 0
                            ? parse_double(row[static_cast<std::size_t>(param_col)], "param")
                            : default_param;
        rows.push_back(std::move(out));
    }
    return rows;
}

std::string decisions_to_csv(const std::vector<ObservationRow>& rows,
                             const std::vector<double>& estimates) {
    std::ostringstream out;
    out << "id,y,estimate\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        out << rows[i].id << ',' << format_double(rows[i].obs.y) << ','
            << format_double(estimates[i]) << '\n';
    return out.str();
}

std::string decisions_to_csv(const std::vector<ObservationRow>& rows,
                             const std::vector<TestOutcome>& outcomes) {
    std::ostringstream out;
    out << "id,y,posterior_prob,action\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        out << rows[i].id << ',' << format_double(rows[i].obs.y) << ','
            << format_double(outcomes[i].posterior_prob) << ','
            << (outcomes[i].action == Action::AcceptNull ? "a0" : "a1") << '\n';
    return out.str();
}

std::string trace_to_csv(const std::vector<TraceRow>& rows) {
    std::ostringstream out;
    out << "n,rep,excess_risk,kl\n";
    for (const TraceRow& row : rows)
        out << row.n << ',' << row.replication << ',' << format_double(row.excess_risk) << ','
            << format_double(row.kl) << '\n';
    return out.str();
}

nlohmann::json trace_summary_to_json(const TraceSummary& summary) {
    nlohmann::json per_n = nlohmann::json::array();
    for (std::size_t i = 0; i < summary.sample_sizes.size(); ++i)
        per_n.push_back({{"n", summary.sample_sizes[i]},
                         {"median_excess_risk", summary.median_excess_risk[i]},
                         {"median_kl", summary.median_kl[i]}});
    return nlohmann::json{{"medians", per_n}};
}

nlohmann::json study_report_to_json(const StudyReport& report) {
    nlohmann::json out;
    // Relative errors nest method -> group; group-level counts ride separately.
    nlohmann::json methods = nlohmann::json::object();
    auto add_group = [&methods](const GroupReport& group) {
        for (const MethodResult& m : group.methods)
            methods[m.method][group.group] = {
                {"relative_error", m.relative_error},
                {"source", m.computed ? "computed" : "published"}};
    };
    auto group_json = [](const GroupReport& group) {
        return nlohmann::json{
            {"n_train", group.n_train}, {"n_test", group.n_test}, {"gamma", group.gamma}};
    };
    out["groups"] = nlohmann::json::object();
    if (report.pitchers) {
        add_group(*report.pitchers);
        out["groups"]["pitchers"] = group_json(*report.pitchers);
    }
    if (report.non_pitchers) {
        add_group(*report.non_pitchers);
        out["groups"]["non_pitchers"] = group_json(*report.non_pitchers);
    }
    out["methods"] = methods;
    out["warnings"] = report.warnings;
    return out;
}

nlohmann::json assumption_report_to_json(const AssumptionReport& report) {
    return nlohmann::json{
        {"a2", {{"bounded", report.a2_bounded}, {"max_density", report.a2_max_density}}},
        {"a3",
         {{"satisfied", report.a3_satisfied},
          {"from_override", report.a3_from_override},
          {"sum_w_prefix", report.a3_sum_w_prefix},
          {"sum_w2_prefix", report.a3_sum_w2_prefix}}},
        {"a4",
         {{"bound", report.a4.bound},
          {"finite", report.a4.finite},
          {"lattice_points", report.a4.lattice_points}}}};
}

}  // namespace predrec
