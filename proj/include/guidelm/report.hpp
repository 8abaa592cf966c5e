#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "guidelm/evalkit.hpp"

namespace guidelm::evalkit {

/// Header of the acceptance-rate CSV: "Category,<model>,...".
std::string acceptance_csv(const AggregateReport& report, EventKind kind);
/// "Model,First,Second,Third,Fourth,Unranked" plus one row per model.
std::string rank_csv(const AggregateReport& report, EventKind kind);
/// Table of fine-tune deltas: one column per (pairing, kind), one row per rubric property.
std::string delta_csv(const AggregateReport& report);
/// "Model,CT,RT" first-choice shares.
std::string first_choice_csv(const AggregateReport& report);
/// "Pairing,Property,Average" headline averages.
std::string headline_csv(const AggregateReport& report);

json to_json(const AggregateReport& report);
AggregateReport report_from_json(const json& j);

enum class ReportFormat { json, csv };

/// Writes the requested formats into `dir` and returns the written paths.
/// CSV: ct_acceptance.csv, rt_acceptance.csv, ct_rank.csv, rt_rank.csv, deltas.csv,
/// first_choice.csv, headlines.csv. JSON: report.json.
std::vector<std::filesystem::path> emit_report(const AggregateReport& report, const std::set<ReportFormat>& formats,
                                               const std::filesystem::path& dir);

/// Parses an acceptance CSV in the layout written by acceptance_csv. `models` receives the
/// header's model columns in order.
RateTable parse_acceptance_csv(std::string_view text, EventKind kind, std::vector<std::string>& models);

/// Parses a rank CSV in the layout written by rank_csv.
RankTable parse_rank_csv(std::string_view text, EventKind kind);

/// Builds a report from a directory holding ct_acceptance.csv, rt_acceptance.csv,
/// ct_rank.csv and rt_rank.csv, the published per-figure data.
AggregateReport load_figure_report(const std::filesystem::path& dir, const std::vector<Pairing>& pairings);

}  // namespace guidelm::evalkit
