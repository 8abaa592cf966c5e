#include "guidelm/report.hpp"

#include <algorithm>
#include <sstream>

#include "guidelm/corpus.hpp"
#include "guidelm/errors.hpp"

namespace guidelm::evalkit {
namespace {

std::string_view kind_prefix(EventKind kind) {
    return kind == EventKind::compile_time ? "CT" : "RT";
}

std::string_view file_prefix(EventKind kind) {
    return kind == EventKind::compile_time ? "ct" : "rt";
}

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::vector<std::string>> rows_of(std::string_view text, std::string_view what) {
    std::vector<LineError> errors;
    auto rows = corpus::parse_csv(text, errors);
    if (!errors.empty()) throw ValidationError(std::string(what) + ": line " + std::to_string(errors[0].line) + ": " +
                                               errors[0].reason);
    std::vector<std::vector<std::string>> out;
    for (auto& r : rows) out.push_back(std::move(r.fields));
    return out;
}

std::size_t parse_count(const std::string& s) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty() || s.front() == '-') throw ValidationError("not a count: '" + s + "'");
    return v;
}

}  // namespace

std::string acceptance_csv(const AggregateReport& report, EventKind kind) {
    std::string out = "Category";
    for (const auto& m : report.models) out += "," + csv_field(m);
    out += '\n';
    for (auto p : kAllProperties) {
        bool any = false;
        std::string row = key(p);
        for (const auto& m : report.models) {
            row += ',';
            auto it = report.acceptance.find({kind, m, p});
            if (it != report.acceptance.end()) {
                row += it->second.str();
                any = true;
            }
        }
        if (any) out += row + '\n';
    }
    return out;
}

std::string rank_csv(const AggregateReport& report, EventKind kind) {
    std::string out = "Model,First,Second,Third,Fourth,Unranked\n";
    for (const auto& m : report.models) {
        auto it = report.ranks.find({kind, m});
        if (it == report.ranks.end()) continue;
        const auto& c = it->second;
        out += csv_field(m) + ',' + std::to_string(c.first) + ',' + std::to_string(c.second) + ',' +
               std::to_string(c.third) + ',' + std::to_string(c.fourth) + ',' + std::to_string(c.unranked) + '\n';
    }
    return out;
}

std::string delta_csv(const AggregateReport& report) {
    std::string out = "Category";
    for (const auto& pairing : report.pairings) {
        for (auto kind : kEventKinds) out += "," + csv_field(std::string(kind_prefix(kind)) + " " + pairing.name + " comp");
    }
    out += '\n';
    for (auto p : kAllProperties) {
        bool any = false;
        std::string row = csv_field(display_name(p));
        for (const auto& pairing : report.pairings) {
            for (auto kind : kEventKinds) {
                row += ',';
                auto it = report.deltas.find({kind, pairing.name, p});
                if (it != report.deltas.end()) {
                    row += it->second.str();
                    any = true;
                }
            }
        }
        if (any) out += row + '\n';
    }
    return out;
}

std::string first_choice_csv(const AggregateReport& report) {
    std::string out = "Model,CT,RT\n";
    for (const auto& m : report.models) {
        std::string row = csv_field(m);
        bool any = false;
        for (auto kind : kEventKinds) {
            row += ',';
            auto it = report.first_choice.find({kind, m});
            if (it != report.first_choice.end()) {
                row += it->second.str();
                any = true;
            }
        }
        if (any) out += row + '\n';
    }
    return out;
}

std::string headline_csv(const AggregateReport& report) {
    std::string out = "Pairing,Property,Average\n";
    for (const auto& pairing : report.pairings) {
        for (auto p : kAllProperties) {
            auto it = report.headlines.find({pairing.name, p});
            if (it == report.headlines.end()) continue;
            out += csv_field(pairing.name) + ',' + key(p) + ',' + std::to_string(it->second) + '\n';
        }
    }
    return out;
}

json to_json(const AggregateReport& report) {
    json pairings = json::array();
    for (const auto& p : report.pairings)
        pairings.push_back({{"name", p.name}, {"base", p.base}, {"fine_tune", p.fine_tune}});
    json acceptance = json::array();
    for (const auto& [k, rate] : report.acceptance) {
        acceptance.push_back({{"event_kind", promptgen::to_string(std::get<0>(k))},
                              {"model", std::get<1>(k)},
                              {"property", to_string(std::get<2>(k))},
                              {"rate", rate.to_double()}});
    }
    json deltas = json::array();
    for (const auto& [k, d] : report.deltas) {
        deltas.push_back({{"event_kind", promptgen::to_string(std::get<0>(k))},
                          {"pairing", std::get<1>(k)},
                          {"property", to_string(std::get<2>(k))},
                          {"delta", d.to_double()}});
    }
    json ranks = json::array();
    for (const auto& [k, c] : report.ranks) {
        auto share = report.first_choice.find(k);
        ranks.push_back({{"event_kind", promptgen::to_string(k.first)},
                         {"model", k.second},
                         {"first", c.first},
                         {"second", c.second},
                         {"third", c.third},
                         {"fourth", c.fourth},
                         {"unranked", c.unranked},
                         {"first_choice_share",
                          share == report.first_choice.end() ? json(nullptr) : json(share->second.to_double())}});
    }
    json headlines = json::array();
    for (const auto& [k, v] : report.headlines) {
        headlines.push_back({{"pairing", k.first}, {"property", to_string(k.second)}, {"average", v}});
    }
    return json{{"models", report.models}, {"pairings", pairings},   {"acceptance", acceptance},
                {"deltas", deltas},        {"ranks", ranks},         {"headlines", headlines}};
}

AggregateReport report_from_json(const json& j) {
    auto kind_of = [](const json& v) {
        auto k = promptgen::parse_event_kind(v.get<std::string>());
        if (!k) throw ValidationError("unknown event_kind");
        return *k;
    };
    auto prop_of = [](const json& v) {
        auto p = parse_property(v.get<std::string>());
        if (!p) throw ValidationError("unknown property");
        return *p;
    };
    try {
        AggregateReport r;
        r.models = j.at("models").get<std::vector<std::string>>();
        for (const auto& p : j.at("pairings"))
            r.pairings.push_back({p.at("name").get<std::string>(), p.at("base").get<std::string>(),
                                  p.at("fine_tune").get<std::string>()});
        for (const auto& a : j.at("acceptance"))
            r.acceptance[{kind_of(a.at("event_kind")), a.at("model").get<std::string>(), prop_of(a.at("property"))}] =
                Rate::from_double(a.at("rate").get<double>());
        for (const auto& d : j.at("deltas"))
            r.deltas[{kind_of(d.at("event_kind")), d.at("pairing").get<std::string>(), prop_of(d.at("property"))}] =
                Tenths::from_double(d.at("delta").get<double>());
        for (const auto& c : j.at("ranks")) {
            const RankKey k{kind_of(c.at("event_kind")), c.at("model").get<std::string>()};
            r.ranks[k] = {c.at("first").get<std::size_t>(), c.at("second").get<std::size_t>(),
                          c.at("third").get<std::size_t>(), c.at("fourth").get<std::size_t>(),
                          c.at("unranked").get<std::size_t>()};
            if (!c.at("first_choice_share").is_null())
                r.first_choice[k] = Tenths::from_double(c["first_choice_share"].get<double>());
        }
        for (const auto& h : j.at("headlines"))
            r.headlines[{h.at("pairing").get<std::string>(), prop_of(h.at("property"))}] =
                h.at("average").get<std::int64_t>();
        return r;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
}

std::vector<std::filesystem::path> emit_report(const AggregateReport& report, const std::set<ReportFormat>& formats,
                                               const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::string& name, const std::string& content) {
        write_file(dir / name, content);
        written.push_back(dir / name);
    };
    if (formats.contains(ReportFormat::csv)) {
        for (auto kind : kEventKinds) {
            put(std::string(file_prefix(kind)) + "_acceptance.csv", acceptance_csv(report, kind));
            put(std::string(file_prefix(kind)) + "_rank.csv", rank_csv(report, kind));
        }
        put("deltas.csv", delta_csv(report));
        put("first_choice.csv", first_choice_csv(report));
        put("headlines.csv", headline_csv(report));
    }
    if (formats.contains(ReportFormat::json)) put("report.json", to_json(report).dump(2) + '\n');
    return written;
}

RateTable parse_acceptance_csv(std::string_view text, EventKind kind, std::vector<std::string>& models) {
    const auto rows = rows_of(text, "acceptance CSV");
    if (rows.empty() || rows[0].empty() || rows[0][0] != "Category")
        throw ValidationError("acceptance CSV must start with a 'Category' header");
    models.assign(rows[0].begin() + 1, rows[0].end());
    RateTable out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto p = parse_property(row.at(0));
        if (!p) throw ValidationError("acceptance CSV: unknown category '" + row[0] + "'");
        if (row.size() != models.size() + 1)
            throw ValidationError("acceptance CSV: row " + row[0] + " has the wrong number of columns");
        for (std::size_t m = 0; m < models.size(); ++m) {
            if (row[m + 1].empty()) continue;
            out[{kind, models[m], *p}] = Rate::parse(row[m + 1]);
        }
    }
    return out;
}

RankTable parse_rank_csv(std::string_view text, EventKind kind) {
    const auto rows = rows_of(text, "rank CSV");
    static const std::vector<std::string> header = {"Model", "First", "Second", "Third", "Fourth", "Unranked"};
    if (rows.empty() || rows[0] != header)
        throw ValidationError("rank CSV must start with 'Model,First,Second,Third,Fourth,Unranked'");
    RankTable out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) throw ValidationError("rank CSV: malformed row for '" + row.at(0) + "'");
        out[{kind, row[0]}] = {parse_count(row[1]), parse_count(row[2]), parse_count(row[3]), parse_count(row[4]),
                               parse_count(row[5])};
    }
    return out;
}

AggregateReport load_figure_report(const std::filesystem::path& dir, const std::vector<Pairing>& pairings) {
    RateTable rates;
    RankTable ranks;
    std::vector<std::string> models;
    for (auto kind : kEventKinds) {
        std::vector<std::string> header_models;
        auto r = parse_acceptance_csv(read_file(dir / (std::string(file_prefix(kind)) + "_acceptance.csv")), kind,
                                      header_models);
        if (models.empty()) {
            models = header_models;
        } else if (models != header_models) {
            throw ValidationError("acceptance CSVs disagree on the model columns");
        }
        rates.merge(r);
        auto k = parse_rank_csv(read_file(dir / (std::string(file_prefix(kind)) + "_rank.csv")), kind);
        ranks.merge(k);
    }
    return build_report(std::move(models), pairings, std::move(rates), std::move(ranks));
}

}  // namespace guidelm::evalkit
