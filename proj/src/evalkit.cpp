#include "guidelm/evalkit.hpp"

#include <algorithm>
#include <set>

#include "guidelm/errors.hpp"
#include "guidelm/util/random.hpp"

namespace guidelm::evalkit {
namespace {

constexpr std::array<std::string_view, 9> kLabels = {
    "conceptually_accurate", "inaccuracy_present", "suggestions_correct",
    "relevant_to_error",     "relevant_to_novice", "complete_explanation",
    "overhelpful",           "economy_of_words",   "socratic_guidance",
};

constexpr std::array<std::string_view, 9> kDisplayNames = {
    "Conceptual Accuracy",   "Inaccuracy Present",     "Suggestions Correct",
    "Relevant to the Error", "Relevant to the Novice", "Complete Explanation",
    "Overhelpful",           "Economy of Words",       "Socratic Guidance",
};

std::size_t index_of(RubricProperty p) {
    return static_cast<std::size_t>(p);
}

EventKind parse_kind_or_throw(const json& j) {
    if (!j.is_string()) throw ValidationError("event_kind: must be a string");
    auto kind = promptgen::parse_event_kind(j.get<std::string>());
    if (!kind) throw ValidationError("event_kind: unknown value '" + j.get<std::string>() + "'");
    return *kind;
}

}  // namespace

std::string_view to_string(RubricProperty p) {
    return kLabels[index_of(p)];
}

std::string key(RubricProperty p) {
    return "C" + std::to_string(index_of(p) + 1);
}

std::string_view display_name(RubricProperty p) {
    return kDisplayNames[index_of(p)];
}

std::optional<RubricProperty> parse_property(std::string_view name) {
    for (auto p : kAllProperties) {
        if (to_string(p) == name || key(p) == name) return p;
    }
    return std::nullopt;
}

const std::string& EvalItem::text_for_slot(std::size_t slot) const {
    const auto& model = model_for_slot(slot);
    for (const auto& r : responses) {
        if (r.model_id == model) return r.text;
    }
    throw ValidationError("item " + item_id + " has no response for its slot " + std::to_string(slot));
}

std::string slot_label(std::size_t slot) {
    std::string label;
    ++slot;
    while (slot > 0) {
        --slot;
        label.insert(label.begin(), static_cast<char>('A' + slot % 26));
        slot /= 26;
    }
    return label;
}

const EvalItem* Session::find(std::string_view item_id) const {
    for (const auto& item : items) {
        if (item.item_id == item_id) return &item;
    }
    return nullptr;
}

Session make_sessions(const std::vector<promptgen::ErrorEvent>& events, const std::vector<std::string>& models,
                      const ModelOutputs& outputs, std::uint64_t seed, std::size_t calibration_count) {
    if (calibration_count > events.size())
        throw ValidationError("calibration_count " + std::to_string(calibration_count) + " exceeds " +
                              std::to_string(events.size()) + " events");
    if (std::set<std::string>(models.begin(), models.end()).size() != models.size())
        throw ValidationError("model ids must be distinct");
    Session session;
    session.seed = seed;
    session.models = models;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& event = events[i];
        if (!ids.insert(event.id).second) throw ValidationError("duplicate event id '" + event.id + "'");
        EvalItem item;
        item.item_id = event.id;
        item.event_kind = event.kind;
        item.calibration = i < calibration_count;
        item.source_code = event.source_code;
        item.error_and_explanation = event.error_and_explanation;
        for (const auto& model : models) {
            auto m = outputs.find(model);
            if (m == outputs.end()) throw ValidationError("missing outputs for model '" + model + "'");
            auto t = m->second.find(event.id);
            if (t == m->second.end())
                throw ValidationError("missing output of model '" + model + "' for item '" + event.id + "'");
            item.responses.push_back({model, t->second});
        }
        item.blind_labels = models;
        Rng rng(splitmix64(seed ^ splitmix64(i)));
        rng.shuffle(std::span(item.blind_labels));
        session.items.push_back(std::move(item));
    }
    return session;
}

void assign_raters(Session& session, const std::vector<std::string>& raters) {
    session.rater_items.clear();
    if (raters.empty()) return;
    for (const auto& r : raters) session.rater_items[r];
    for (const auto& item : session.items) {
        if (!item.calibration) continue;
        for (const auto& r : raters) session.rater_items[r].push_back(item.item_id);
    }
    std::size_t next = 0;
    for (const auto& item : session.items) {
        if (item.calibration) continue;
        session.rater_items[raters[next++ % raters.size()]].push_back(item.item_id);
    }
}

ModelOutputs generate_outputs(const std::vector<promptgen::ErrorEvent>& events,
                              const std::vector<std::pair<std::string, llm::ChatClient*>>& models) {
    ModelOutputs out;
    for (const auto& [model, client] : models) {
        auto& texts = out[model];
        for (const auto& event : events) texts[event.id] = client->complete(promptgen::build_prompt(event)).text;
    }
    return out;
}

json to_json(const Session& session) {
    json items = json::array();
    for (const auto& item : session.items) {
        json responses = json::array();
        for (const auto& r : item.responses) responses.push_back({{"model_id", r.model_id}, {"text", r.text}});
        items.push_back({{"item_id", item.item_id},
                         {"event_kind", promptgen::to_string(item.event_kind)},
                         {"calibration", item.calibration},
                         {"source_code", item.source_code},
                         {"error_and_explanation", item.error_and_explanation},
                         {"responses", responses},
                         {"blind_labels", item.blind_labels}});
    }
    json raters = json::object();
    for (const auto& [rater, ids] : session.rater_items) raters[rater] = ids;
    return json{{"seed", session.seed}, {"models", session.models}, {"items", items}, {"rater_items", raters}};
}

Session session_from_json(const json& j) {
    try {
        Session s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.models = j.at("models").get<std::vector<std::string>>();
        for (const auto& ji : j.at("items")) {
            EvalItem item;
            item.item_id = ji.at("item_id").get<std::string>();
            item.event_kind = parse_kind_or_throw(ji.at("event_kind"));
            item.calibration = ji.value("calibration", false);
            item.source_code = ji.value("source_code", std::string{});
            item.error_and_explanation = ji.value("error_and_explanation", std::string{});
            for (const auto& r : ji.at("responses")) {
                item.responses.push_back({r.at("model_id").get<std::string>(), r.at("text").get<std::string>()});
            }
            item.blind_labels = ji.at("blind_labels").get<std::vector<std::string>>();
            auto sorted_labels = item.blind_labels;
            auto sorted_models = s.models;
            std::sort(sorted_labels.begin(), sorted_labels.end());
            std::sort(sorted_models.begin(), sorted_models.end());
            if (sorted_labels != sorted_models)
                throw ValidationError("item " + item.item_id + ": blind_labels is not a permutation of the models");
            s.items.push_back(std::move(item));
        }
        if (j.contains("rater_items")) {
            for (const auto& [rater, ids] : j["rater_items"].items()) {
                s.rater_items[rater] = ids.get<std::vector<std::string>>();
            }
        }
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed session: ") + e.what());
    }
}

json to_json(const RatingRecord& r) {
    json props = json::object();
    for (const auto& [p, v] : r.properties) props[std::string(to_string(p))] = v;
    return json{{"item_id", r.item_id},
                {"rater_id", r.rater_id},
                {"slot", r.slot},
                {"properties", props},
                {"rank", r.rank ? json(*r.rank) : json(nullptr)}};
}

RatingRecord rating_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("rating must be a JSON object");
    RatingRecord r;
    if (!j.contains("item_id") || !j["item_id"].is_string()) throw ValidationError("item_id: must be a string");
    r.item_id = j["item_id"].get<std::string>();
    if (!j.contains("rater_id") || !j["rater_id"].is_string()) throw ValidationError("rater_id: must be a string");
    r.rater_id = j["rater_id"].get<std::string>();
    if (!j.contains("slot") || !j["slot"].is_number_unsigned()) throw ValidationError("slot: must be an unsigned integer");
    r.slot = j["slot"].get<std::size_t>();
    if (!j.contains("properties") || !j["properties"].is_object())
        throw ValidationError("properties: must be an object");
    for (const auto& [name, value] : j["properties"].items()) {
        auto p = parse_property(name);
        if (!p) throw ValidationError("properties: unknown property '" + name + "'");
        if (!value.is_boolean()) throw ValidationError("properties." + name + ": must be a boolean");
        r.properties[*p] = value.get<bool>();
    }
    if (j.contains("rank") && !j["rank"].is_null()) {
        if (!j["rank"].is_number_integer()) throw ValidationError("rank: must be an integer or null");
        r.rank = j["rank"].get<int>();
    }
    return r;
}

std::string RatingBook::check(const RatingRecord& r, const Session& session,
                              const std::vector<RatingRecord>& batch) const {
    const EvalItem* item = session.find(r.item_id);
    if (!item) return "item_id: unknown item '" + r.item_id + "'";
    if (r.rater_id.empty()) return "rater_id: must be non-empty";
    if (r.slot >= item->slot_count())
        return "slot: " + std::to_string(r.slot) + " is out of range for " + std::to_string(item->slot_count()) +
               " responses";
    for (auto p : kAllProperties) {
        if (!r.properties.contains(p)) return "properties: missing '" + std::string(to_string(p)) + "'";
    }
    if (r.rank && (*r.rank < 1 || *r.rank > static_cast<int>(item->slot_count())))
        return "rank: must be between 1 and " + std::to_string(item->slot_count()) + " or unranked";
    if (!r.rank) return {};
    auto clashes = [&](const RatingRecord& other) {
        return other.item_id == r.item_id && other.rater_id == r.rater_id && other.slot != r.slot &&
               other.rank == r.rank;
    };
    for (const auto& other : batch) {
        if (clashes(other)) return "rank: duplicate rank " + std::to_string(*r.rank) + " for this item and rater";
    }
    for (std::size_t s = 0; s < item->slot_count(); ++s) {
        if (s == r.slot) continue;
        bool replaced = std::any_of(batch.begin(), batch.end(), [&](const RatingRecord& p) {
            return p.item_id == r.item_id && p.rater_id == r.rater_id && p.slot == s;
        });
        if (replaced) continue;
        auto it = index_.find({r.item_id, r.rater_id, s});
        if (it != index_.end() && clashes(records_[it->second]))
            return "rank: duplicate rank " + std::to_string(*r.rank) + " for this item and rater";
    }
    return {};
}

void RatingBook::store(const RatingRecord& r) {
    auto [it, inserted] = index_.try_emplace({r.item_id, r.rater_id, r.slot}, records_.size());
    if (inserted) {
        records_.push_back(r);
    } else {
        records_[it->second] = r;
    }
}

RecordResult RatingBook::record(const RatingRecord& r, const Session& session) {
    return record_all({r}, session);
}

RecordResult RatingBook::record_all(const std::vector<RatingRecord>& records, const Session& session) {
    std::set<std::size_t> slots;
    for (const auto& r : records) {
        if (r.item_id != records.front().item_id || r.rater_id != records.front().rater_id)
            return {false, false, "all ratings in one submission must share item_id and rater_id"};
        if (!slots.insert(r.slot).second) return {false, false, "slot: " + std::to_string(r.slot) + " appears twice"};
    }
    for (const auto& r : records) {
        if (auto reason = check(r, session, records); !reason.empty()) return {false, false, reason};
    }
    for (const auto& r : records) store(r);
    const EvalItem* item = records.empty() ? nullptr : session.find(records.front().item_id);
    return {true, item && item->calibration, {}};
}

bool RatingBook::has(const std::string& item_id, const std::string& rater_id, std::size_t slot) const {
    return index_.contains({item_id, rater_id, slot});
}

RatingLogContents read_rating_log(const std::filesystem::path& path) {
    RatingLogContents out;
    if (!std::filesystem::exists(path)) return out;
    for (auto& [line, j] : read_json_lines(path, out.errors)) {
        try {
            out.records.push_back(rating_from_json(j));
        } catch (const ValidationError& e) {
            out.errors.push_back({line, e.what()});
        }
    }
    return out;
}

RatingBook replay(const RatingLogContents& log, const Session& session, std::vector<LineError>& errors) {
    RatingBook book;
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        auto result = book.record(log.records[i], session);
        if (!result.accepted) errors.push_back({i + 1, result.reason});
    }
    return book;
}

RateTable acceptance_rates(const std::vector<RatingRecord>& ratings, const Session& session) {
    std::map<RateKey, std::pair<std::int64_t, std::int64_t>> counts;  // trues, rows
    for (const auto& r : ratings) {
        const EvalItem* item = session.find(r.item_id);
        if (!item || item->calibration || r.slot >= item->slot_count()) continue;
        const auto& model = item->model_for_slot(r.slot);
        for (auto p : kAllProperties) {
            auto& cell = counts[{item->event_kind, model, p}];
            auto it = r.properties.find(p);
            if (it != r.properties.end() && it->second) ++cell.first;
            ++cell.second;
        }
    }
    RateTable out;
    for (const auto& [k, c] : counts) out[k] = Rate::percentage(c.first, c.second);
    return out;
}

std::vector<Pairing> default_pairings() {
    return {{"4o", "4o", "4o FT"}, {"mini", "4o mini", "4o mini FT"}};
}

std::vector<std::string> default_models() {
    return {"4o", "4o FT", "4o mini", "4o mini FT"};
}

DeltaTable delta_table(const RateTable& rates, const std::vector<Pairing>& pairings) {
    DeltaTable out;
    for (auto kind : kEventKinds) {
        const bool present = std::any_of(rates.begin(), rates.end(),
                                         [&](const auto& e) { return std::get<0>(e.first) == kind; });
        if (!present) continue;
        for (const auto& pairing : pairings) {
            for (auto p : kAllProperties) {
                auto base = rates.find({kind, pairing.base, p});
                auto tuned = rates.find({kind, pairing.fine_tune, p});
                if (base == rates.end() || tuned == rates.end()) {
                    throw ValidationError("pairing '" + pairing.name + "' lacks a " +
                                          std::string(promptgen::to_string(kind)) + " rate for " + key(p) + " of '" +
                                          (base == rates.end() ? pairing.base : pairing.fine_tune) + "'");
                }
                out[{kind, pairing.name, p}] = (tuned->second - base->second).rescale<1>(Rounding::half_to_even);
            }
        }
    }
    return out;
}

RankTable rank_distribution(const std::vector<RatingRecord>& ratings, const Session& session) {
    RankTable out;
    for (auto kind : kEventKinds) {
        for (const auto& model : session.models) out[{kind, model}];
    }
    for (const auto& r : ratings) {
        const EvalItem* item = session.find(r.item_id);
        if (!item || item->calibration || r.slot >= item->slot_count()) continue;
        auto& counts = out[{item->event_kind, item->model_for_slot(r.slot)}];
        switch (r.rank.value_or(0)) {
            case 1: ++counts.first; break;
            case 2: ++counts.second; break;
            case 3: ++counts.third; break;
            case 4: ++counts.fourth; break;
            default: ++counts.unranked; break;
        }
    }
    return out;
}

Tenths first_choice_share(const RankCounts& counts) {
    if (counts.total() == 0) throw ValidationError("first-choice share of an all-zero rank distribution");
    return Tenths::percentage(static_cast<std::int64_t>(counts.first), static_cast<std::int64_t>(counts.total()));
}

std::int64_t headline_average(const DeltaTable& deltas, const std::string& pairing, RubricProperty property) {
    auto ct = deltas.find({EventKind::compile_time, pairing, property});
    auto rt = deltas.find({EventKind::run_time, pairing, property});
    if (ct == deltas.end() || rt == deltas.end())
        throw ValidationError("headline for '" + pairing + "' " + key(property) + " needs both CT and RT deltas");
    return round_div(ct->second.scaled + rt->second.scaled, 2 * pow10(Tenths::digits));
}

AggregateReport build_report(std::vector<std::string> models, std::vector<Pairing> pairings, RateTable rates,
                             RankTable ranks) {
    AggregateReport report;
    report.models = std::move(models);
    report.pairings = std::move(pairings);
    report.acceptance = std::move(rates);
    report.ranks = std::move(ranks);
    report.deltas = delta_table(report.acceptance, report.pairings);
    for (const auto& [k, counts] : report.ranks) {
        if (counts.total() > 0) report.first_choice[k] = first_choice_share(counts);
    }
    for (const auto& pairing : report.pairings) {
        for (auto p : kAllProperties) {
            if (report.deltas.contains({EventKind::compile_time, pairing.name, p}) &&
                report.deltas.contains({EventKind::run_time, pairing.name, p})) {
                report.headlines[{pairing.name, p}] = headline_average(report.deltas, pairing.name, p);
            }
        }
    }
    return report;
}

AggregateReport aggregate(const Session& session, const std::vector<RatingRecord>& ratings,
                          const std::vector<Pairing>& pairings) {
    return build_report(session.models, pairings, acceptance_rates(ratings, session),
                        rank_distribution(ratings, session));
}

}  // namespace guidelm::evalkit
