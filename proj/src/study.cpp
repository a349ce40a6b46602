#include "afsens/study.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace afsens {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

int parse_binary(const std::string& s, const char* what, long line) {
    if (s == "0")
        return 0;
    if (s == "1")
        return 1;
    throw ParseError(std::string(what) + " must be 0 or 1, got '" + s + "'", line);
}

long parse_count(const std::string& s, const char* what, long line) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(std::string(what) + " must be a nonnegative integer, got '" + s + "'",
                         line);
    return std::stol(s);
}

} // namespace

int MatchedSet::exposed_total() const {
    int total = 0;
    for (auto z : exposed)
        total += z;
    return total;
}

bool MatchedSet::case_exposed() const {
    for (std::size_t j = 0; j < is_case.size(); ++j)
        if (is_case[j])
            return exposed[j] != 0;
    return false;
}

bool Study::all_pairs() const {
    return std::all_of(sets.begin(), sets.end(),
                       [](const MatchedSet& s) { return s.size() == 2; });
}

void Study::validate() const {
    std::map<std::string, int> seen;
    for (const auto& set : sets) {
        if (++seen[set.set_id] > 1)
            throw ValidationError("duplicate set_id '" + set.set_id + "'");
        if (set.size() < 2)
            throw ValidationError("set '" + set.set_id + "' has " +
                                  std::to_string(set.size()) + " units, need at least 2");
        int cases = 0;
        for (auto r : set.is_case)
            cases += r;
        if (cases != 1)
            throw ValidationError("set '" + set.set_id + "' has " + std::to_string(cases) +
                                  " cases, expected exactly 1");
        if (!set.subtype.empty() &&
            std::find(subtype_labels.begin(), subtype_labels.end(), set.subtype) ==
                subtype_labels.end())
            throw ValidationError("set '" + set.set_id + "' has unknown subtype label '" +
                                  set.subtype + "'");
    }
}

Study parse_study(std::istream& in) {
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line))
        throw ParseError("empty input, expected study CSV header");
    ++lineno;
    if (split_csv_line(line) !=
        std::vector<std::string>{"set_id", "unit_id", "exposed", "case", "subtype"})
        throw ParseError("expected header 'set_id,unit_id,exposed,case,subtype'", lineno);

    Study study;
    std::map<std::string, std::size_t> index_of;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 5)
            throw ParseError("expected 5 fields, got " + std::to_string(fields.size()), lineno);
        const std::string& set_id = fields[0];
        if (set_id.empty())
            throw ParseError("empty set_id", lineno);
        int z = parse_binary(fields[2], "exposed", lineno);
        int r = parse_binary(fields[3], "case", lineno);
        const std::string& subtype = fields[4];

        auto [it, inserted] = index_of.try_emplace(set_id, study.sets.size());
        if (inserted) {
            study.sets.emplace_back();
            study.sets.back().set_id = set_id;
        }
        MatchedSet& set = study.sets[it->second];
        set.exposed.push_back(static_cast<std::uint8_t>(z));
        set.is_case.push_back(static_cast<std::uint8_t>(r));
        // the label belongs to the set's case; labels on referent rows are ignored
        if (r == 1 && !subtype.empty()) {
            set.subtype = subtype;
            if (std::find(study.subtype_labels.begin(), study.subtype_labels.end(), subtype) ==
                study.subtype_labels.end())
                study.subtype_labels.push_back(subtype);
        }
    }

    study.validate();
    return study;
}

void write_study(const Study& study, std::ostream& out) {
    out << "set_id,unit_id,exposed,case,subtype\n";
    for (const auto& set : study.sets) {
        for (int j = 0; j < set.size(); ++j) {
            out << set.set_id << ',' << (j + 1) << ',' << int(set.exposed[j]) << ','
                << int(set.is_case[j]) << ',' << (set.is_case[j] ? set.subtype : std::string())
                << '\n';
        }
    }
}

std::vector<std::pair<std::string, PairCounts>> parse_summary(std::istream& in) {
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line))
        throw ParseError("empty input, expected summary CSV header");
    ++lineno;
    if (split_csv_line(line) != std::vector<std::string>{"subtype", "a", "b", "c", "d"})
        throw ParseError("expected header 'subtype,a,b,c,d'", lineno);

    std::vector<std::pair<std::string, PairCounts>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 5)
            throw ParseError("expected 5 fields, got " + std::to_string(fields.size()), lineno);
        PairCounts pc;
        pc.a = parse_count(fields[1], "a", lineno);
        pc.b = parse_count(fields[2], "b", lineno);
        pc.c = parse_count(fields[3], "c", lineno);
        pc.d = parse_count(fields[4], "d", lineno);
        for (const auto& [label, ignored] : rows) {
            (void)ignored;
            if (label == fields[0])
                throw ParseError("duplicate subtype label '" + fields[0] + "'", lineno);
        }
        rows.emplace_back(fields[0], pc);
    }
    if (rows.empty())
        throw ParseError("summary file has no data rows");
    if (rows.size() > 1)
        for (const auto& [label, ignored] : rows) {
            (void)ignored;
            if (label.empty())
                throw ParseError("subtype labels are required when more than one row is given");
        }
    return rows;
}

void write_summary(const std::vector<std::pair<std::string, PairCounts>>& rows,
                   std::ostream& out) {
    out << "subtype,a,b,c,d\n";
    for (const auto& [label, pc] : rows)
        out << label << ',' << pc.a << ',' << pc.b << ',' << pc.c << ',' << pc.d << '\n';
}

namespace {

PairCounts tally_pair(const MatchedSet& set, PairCounts counts) {
    if (set.size() != 2)
        throw ValidationError("pair summary requires 1:1 matching, set '" + set.set_id +
                              "' has " + std::to_string(set.size()) + " units");
    int case_j = set.is_case[0] ? 0 : 1;
    int ref_j = 1 - case_j;
    bool case_exp = set.exposed[case_j];
    bool ref_exp = set.exposed[ref_j];
    if (case_exp && ref_exp)
        ++counts.a;
    else if (case_exp)
        ++counts.b;
    else if (ref_exp)
        ++counts.c;
    else
        ++counts.d;
    return counts;
}

} // namespace

PairCounts summarize_pairs(const Study& study, const std::optional<std::string>& label) {
    PairCounts counts;
    for (const auto& set : study.sets) {
        if (label && set.subtype != *label)
            continue;
        counts = tally_pair(set, counts);
    }
    return counts;
}

PairCounts summarize_pairs(const StudyView& view) {
    PairCounts counts;
    for (std::size_t i = 0; i < view.set_count(); ++i)
        counts = tally_pair(view.set(i), counts);
    return counts;
}

OddsRatioResult odds_ratio(const PairCounts& counts) {
    if (counts.b <= 0 || counts.c <= 0)
        throw ValidationError("odds ratio undefined: needs discordant pairs of both kinds "
                              "(b > 0 and c > 0)");
    double b = static_cast<double>(counts.b);
    double c = static_cast<double>(counts.c);
    double est = b / c;
    double half = 1.96 * std::sqrt(1.0 / b + 1.0 / c);
    return {est, est * std::exp(-half), est * std::exp(half)};
}

std::vector<StudyView> partition_by_subtype(const Study& study) {
    for (const auto& set : study.sets)
        if (set.subtype.empty())
            throw ValidationError("set '" + set.set_id +
                                  "' is unlabeled; subtype partition needs every set labeled");
    std::vector<StudyView> views;
    views.reserve(study.subtype_labels.size());
    for (const auto& label : study.subtype_labels)
        views.push_back(StudyView{&study, label, {}});
    for (std::size_t i = 0; i < study.sets.size(); ++i) {
        auto it = std::find(study.subtype_labels.begin(), study.subtype_labels.end(),
                            study.sets[i].subtype);
        views[static_cast<std::size_t>(it - study.subtype_labels.begin())].indices.push_back(i);
    }
    return views;
}

} // namespace afsens
