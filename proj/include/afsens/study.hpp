#ifndef AFSENS_STUDY_HPP
#define AFSENS_STUDY_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace afsens {

// Malformed input stream (bad header, bad field, bad count). Carries the
// 1-based line number when one is known.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, long line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    long line() const { return line_; }

  private:
    long line_;
};

// Structurally well-formed data that violates a study invariant.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One matched set: exactly one case matched to size()-1 referents.
struct MatchedSet {
    std::string set_id;
    std::vector<std::uint8_t> exposed; // Z for each unit
    std::vector<std::uint8_t> is_case; // R for each unit
    std::string subtype;               // label of the set's case; empty if unlabeled

    int size() const { return static_cast<int>(exposed.size()); }
    int exposed_total() const;
    bool case_exposed() const;
};

// McNemar-style 2x2 cell counts for a collection of 1:1 matched pairs.
// a: case exposed, referent exposed     b: case exposed, referent not
// c: case not, referent exposed         d: neither exposed
struct PairCounts {
    long a = 0;
    long b = 0;
    long c = 0;
    long d = 0;

    long pairs() const { return a + b + c + d; }
    long exposed_cases() const { return a + b; }
    long discordant() const { return b + c; }

    PairCounts& operator+=(const PairCounts& o) {
        a += o.a;
        b += o.b;
        c += o.c;
        d += o.d;
        return *this;
    }
    friend PairCounts operator+(PairCounts l, const PairCounts& r) { return l += r; }
    friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

struct Study {
    std::vector<MatchedSet> sets;
    // declared subtype labels in presentation order; may be empty when no set
    // carries a label
    std::vector<std::string> subtype_labels;

    std::size_t set_count() const { return sets.size(); }
    bool all_pairs() const;

    // checks the per-set and study-level invariants, throws ValidationError
    void validate() const;
};

// Lightweight per-subtype slice of a Study.
struct StudyView {
    const Study* study = nullptr;
    std::string label;
    std::vector<std::size_t> indices;

    std::size_t set_count() const { return indices.size(); }
    const MatchedSet& set(std::size_t i) const { return study->sets[indices[i]]; }
};

struct OddsRatioResult {
    double estimate;
    double lower;
    double upper;
};

// Long-format study CSV: header set_id,unit_id,exposed,case,subtype.
Study parse_study(std::istream& in);
void write_study(const Study& study, std::ostream& out);

// Summary CSV: header subtype,a,b,c,d; one row per subtype (a single row with
// an empty label is accepted for unstratified data).
std::vector<std::pair<std::string, PairCounts>> parse_summary(std::istream& in);
void write_summary(const std::vector<std::pair<std::string, PairCounts>>& rows,
                   std::ostream& out);

// Collapses 1:1 matched sets into PairCounts, optionally restricted to one
// subtype label. Any set with more than two units is an error.
PairCounts summarize_pairs(const Study& study,
                           const std::optional<std::string>& label = std::nullopt);
PairCounts summarize_pairs(const StudyView& view);

// Conditional (matched-pair) odds ratio b/c with the 95% log-scale interval
// exp(ln(b/c) +- 1.96 sqrt(1/b + 1/c)). Requires b > 0 and c > 0.
OddsRatioResult odds_ratio(const PairCounts& counts);

// Disjoint views covering all sets, ordered by subtype_labels. Every set must
// be labeled.
std::vector<StudyView> partition_by_subtype(const Study& study);

} // namespace afsens

#endif
