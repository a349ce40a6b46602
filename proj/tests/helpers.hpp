#ifndef AFSENS_TESTS_HELPERS_HPP
#define AFSENS_TESTS_HELPERS_HPP

#include <array>
#include <cstdio>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <utility>
#include <vector>

#include "afsens/study.hpp"

namespace testutil {

inline afsens::MatchedSet make_pair(std::string id, bool case_exposed, bool ref_exposed,
                                    std::string label = "") {
    afsens::MatchedSet set;
    set.set_id = std::move(id);
    set.exposed = {static_cast<std::uint8_t>(case_exposed),
                   static_cast<std::uint8_t>(ref_exposed)};
    set.is_case = {1, 0};
    set.subtype = std::move(label);
    return set;
}

// Expands per-subtype 2x2 counts into a full 1:1 study.
inline afsens::Study
study_from_counts(const std::vector<std::pair<std::string, afsens::PairCounts>>& rows) {
    afsens::Study study;
    long next = 0;
    for (const auto& [label, pc] : rows) {
        if (!label.empty())
            study.subtype_labels.push_back(label);
        auto add = [&](long n, bool cz, bool rz) {
            for (long i = 0; i < n; ++i)
                study.sets.push_back(make_pair("s" + std::to_string(++next), cz, rz, label));
        };
        add(pc.a, true, true);
        add(pc.b, true, false);
        add(pc.c, false, true);
        add(pc.d, false, false);
    }
    return study;
}

struct CommandResult {
    int exit_code;
    std::string output; // stdout and stderr interleaved
};

inline CommandResult run_command(const std::string& command) {
    std::string full = command + " 2>&1";
    FILE* pipe = popen(full.c_str(), "r");
    if (!pipe)
        return {-1, "popen failed"};
    std::string output;
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        output.append(buf.data(), got);
    int status = pclose(pipe);
    int code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return {code, output};
}

} // namespace testutil

#endif
