#include "afsens/simulate.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace afsens {

void DgpConfig::validate() const {
    if (n < 2)
        throw std::domain_error("n must be at least 2");
    if (!(baseline >= 0.0 && baseline <= 1.0))
        throw std::domain_error("baseline probability must be in [0, 1]");
    for (double d : {delta1, delta2}) {
        if (!(d >= 0.0) || baseline + d > 1.0)
            throw std::domain_error("effects must be nonnegative with baseline + delta <= 1");
    }
    if (reps < 1)
        throw std::domain_error("reps must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("alpha must be in (0, 1)");
    if (!(trunc > 0.0 && trunc <= 1.0))
        throw std::domain_error("trunc must be in (0, 1]");
    if (gammas.empty() || thetas.empty() || methods.empty())
        throw std::domain_error("gamma, theta and method lists must be nonempty");
    for (double g : gammas)
        if (!(g >= 1.0))
            throw std::domain_error("gamma values must be >= 1");
    for (double t : thetas)
        if (!(t >= 1.0))
            throw std::domain_error("theta values must be >= 1");
}

GeneratedPairs generate_dataset(const DgpConfig& config, double delta, RngStream& rng) {
    double p_treated = config.baseline + delta;
    if (!(p_treated >= 0.0 && p_treated <= 1.0))
        throw std::domain_error("baseline + delta must be in [0, 1]");

    std::vector<std::uint8_t> case_exposed;
    std::vector<std::uint8_t> noncase_exposed;
    case_exposed.reserve(static_cast<std::size_t>(config.n) / 2);
    noncase_exposed.reserve(static_cast<std::size_t>(config.n));
    for (long i = 0; i < config.n; ++i) {
        bool r_t = rng.bernoulli(p_treated);
        bool r_c = rng.bernoulli(config.baseline);
        bool z = rng.bernoulli(0.5);
        bool r = z ? r_t : r_c;
        (r ? case_exposed : noncase_exposed).push_back(z ? 1 : 0);
    }

    GeneratedPairs out;
    std::size_t n_pairs = std::min(case_exposed.size(), noncase_exposed.size());
    out.dropped_cases = static_cast<long>(case_exposed.size() - n_pairs);

    // draw distinct referents by a partial Fisher-Yates over the non-cases
    for (std::size_t i = 0; i < n_pairs; ++i) {
        std::size_t j = i + static_cast<std::size_t>(
                                rng.below(static_cast<std::uint64_t>(noncase_exposed.size() - i)));
        std::swap(noncase_exposed[i], noncase_exposed[j]);
        bool cz = case_exposed[i];
        bool rz = noncase_exposed[i];
        if (cz && rz)
            ++out.counts.a;
        else if (cz)
            ++out.counts.b;
        else if (rz)
            ++out.counts.c;
        else
            ++out.counts.d;
    }
    return out;
}

int default_thread_count() {
    if (const char* env = std::getenv("AFSENS_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1)
            return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::size_t nworkers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (std::size_t w = 0; w < nworkers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += nworkers)
                body(i);
        });
    }
    for (auto& t : pool)
        t.join();
}

} // namespace

std::vector<PowerCell> run_power_study(const DgpConfig& config) {
    config.validate();
    int threads = config.threads > 0 ? config.threads : default_thread_count();

    // replicate tables are generated once; every grid cell re-tests them
    std::vector<std::array<PairCounts, 2>> tables(static_cast<std::size_t>(config.reps));
    parallel_for(tables.size(), threads, [&](std::size_t r) {
        RngStream rng = RngStream::substream(config.seed, static_cast<std::uint64_t>(r));
        tables[r][0] = generate_dataset(config, config.delta1, rng).counts;
        tables[r][1] = generate_dataset(config, config.delta2, rng).counts;
    });

    struct Cell {
        double gamma, theta;
        Method method;
    };
    std::vector<Cell> cells;
    for (double g : config.gammas)
        for (double t : config.thetas)
            for (Method m : config.methods)
                cells.push_back({g, t, m});

    std::vector<long> rejections(cells.size(), 0);
    parallel_for(cells.size(), threads, [&](std::size_t ci) {
        const Cell& cell = cells[ci];
        SensParams params{cell.gamma, cell.theta};
        long rej = 0;
        for (const auto& pair : tables) {
            std::vector<GroupCounts> groups{{"1", pair[0]}, {"2", pair[1]}};
            double p = test_afe_zero(groups, cell.method, params, config.trunc, false);
            if (p <= config.alpha)
                ++rej;
        }
        rejections[ci] = rej;
    });

    std::vector<PowerCell> out;
    out.reserve(cells.size());
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        out.push_back({config.delta1, config.delta2, cells[ci].gamma, cells[ci].theta,
                       cells[ci].method,
                       static_cast<double>(rejections[ci]) / static_cast<double>(config.reps),
                       config.reps, config.seed});
    }
    return out;
}

void write_power_csv(const std::vector<PowerCell>& cells, std::ostream& out) {
    out << "delta1,delta2,gamma,theta,method,power,reps,seed\n";
    for (const auto& cell : cells) {
        std::ostringstream row;
        row.precision(6);
        row << cell.delta1 << ',' << cell.delta2 << ',' << cell.gamma << ',' << cell.theta
            << ',' << to_string(cell.method) << ',' << cell.power << ',' << cell.reps << ','
            << cell.seed;
        out << row.str() << '\n';
    }
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

} // namespace

DgpConfig parse_dgp_config(std::istream& in) {
    DgpConfig config;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", lineno);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "n")
                config.n = std::stol(value);
            else if (key == "delta1")
                config.delta1 = std::stod(value);
            else if (key == "delta2")
                config.delta2 = std::stod(value);
            else if (key == "baseline")
                config.baseline = std::stod(value);
            else if (key == "reps")
                config.reps = std::stoi(value);
            else if (key == "alpha")
                config.alpha = std::stod(value);
            else if (key == "trunc")
                config.trunc = std::stod(value);
            else if (key == "seed")
                config.seed = std::stoull(value);
            else if (key == "threads")
                config.threads = std::stoi(value);
            else if (key == "gammas") {
                config.gammas.clear();
                for (const auto& item : split_list(value))
                    config.gammas.push_back(std::stod(item));
            } else if (key == "thetas") {
                config.thetas.clear();
                for (const auto& item : split_list(value))
                    config.thetas.push_back(std::stod(item));
            } else if (key == "methods") {
                config.methods.clear();
                for (const auto& item : split_list(value)) {
                    auto m = method_from_string(item);
                    if (!m)
                        throw ParseError("unknown method '" + item + "'", lineno);
                    config.methods.push_back(*m);
                }
            } else {
                throw ParseError("unknown config key '" + key + "'", lineno);
            }
        } catch (const std::invalid_argument&) {
            throw ParseError("bad value for '" + key + "': '" + value + "'", lineno);
        } catch (const std::out_of_range&) {
            throw ParseError("value out of range for '" + key + "': '" + value + "'", lineno);
        }
    }
    return config;
}

} // namespace afsens
