// Command-line front end: sensitivity analysis for the attributable fraction
// among the exposed in matched case-referent studies, plus the simulation,
// power and design-sensitivity workflows behind it.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "afsens/attributable.hpp"
#include "afsens/combine.hpp"
#include "afsens/power.hpp"
#include "afsens/simulate.hpp"
#include "afsens/stats.hpp"
#include "afsens/study.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// bad paths and inconsistent flags are usage errors, not data errors
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open())
        throw UsageError("cannot open file '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open())
        throw UsageError("cannot open output file '" + path + "'");
    return out;
}

std::vector<afsens::Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<afsens::Method> methods;
    for (const auto& name : names) {
        auto m = afsens::method_from_string(name);
        if (!m)
            throw UsageError("unknown method '" + name +
                             "' (merged, stouffer, weighted_stouffer, fisher, truncated, "
                             "bonferroni)");
        methods.push_back(*m);
    }
    return methods;
}

std::string format6(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

std::string percent2(double frac) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << 100.0 * frac << '%';
    return os.str();
}

struct AnalyzeArgs {
    std::string study_path;
    std::string summary_path;
    std::vector<double> gammas{1.0};
    std::vector<double> thetas{1.0};
    std::vector<std::string> methods{"merged"};
    double alpha = 0.05;
    double trunc = 0.10;
    bool exact = false;
    bool max_ci = false;
    bool show_table = false;
    std::string out_path;
};

void print_human_table(const std::vector<afsens::AnalysisReport>& reports,
                       const afsens::GridSpec& spec, std::ostream& out) {
    out << "95% minimum confidence bounds for AFe "
           "(* last gamma rejecting AFe=0, ! first gamma not rejecting)\n";
    out << std::left << std::setw(8) << "gamma" << std::setw(8) << "theta";
    for (auto method : spec.methods)
        out << std::setw(20) << afsens::to_string(method);
    out << '\n';
    for (double gamma : spec.gammas) {
        for (double theta : spec.thetas) {
            std::ostringstream g, t;
            g << gamma;
            t << theta;
            out << std::left << std::setw(8) << g.str() << std::setw(8) << t.str();
            for (auto method : spec.methods) {
                for (const auto& rep : reports) {
                    if (rep.gamma == gamma && rep.theta == theta && rep.method == method) {
                        std::string cell = "AFe>=" + percent2(rep.afe_lower);
                        if (rep.boundary == "last_reject")
                            cell += " *";
                        else if (rep.boundary == "first_fail")
                            cell += " !";
                        if (rep.a_upper)
                            cell += " A<=" + std::to_string(*rep.a_upper);
                        out << std::setw(20) << cell;
                        break;
                    }
                }
            }
            out << '\n';
        }
    }
}

int run_analyze(const AnalyzeArgs& args) {
    if (args.study_path.empty() == args.summary_path.empty())
        throw UsageError("give exactly one of --study or --summary");

    afsens::GridSpec spec;
    spec.gammas = args.gammas;
    spec.thetas = args.thetas;
    spec.methods = parse_methods(args.methods);
    spec.alpha = args.alpha;
    spec.trunc = args.trunc;
    spec.exact = args.exact;
    spec.with_max_ci = args.max_ci;

    std::vector<afsens::AnalysisReport> reports;
    if (!args.summary_path.empty()) {
        auto in = open_input(args.summary_path);
        auto rows = afsens::parse_summary(in);
        std::vector<afsens::GroupCounts> groups;
        for (auto& [label, counts] : rows)
            groups.push_back({label, counts});
        reports = afsens::sensitivity_grid(groups, spec);
    } else {
        auto in = open_input(args.study_path);
        auto study = afsens::parse_study(in);
        bool merged_only = spec.methods.size() == 1 && spec.methods[0] == afsens::Method::merged;
        if (study.all_pairs() && !study.subtype_labels.empty() && !merged_only) {
            std::vector<afsens::GroupCounts> groups;
            for (const auto& view : afsens::partition_by_subtype(study))
                groups.push_back({view.label, afsens::summarize_pairs(view)});
            reports = afsens::sensitivity_grid(groups, spec);
        } else if (study.all_pairs()) {
            std::vector<afsens::GroupCounts> groups{{"", afsens::summarize_pairs(study)}};
            reports = afsens::sensitivity_grid(groups, spec);
        } else {
            reports = afsens::sensitivity_grid(study, spec);
        }
    }

    if (!args.out_path.empty()) {
        auto out = open_output(args.out_path);
        afsens::write_grid_csv(reports, out);
        print_human_table(reports, spec, std::cout);
    } else {
        afsens::write_grid_csv(reports, std::cout);
        if (args.show_table)
            print_human_table(reports, spec, std::cout);
    }
    return 0;
}

struct SummarizeArgs {
    std::string study_path;
    bool by_subtype = false;
    std::string out_path;
};

void print_counts(const std::string& label, const afsens::PairCounts& pc, std::ostream& out) {
    out << (label.empty() ? std::string("overall") : label) << ": a=" << pc.a << " b=" << pc.b
        << " c=" << pc.c << " d=" << pc.d << " pairs=" << pc.pairs()
        << " exposed_cases=" << pc.exposed_cases() << '\n';
    if (pc.b > 0 && pc.c > 0) {
        auto ratio = afsens::odds_ratio(pc);
        out << "  odds ratio " << std::fixed << std::setprecision(2) << ratio.estimate
            << " (95% CI " << ratio.lower << ", " << ratio.upper << ")\n";
        out.unsetf(std::ios::fixed);
    } else {
        out << "  odds ratio undefined (needs b > 0 and c > 0)\n";
    }
}

int run_summarize(const SummarizeArgs& args) {
    auto in = open_input(args.study_path);
    auto study = afsens::parse_study(in);
    std::vector<std::pair<std::string, afsens::PairCounts>> rows;
    if (args.by_subtype) {
        for (const auto& view : afsens::partition_by_subtype(study))
            rows.emplace_back(view.label, afsens::summarize_pairs(view));
    }
    print_counts("", afsens::summarize_pairs(study), std::cout);
    for (const auto& [label, pc] : rows)
        print_counts(label, pc, std::cout);
    if (!args.out_path.empty()) {
        auto out = open_output(args.out_path);
        if (rows.empty())
            rows.emplace_back("", afsens::summarize_pairs(study));
        afsens::write_summary(rows, out);
    }
    return 0;
}

struct CombineArgs {
    std::vector<double> ps;
    std::string method = "fisher";
    std::vector<double> weights;
    double trunc = 0.10;
};

int run_combine(const CombineArgs& args) {
    auto method = afsens::method_from_string(args.method);
    if (!method || *method == afsens::Method::merged)
        throw UsageError("combine needs one of stouffer, weighted_stouffer, fisher, "
                         "truncated, bonferroni");
    double p = 0.0;
    switch (*method) {
    case afsens::Method::bonferroni:
        p = afsens::bonferroni(args.ps);
        break;
    case afsens::Method::fisher:
        p = afsens::fisher(args.ps);
        break;
    case afsens::Method::truncated:
        p = afsens::truncated_product(args.ps, args.trunc);
        break;
    case afsens::Method::stouffer:
        p = afsens::stouffer(args.ps);
        break;
    case afsens::Method::weighted_stouffer: {
        if (args.weights.empty())
            throw UsageError("weighted_stouffer needs --weights");
        p = afsens::weighted_stouffer(args.ps, args.weights);
        break;
    }
    default:
        break;
    }
    std::cout << format6(p) << '\n';
    return 0;
}

struct SimulateArgs {
    std::string config_path;
    afsens::DgpConfig config;
    bool seed_given = false;
    std::vector<std::string> methods;
    std::string out_path;
};

int run_simulate(SimulateArgs& args) {
    afsens::DgpConfig config;
    if (!args.config_path.empty()) {
        auto in = open_input(args.config_path);
        config = afsens::parse_dgp_config(in);
    } else if (!args.seed_given) {
        throw UsageError("--seed is required (reproducibility is part of the contract)");
    }
    // command-line flags override the config file
    if (args.seed_given)
        config.seed = args.config.seed;
    if (args.config.n != 0)
        config.n = args.config.n;
    if (args.config.reps != 0)
        config.reps = args.config.reps;
    if (args.config.delta1 >= 0)
        config.delta1 = args.config.delta1;
    if (args.config.delta2 >= 0)
        config.delta2 = args.config.delta2;
    if (args.config.baseline >= 0)
        config.baseline = args.config.baseline;
    if (args.config.alpha > 0)
        config.alpha = args.config.alpha;
    if (args.config.trunc > 0)
        config.trunc = args.config.trunc;
    if (args.config.threads > 0)
        config.threads = args.config.threads;
    if (!args.config.gammas.empty())
        config.gammas = args.config.gammas;
    if (!args.config.thetas.empty())
        config.thetas = args.config.thetas;
    if (!args.methods.empty())
        config.methods = parse_methods(args.methods);

    auto cells = afsens::run_power_study(config);
    if (!args.out_path.empty()) {
        auto out = open_output(args.out_path);
        afsens::write_power_csv(cells, out);
    } else {
        afsens::write_power_csv(cells, std::cout);
    }
    return 0;
}

struct PowerArgs {
    std::string summary_path;
    std::vector<double> gammas{1.0};
    std::vector<double> thetas{1.0};
    double alpha = 0.05;
    std::string method = "merged";
    long astar = -1;
    std::vector<long> astar_by_group;
    int mc_reps = 0;
    std::uint64_t mc_seed = 1;
    std::string out_path;
};

int run_power(const PowerArgs& args) {
    auto method = afsens::method_from_string(args.method);
    if (!method || (*method != afsens::Method::merged && *method != afsens::Method::stouffer &&
                    *method != afsens::Method::weighted_stouffer))
        throw UsageError("power supports merged, stouffer and weighted_stouffer");

    auto in = open_input(args.summary_path);
    auto rows = afsens::parse_summary(in);

    std::vector<long> astars;
    if (*method == afsens::Method::merged) {
        if (args.astar < 0)
            throw UsageError("merged power needs --astar");
    } else {
        if (args.astar_by_group.size() != rows.size())
            throw UsageError("--astar-by-group must list one value per summary row");
        astars = args.astar_by_group;
    }

    std::ostringstream csv;
    csv << "gamma,theta,method,power,mc_stderr\n";
    for (double gamma : args.gammas) {
        for (double theta : args.thetas) {
            afsens::SensParams params{gamma, theta};
            afsens::PowerSpec spec;
            spec.alpha = args.alpha;
            if (*method == afsens::Method::merged) {
                afsens::PairCounts total;
                for (const auto& [label, pc] : rows)
                    total += pc;
                spec.groups.push_back({args.astar, afsens::upper_probs(total, params)});
            } else {
                for (std::size_t k = 0; k < rows.size(); ++k)
                    spec.groups.push_back(
                        {astars[k], afsens::upper_probs(rows[k].second, params)});
            }
            double value;
            double stderr_value = 0.0;
            if (args.mc_reps > 0) {
                value = afsens::power_monte_carlo(spec, *method, args.mc_reps, args.mc_seed);
                stderr_value = std::sqrt(std::max(value * (1.0 - value), 0.0) / args.mc_reps);
            } else if (*method == afsens::Method::merged) {
                value = afsens::power_merged(spec);
            } else if (*method == afsens::Method::stouffer) {
                value = afsens::power_stouffer(spec);
            } else {
                value = afsens::power_weighted_stouffer(spec);
            }
            csv << format6(gamma) << ',' << format6(theta) << ',' << args.method << ','
                << format6(value) << ',' << format6(stderr_value) << '\n';
        }
    }
    if (!args.out_path.empty())
        open_output(args.out_path) << csv.str();
    else
        std::cout << csv.str();
    return 0;
}

struct DesignArgs {
    afsens::DesignSensConfig config;
    std::string scope = "combined";
    std::string method = "merged";
    bool seed_given = false;
    std::string curve_path;
};

int run_design(DesignArgs& args) {
    if (!args.seed_given)
        throw UsageError("--seed is required (reproducibility is part of the contract)");
    if (args.scope == "group1")
        args.config.scope = afsens::DesignScope::group1;
    else if (args.scope == "group2")
        args.config.scope = afsens::DesignScope::group2;
    else if (args.scope == "combined")
        args.config.scope = afsens::DesignScope::combined;
    else
        throw UsageError("--scope must be group1, group2 or combined");
    auto method = afsens::method_from_string(args.method);
    if (!method)
        throw UsageError("unknown method '" + args.method + "'");
    args.config.method = *method;

    auto result = afsens::estimate_design_sensitivity(args.config);
    std::cout << "design_sensitivity " << format6(result.estimate) << " half_width "
              << format6(result.half_width) << '\n';
    if (!args.curve_path.empty()) {
        auto out = open_output(args.curve_path);
        out << "gamma,theta,method,power,mc_stderr\n";
        for (const auto& pt : result.curve)
            out << format6(pt.gamma) << ',' << format6(pt.theta) << ','
                << afsens::to_string(args.config.method) << ',' << format6(pt.power) << ','
                << format6(pt.mc_stderr) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensitivity analysis for the attributable fraction among the exposed in "
                 "matched case-referent studies"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand(
        "analyze", "Grid of AFe tests and minimum confidence bounds over (gamma, theta)");
    analyze->add_option("--study", analyze_args.study_path, "long-format study CSV");
    analyze->add_option("--summary", analyze_args.summary_path, "per-subtype 2x2 summary CSV");
    analyze->add_option("--gamma", analyze_args.gammas, "hidden-bias bounds")->delimiter(',');
    analyze->add_option("--theta", analyze_args.thetas, "selection-bias bounds")->delimiter(',');
    analyze->add_option("--methods", analyze_args.methods, "methods to run")->delimiter(',');
    analyze->add_option("--alpha", analyze_args.alpha, "test level");
    analyze->add_option("--trunc", analyze_args.trunc, "truncation point for the truncated method");
    analyze->add_flag("--exact", analyze_args.exact, "exact Poisson-binomial tails");
    analyze->add_flag("--max-ci", analyze_args.max_ci, "also report the merged maximum interval");
    analyze->add_flag("--table", analyze_args.show_table, "print the human-readable table");
    analyze->add_option("--out", analyze_args.out_path, "write the grid CSV here");

    SummarizeArgs summarize_args;
    auto* summarize = app.add_subcommand("summarize", "Collapse a paired study to 2x2 counts");
    summarize->add_option("--study", summarize_args.study_path, "long-format study CSV")
        ->required();
    summarize->add_flag("--by-subtype", summarize_args.by_subtype, "per-subtype tables");
    summarize->add_option("--out", summarize_args.out_path, "write a summary CSV here");

    CombineArgs combine_args;
    auto* combine = app.add_subcommand("combine", "Combine independent one-sided p-values");
    combine->add_option("--p", combine_args.ps, "p-values")->required()->delimiter(',');
    combine->add_option("--method", combine_args.method, "combination method");
    combine->add_option("--weights", combine_args.weights, "weights for weighted_stouffer")
        ->delimiter(',');
    combine->add_option("--trunc", combine_args.trunc, "truncation point");

    SimulateArgs simulate_args;
    simulate_args.config.n = 0;
    simulate_args.config.reps = 0;
    simulate_args.config.delta1 = -1;
    simulate_args.config.delta2 = -1;
    simulate_args.config.baseline = -1;
    simulate_args.config.alpha = 0;
    simulate_args.config.trunc = 0;
    simulate_args.config.gammas.clear();
    simulate_args.config.thetas.clear();
    simulate_args.config.methods.clear();
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo power study over (gamma, theta)");
    simulate->add_option("--config", simulate_args.config_path, "key=value config file");
    simulate->add_option("--n", simulate_args.config.n, "units per dataset");
    simulate->add_option("--delta1", simulate_args.config.delta1, "effect in dataset 1");
    simulate->add_option("--delta2", simulate_args.config.delta2, "effect in dataset 2");
    simulate->add_option("--baseline", simulate_args.config.baseline, "control event probability");
    simulate->add_option("--reps", simulate_args.config.reps, "replicates");
    simulate->add_option("--alpha", simulate_args.config.alpha, "test level");
    simulate->add_option("--trunc", simulate_args.config.trunc, "truncation point");
    auto* simulate_seed = simulate->add_option("--seed", simulate_args.config.seed, "master seed");
    simulate->add_option("--gamma", simulate_args.config.gammas, "gamma grid")->delimiter(',');
    simulate->add_option("--theta", simulate_args.config.thetas, "theta grid")->delimiter(',');
    simulate->add_option("--methods", simulate_args.methods, "methods")->delimiter(',');
    simulate->add_option("--threads", simulate_args.config.threads, "worker threads");
    simulate->add_option("--out", simulate_args.out_path, "write power CSV here");

    PowerArgs power_args;
    auto* power = app.add_subcommand("power", "Analytic power of the sensitivity analysis");
    power->add_option("--summary", power_args.summary_path, "per-subtype 2x2 summary CSV")
        ->required();
    power->add_option("--gamma", power_args.gammas, "gamma grid")->delimiter(',');
    power->add_option("--theta", power_args.thetas, "theta grid")->delimiter(',');
    power->add_option("--alpha", power_args.alpha, "test level");
    power->add_option("--method", power_args.method, "merged, stouffer or weighted_stouffer");
    power->add_option("--astar", power_args.astar, "attributable total for the merged formula");
    power->add_option("--astar-by-group", power_args.astar_by_group,
                      "per-group attributable totals")
        ->delimiter(',');
    power->add_option("--mc-reps", power_args.mc_reps,
                      "Monte Carlo replicates (0 = analytic formula)");
    power->add_option("--mc-seed", power_args.mc_seed, "Monte Carlo seed");
    power->add_option("--out", power_args.out_path, "write power CSV here");

    DesignArgs design_args;
    auto* design = app.add_subcommand("design-sensitivity",
                                      "Bisection estimate of the design sensitivity");
    design->add_option("--n", design_args.config.dgp.n, "units per dataset (>= 10000)");
    design->add_option("--delta1", design_args.config.dgp.delta1, "effect in dataset 1");
    design->add_option("--delta2", design_args.config.dgp.delta2, "effect in dataset 2");
    design->add_option("--baseline", design_args.config.dgp.baseline,
                       "control event probability");
    design->add_option("--reps", design_args.config.dgp.reps, "replicates per power estimate");
    auto* design_seed = design->add_option("--seed", design_args.config.dgp.seed, "master seed");
    design->add_option("--theta-star", design_args.config.theta_star, "selection-bias bound");
    design->add_option("--method", design_args.method, "combiner for the combined scope");
    design->add_option("--scope", design_args.scope, "group1, group2 or combined");
    design->add_option("--alpha", design_args.config.alpha, "test level");
    design->add_option("--trunc", design_args.config.trunc, "truncation point");
    design->add_option("--tol", design_args.config.tol, "bisection tolerance");
    design->add_option("--gamma-lo", design_args.config.gamma_lo, "lower bracket");
    design->add_option("--gamma-hi", design_args.config.gamma_hi, "upper bracket");
    design->add_option("--curve-out", design_args.curve_path, "write the coarse power curve here");
    design->add_option("--threads", design_args.config.dgp.threads, "worker threads");

    try {
        app.parse(argc, argv);
        simulate_args.seed_given = simulate_seed->count() > 0;
        design_args.seed_given = design_seed->count() > 0;
        if (*analyze)
            return run_analyze(analyze_args);
        if (*summarize)
            return run_summarize(summarize_args);
        if (*combine)
            return run_combine(combine_args);
        if (*simulate)
            return run_simulate(simulate_args);
        if (*power)
            return run_power(power_args);
        if (*design)
            return run_design(design_args);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const afsens::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const afsens::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}
