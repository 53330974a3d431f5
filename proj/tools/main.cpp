// Command-line front end: capital requirements, optimal and tolerance-relaxed
// payoff sets, structural diagnosis, semicontinuity probes, and the built-in
// verification suite. All arithmetic is exact; outputs are deterministic.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "optpay/json_io.hpp"
#include "optpay/selftest.hpp"

namespace {

using namespace optpay;

struct CommonArgs {
    std::string file;
    std::string fixture;
    int decimals = -1;  // < 0: no decimal columns

    std::optional<int> decimals_opt() const {
        return decimals >= 0 ? std::optional<int>(decimals) : std::nullopt;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    auto* file = cmd->add_option("--file", args.file, "instance JSON file");
    auto* fixture =
        cmd->add_option("--fixture", args.fixture, "built-in fixture id (see 'fixtures')");
    file->excludes(fixture);
    cmd->add_option("--decimals", args.decimals,
                    "append display-only decimal renderings with this many digits")
        ->check(CLI::Range(0, 18));
}

InstanceFile load_instance(const CommonArgs& args) {
    if (!args.fixture.empty()) return InstanceFile{make_fixture(args.fixture), {}, {}};
    if (args.file.empty())
        throw BadParameter("provide --file or --fixture to select an instance");
    std::ifstream in(args.file);
    if (!in) throw BadParameter("cannot open instance file '" + args.file + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw BadParameter("instance file '" + args.file + "' is not valid JSON: " + e.what());
    }
    return parse_instance_file(doc);
}

/// Position/direction arguments: a named position from the instance file, a
/// built-in name ("0", "1F", "-1F"), or an inline vector "(1,0,-1/2)".
Vec resolve_vector(const InstanceFile& file, const std::string& token) {
    if (auto hit = file.positions.find(token); hit != file.positions.end()) return hit->second;
    if (auto named = named_vector(file.instance.space, token)) return *named;

    std::string body;
    for (char c : token)
        if (!std::isspace(static_cast<unsigned char>(c))) body += c;
    if (body.size() >= 2 && (body.front() == '(' || body.front() == '[') &&
        (body.back() == ')' || body.back() == ']'))
        body = body.substr(1, body.size() - 2);
    if (body.empty()) throw BadParameter("empty position '" + token + "'");
    Vec out;
    std::stringstream ss(body);
    std::string piece;
    while (std::getline(ss, piece, ',')) out.push_back(parse_rational_text(piece));
    if (out.size() != file.instance.atoms())
        throw BadParameter("position '" + token + "' has " + std::to_string(out.size()) +
                           " coordinates; the instance has " +
                           std::to_string(file.instance.atoms()) + " atoms");
    return out;
}

void emit(const json& doc) { std::cout << doc.dump() << "\n"; }

// ---------------------------------------------------------------------------
// Subcommand bodies.
// ---------------------------------------------------------------------------

int cmd_rho(const CommonArgs& common, const std::string& position) {
    const InstanceFile file = load_instance(common);
    const Vec x = resolve_vector(file, position);
    if (std::holds_alternative<ExpUtility>(file.instance.acceptance)) {
        const auto smooth = smooth_rho(file.instance, x);
        json out;
        out["value_numeric"] = smooth.value;
        if (const auto digits = common.decimals_opt()) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*f", static_cast<int>(*digits), smooth.value);
            out["value_decimal"] = std::string(buf);
        }
        out["kkt_residual"] = smooth.kkt_residual;
        out["attained"] = true;
        out["kind"] = "numeric minimum (strictly convex smooth variant)";
        emit(out);
        return 0;
    }
    emit(rho_json(rho(file.instance, x), file.instance, common.decimals_opt()));
    return 0;
}

int cmd_optimal_set(const CommonArgs& common, const std::string& position) {
    const InstanceFile file = load_instance(common);
    const Vec x = resolve_vector(file, position);
    emit(optimal_set_json(optimal_set(file.instance, x), file.instance, common.decimals_opt()));
    return 0;
}

int cmd_epsilon_set(const CommonArgs& common, const std::string& position,
                    const std::string& eps) {
    const InstanceFile file = load_instance(common);
    const Vec x = resolve_vector(file, position);
    emit(optimal_set_json(epsilon_optimal_set(file.instance, x, parse_rational_text(eps)),
                          file.instance, common.decimals_opt()));
    return 0;
}

int cmd_diagnose(const CommonArgs& common, const std::string& position) {
    const InstanceFile file = load_instance(common);
    const ProblemInstance& inst = file.instance;

    json out;
    out["deals"] = deal_report_json(deal_check(inst));
    const auto exist = existence_report(inst);
    out["existence"] = existence_json(exist);
    {
        std::string summary = to_string(exist.status);
        if (!exist.chain.empty()) summary += " (" + exist.chain.front() + ")";
        out["existence"]["summary"] = summary;
    }
    out["usc"] = usc_json(usc_report(inst));

    // Uniqueness is sampled: the requested position if given, otherwise zero,
    // the first coordinate directions, and any named positions from the file.
    std::vector<Vec> samples;
    if (!position.empty()) {
        samples.push_back(resolve_vector(file, position));
    } else {
        samples.push_back(zeros(inst.atoms()));
        for (size_t i = 0; i < std::min<size_t>(inst.atoms(), 2); ++i) {
            Vec e = zeros(inst.atoms());
            e[i] = Rational(1);
            samples.push_back(e);
            samples.push_back(scale(e, Rational(-1)));
        }
        for (const auto& [name, vec] : file.positions) samples.push_back(vec);
    }

    json sampled = json::array();
    size_t singletons = 0, empties = 0;
    for (const auto& x : samples) {
        json entry;
        entry["position"] = vec_json(x);
        try {
            const auto uniq = uniqueness_at(inst, x);
            entry["report"] = uniqueness_json(uniq);
            if (uniq.singleton) ++singletons;
        } catch (const EmptyOptimalSet&) {
            entry["empty"] = true;
            ++empties;
        } catch (const NeverAcceptable&) {
            entry["never_acceptable"] = true;
        }
        sampled.push_back(entry);
    }
    json uniq_out;
    uniq_out["samples"] = sampled;
    if (empties == samples.size())
        uniq_out["summary"] = "empty at all samples";
    else if (singletons == samples.size())
        uniq_out["summary"] = "singleton at all samples";
    else
        uniq_out["summary"] = std::to_string(singletons) + " of " +
                              std::to_string(samples.size()) + " samples are singletons";
    out["uniqueness"] = uniq_out;

    if (std::holds_alternative<AnalyticSet>(inst.acceptance) && !inst.analytic_star) {
        // The staircase fixture's headline fact, rendered directly.
        out["solution_set_at_zero"] =
            optimal_set_json(optimal_set(inst, zeros(inst.atoms())), inst,
                             common.decimals_opt());
    }
    emit(out);
    return 0;
}

int cmd_probe(const CommonArgs& common, const std::string& base, const std::string& dir,
              const std::string& eps, size_t scales, const std::string& box, bool as_json,
              bool parallel) {
    const InstanceFile file = load_instance(common);

    std::vector<ProbeSpec> specs;
    if (!dir.empty()) {
        ProbeSpec spec;
        spec.base = resolve_vector(file, base);
        spec.direction = resolve_vector(file, dir);
        if (!eps.empty()) spec.epsilon = parse_rational_text(eps);
        specs.push_back(std::move(spec));
    } else if (!file.probes.empty()) {
        specs = file.probes;  // fall back to the probe list shipped in the file
    } else {
        throw BadParameter("provide --dir (and optionally --base/--eps), or an instance file "
                           "with a \"probes\" list");
    }

    const Rational box_r = parse_rational_text(box);
    auto run_one = [&](const ProbeSpec& spec) {
        return spec.epsilon ? epsilon_lsc_probe(file.instance, spec.base, spec.direction,
                                                *spec.epsilon, scales, box_r)
                            : lsc_probe(file.instance, spec.base, spec.direction, scales, box_r);
    };

    std::vector<ProbeReport> reports;
    if (parallel && specs.size() > 1) {
        std::vector<std::future<ProbeReport>> futs;
        for (const auto& spec : specs)
            futs.push_back(std::async(std::launch::async, run_one, spec));
        for (auto& f : futs) reports.push_back(f.get());
    } else {
        for (const auto& spec : specs) reports.push_back(run_one(spec));
    }

    if (as_json) {
        if (reports.size() == 1) {
            emit(probe_json(reports.front(), common.decimals_opt()));
        } else {
            json arr = json::array();
            for (const auto& r : reports) arr.push_back(probe_json(r, common.decimals_opt()));
            emit(arr);
        }
        return 0;
    }
    for (size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (reports.size() > 1)
            std::cout << "# probe " << i << ": base " << vec_json(r.base).dump() << ", direction "
                      << vec_json(r.direction).dump() << "\n";
        std::cout << probe_csv(r, common.decimals_opt());
        json cls;
        cls["verdict"] = to_string(r.verdict);
        if (r.delta_star) cls["delta_star"] = rational_str(*r.delta_star);
        if (r.epsilon) cls["epsilon"] = rational_str(*r.epsilon);
        if (r.hypotheses) cls["hypotheses"] = hypotheses_json(*r.hypotheses);
        if (!r.note.empty()) cls["note"] = r.note;
        emit(cls);
        if (i + 1 < reports.size()) std::cout << "\n";
    }
    return 0;
}

int cmd_paper_examples(const std::string& only, bool as_json, bool parallel) {
    selftest::Options options;
    options.only = only;
    options.parallel = parallel;
    const auto results = selftest::run(options);

    size_t fixtures_seen = 0;
    {
        std::vector<std::string> seen;
        for (const auto& check : results.checks) {
            if (check.group == "properties") continue;
            if (std::find(seen.begin(), seen.end(), check.group) == seen.end())
                seen.push_back(check.group);
        }
        fixtures_seen = seen.size();
    }
    const size_t failures = results.failures();

    if (as_json) {
        json out;
        json checks = json::array();
        for (const auto& c : results.checks) {
            json jc;
            jc["criterion"] = c.criterion;
            jc["group"] = c.group;
            jc["name"] = c.name;
            jc["pass"] = c.pass;
            if (!c.detail.empty()) jc["detail"] = c.detail;
            checks.push_back(jc);
        }
        out["checks"] = checks;
        out["fixtures"] = fixtures_seen;
        out["assertions"] = results.checks.size();
        out["failures"] = failures;
        emit(out);
    } else {
        for (const auto& c : results.checks) {
            std::cout << (c.pass ? "PASS" : "FAIL") << "  ";
            if (c.criterion > 0)
                std::cout << "[crit " << c.criterion << "] ";
            else
                std::cout << "[extra]  ";
            std::cout << c.group << ": " << c.name;
            if (!c.pass && !c.detail.empty()) std::cout << " -- " << c.detail;
            std::cout << "\n";
        }
        std::cout << fixtures_seen << " fixtures, " << results.checks.size() << " assertions, "
                  << failures << " failures\n";
    }
    return failures == 0 ? 0 : 1;
}

int cmd_fixtures() {
    for (const auto& info : fixture_catalog())
        std::cout << info.id << "  " << info.summary << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact capital requirements and optimal payoff sets on finite spaces"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string position = "0", base = "0", dir, eps, box = "10", only;
    size_t scales = 16;
    bool as_json = false, parallel = false;

    auto* rho_cmd = app.add_subcommand("rho", "capital requirement at a position");
    add_common(rho_cmd, common);
    rho_cmd->add_option("--position", position, "position (named or inline vector)");

    auto* opt_cmd = app.add_subcommand("optimal-set", "optimal payoff set at a position");
    add_common(opt_cmd, common);
    opt_cmd->add_option("--position", position, "position (named or inline vector)");

    auto* eps_cmd =
        app.add_subcommand("epsilon-set", "tolerance-relaxed optimal set at a position");
    add_common(eps_cmd, common);
    eps_cmd->add_option("--position", position, "position (named or inline vector)");
    eps_cmd->add_option("--eps", eps, "price tolerance (positive rational)")->required();

    auto* diag_cmd = app.add_subcommand(
        "diagnose", "deal detection, existence, uniqueness and stability reports");
    add_common(diag_cmd, common);
    std::string diag_position;
    diag_cmd->add_option("--position", diag_position,
                         "restrict the uniqueness sampling to one position");

    auto* probe_cmd =
        app.add_subcommand("probe", "semicontinuity probe along a perturbation direction");
    add_common(probe_cmd, common);
    probe_cmd->add_option("--base", base, "base position (named or inline vector)");
    probe_cmd->add_option("--dir", dir, "perturbation direction (named or inline vector)");
    probe_cmd->add_option("--eps", eps, "optional tolerance: probe the relaxed solution map");
    probe_cmd->add_option("--K", scales, "number of halving steps (2..64)");
    probe_cmd->add_option("--box", box, "truncation box half-width (positive rational)");
    probe_cmd->add_flag("--json", as_json, "emit one JSON document instead of CSV");
    probe_cmd->add_flag("--parallel", parallel, "evaluate independent probes concurrently");

    auto* paper_cmd = app.add_subcommand(
        "paper-examples", "run the built-in fixture and property verification suite");
    paper_cmd->add_option("--only", only, "run a single group (fixture id or \"properties\")");
    paper_cmd->add_flag("--json", as_json, "emit machine-readable results");
    paper_cmd->add_flag("--parallel", parallel, "fan independent evaluations across threads");

    auto* fixtures_cmd = app.add_subcommand("fixtures", "list the built-in fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(rho_cmd)) return cmd_rho(common, position);
        if (app.got_subcommand(opt_cmd)) return cmd_optimal_set(common, position);
        if (app.got_subcommand(eps_cmd)) return cmd_epsilon_set(common, position, eps);
        if (app.got_subcommand(diag_cmd)) return cmd_diagnose(common, diag_position);
        if (app.got_subcommand(probe_cmd))
            return cmd_probe(common, base, dir, eps, scales, box, as_json, parallel);
        if (app.got_subcommand(paper_cmd)) return cmd_paper_examples(only, as_json, parallel);
        if (app.got_subcommand(fixtures_cmd)) return cmd_fixtures();
        throw BadParameter("no subcommand selected");
    } catch (const AcceptabilityArbitrage& e) {
        std::cerr << "error (acceptability arbitrage): " << e.what() << "\n";
        return 4;
    } catch (const NoUnitPayoff& e) {
        std::cerr << "error (assumption failure): " << e.what() << "\n";
        return 3;
    } catch (const NotAttained& e) {
        std::cerr << "error (assumption failure): " << e.what() << "\n";
        return 3;
    } catch (const NeverAcceptable& e) {
        std::cerr << "error (infeasible): " << e.what() << "\n";
        return 3;
    } catch (const EmptyOptimalSet& e) {
        std::cerr << "error (infeasible): " << e.what() << "\n";
        return 3;
    } catch (const EmptyAfterBoxing& e) {
        std::cerr << "error (assumption failure): " << e.what() << "\n";
        return 3;
    } catch (const BoxBoundaryHit& e) {
        std::cerr << "error (assumption failure): " << e.what() << "\n";
        return 3;
    } catch (const InternalCheck& e) {
        std::cerr << "internal check failed: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error (invalid input): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
