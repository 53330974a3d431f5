// Acceptance gate: runs the frozen verification suite and prints one
// PASS/FAIL line per numbered criterion, plus the extra fixture/property
// invariants. Exits nonzero if anything failed.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "optpay/selftest.hpp"

int main() {
    using optpay::selftest::Check;

    const char* criterion_titles[] = {
        "",  // 0 handled separately
        "value-at-risk fixture: exact requirement, solution sets, violation and relaxed probes",
        "three-atom polytope fixture: augmented set, two requirement routes, grid oracle, "
        "singleton solutions",
        "star-shaped fixture: closed-form requirement, empty sets, non-attainment scan, "
        "certificate",
        "expected shortfall: lifted LP equals the direct tail average; cash-additive "
        "requirement",
        "generated polyhedral suite: every probe consistent with lower semicontinuity",
        "generated suite: existence, boundedness vs scalable deals, translation identity",
        "smooth utility: closed form, stationarity residual, grid oracle, uniqueness",
        "kernel identities: support additivity, projection equivalence, dual certificates",
    };

    optpay::selftest::Results results;
    try {
        results = optpay::selftest::run({});
    } catch (const std::exception& e) {
        std::cout << "FAIL  suite aborted: " << e.what() << "\n";
        return 1;
    }

    std::map<int, std::vector<const Check*>> by_criterion;
    for (const auto& check : results.checks) by_criterion[check.criterion].push_back(&check);

    bool all_pass = true;
    for (int crit = 1; crit <= 8; ++crit) {
        const auto& checks = by_criterion[crit];
        bool pass = !checks.empty();
        for (const auto* c : checks) pass = pass && c->pass;
        all_pass = all_pass && pass;
        std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << crit << ": "
                  << criterion_titles[crit] << " (" << checks.size() << " checks)\n";
        if (!pass) {
            for (const auto* c : checks) {
                if (c->pass) continue;
                std::cout << "      failed: [" << c->group << "] " << c->name;
                if (!c->detail.empty()) std::cout << " -- " << c->detail;
                std::cout << "\n";
            }
        }
    }

    {
        const auto& extras = by_criterion[0];
        bool pass = true;
        for (const auto* c : extras) pass = pass && c->pass;
        all_pass = all_pass && pass;
        std::cout << (pass ? "PASS" : "FAIL")
                  << "  extra fixture and property invariants (" << extras.size()
                  << " checks)\n";
        if (!pass) {
            for (const auto* c : extras) {
                if (c->pass) continue;
                std::cout << "      failed: [" << c->group << "] " << c->name;
                if (!c->detail.empty()) std::cout << " -- " << c->detail;
                std::cout << "\n";
            }
        }
    }

    std::cout << "OVERALL: " << (all_pass ? "PASS" : "FAIL") << " (" << results.checks.size()
              << " checks, " << results.failures() << " failures)\n";
    return all_pass ? 0 : 1;
}
