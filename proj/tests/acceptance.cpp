#include "padic/harness.hpp"

#include <iostream>
#include <map>
#include <string>

using namespace padic;

int main() {
    const std::vector<std::pair<int, std::string>> criteria = {
        {1, "projection-formula"},  {2, "gamma-compatibility"},    {3, "order-witness"},
        {4, "amice-bridge"},        {5, "fil0-dual-computation"},  {6, "wach-sandwich"},
        {7, "psi-fixed-point"},     {8, "intertwiner-identities"}, {9, "round-trip-dual-growth"},
        {10, "borel-equivariance"}, {11, "fourier-criterion"},     {12, "determinism"},
    };
    RunConfig cfg;
    Report rep = run_suite(cfg);
    std::map<std::string, const CheckRecord*> by_name;
    for (const auto& r : rep.records) by_name[r.name] = &r;

    // the emitted json must read back to the same report
    bool round_trip = parse_report(emit_report(rep, ReportFormat::json)) == rep;

    int failures = 0;
    for (const auto& [num, name] : criteria) {
        auto it = by_name.find(name);
        bool ok = it != by_name.end() && it->second->verdict == "pass";
        if (num == 12) ok = ok && round_trip;
        if (!ok) ++failures;
        std::cout << "criterion " << num << " " << name << ": " << (ok ? "PASS" : "FAIL");
        if (it != by_name.end()) {
            std::cout << "  (" << it->second->verdict << ", " << it->second->wall_ms << " ms";
            if (!it->second->witness.empty()) std::cout << ", " << it->second->witness;
            std::cout << ")";
        } else {
            std::cout << "  (not run)";
        }
        if (num == 12 && !round_trip) std::cout << "  json round trip differs";
        std::cout << "\n";
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria pass\n";
    return failures == 0 ? 0 : 1;
}
