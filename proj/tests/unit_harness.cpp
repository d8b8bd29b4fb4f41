#include "doctest.h"

#include "padic/harness.hpp"

using namespace padic;

TEST_CASE("config parsing and canonical form") {
    RunConfig def;
    CHECK(parse_config(format_config(def)) == def);
    auto c = parse_config("# comment line\np = 3\nN = 10   # trailing comment\nalpha = 3\nbeta = 2*p^1\nsuite = series_ops\n");
    CHECK(c.precision == 10);
    CHECK(c.beta == 6);
    CHECK(c.suites == std::vector<std::string>{"series_ops"});
    CHECK(config_hash(c) != config_hash(def));
    CHECK(config_hash(def) == config_hash(RunConfig{}));
    CHECK(config_hash(def).size() == 16);
    try {
        parse_config("N = 0\nfoo = 1\nsuite = nonsense\nK = x\n");
        FAIL("expected rejection");
    } catch (const ConfigInvalid& e) {
        CHECK(e.diagnostics().size() == 4);
    }
}

TEST_CASE("bad module parameters are rejected with the constraint named") {
    RunConfig c;
    c.k = 2;
    c.alpha = 3;
    c.beta = 3;
    try {
        validate_config(c);
        FAIL("expected rejection");
    } catch (const ConfigInvalid& e) {
        REQUIRE(e.diagnostics().size() == 1);
        // val(alpha) + val(beta) = 2 cannot equal k - 1 = 1; that constraint trips first
        CHECK(e.diagnostics()[0].find("not-admissible") != std::string::npos);
        CHECK(e.diagnostics()[0].find("k - 1") != std::string::npos);
    }
    CHECK_THROWS_AS(run_suite(c), ConfigInvalid);
}

TEST_CASE("suite selection and reports") {
    RunConfig c;
    c.suites = {"padic_scalars", "gl2_model"};
    Report r = run_suite(c);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].suite == "padic_scalars");
    CHECK(r.records[1].name == "intertwiner-identities");
    CHECK(r.passed == 2);
    for (const auto& rec : r.records) {
        CHECK(rec.config_hash == r.config_hash);
        CHECK_FALSE(rec.anchor.empty());
    }
    CHECK(parse_report(emit_report(r, ReportFormat::json)) == r);
    CHECK(report_fingerprint(r) == report_fingerprint(run_suite(c)));
    std::string text = emit_report(r, ReportFormat::text);
    CHECK(text.find("anchor: ") != std::string::npos);
    CHECK(text.find("digits exact") != std::string::npos);
    // empty report is still a document
    Report empty;
    CHECK(parse_report(emit_report(empty, ReportFormat::json)) == empty);
}

TEST_CASE("catalog") {
    CHECK(check_catalog().size() == 13);
    for (const auto& c : check_catalog()) {
        CHECK_FALSE(c.anchor.empty());
        CHECK_FALSE(c.formula.empty());
    }
    CHECK(find_check("fourier-criterion").has_value());
    CHECK(find_check("correspondence/fourier-criterion")->suite == "correspondence");
    CHECK_FALSE(find_check("nope").has_value());
}
