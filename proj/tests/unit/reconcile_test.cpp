#include <doctest.h>

#include <random>

#include "kgp/reconcile.hpp"

using namespace kgp;
using namespace kgp::reconcile;

namespace {

// Independent oracle for the indel distance: classic 3-operation DP with
// substitution costed at 2 (the production code uses the LCS-style indel
// recurrence instead).
int indel_oracle(const std::string& a, const std::string& b) {
    const std::size_t la = a.size();
    const std::size_t lb = b.size();
    std::vector<std::vector<int>> d(la + 1, std::vector<int>(lb + 1, 0));
    for (std::size_t i = 0; i <= la; ++i) {
        d[i][0] = static_cast<int>(i);
    }
    for (std::size_t j = 0; j <= lb; ++j) {
        d[0][j] = static_cast<int>(j);
    }
    for (std::size_t i = 1; i <= la; ++i) {
        for (std::size_t j = 1; j <= lb; ++j) {
            const int sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 2);
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
        }
    }
    return d[la][lb];
}

// All strings over {a,b} with length <= max_len.
std::vector<std::string> binary_strings(std::size_t max_len) {
    std::vector<std::string> out{""};
    std::size_t level_begin = 0;
    for (std::size_t len = 1; len <= max_len; ++len) {
        const std::size_t level_end = out.size();
        for (std::size_t i = level_begin; i < level_end; ++i) {
            out.push_back(out[i] + "a");
            out.push_back(out[i] + "b");
        }
        level_begin = level_end;
    }
    return out;
}

std::vector<std::string> random_words(std::mt19937& rng, int count) {
    static const char* pool[] = {"joseph", "vance",  "lewis", "enslaved", "person",
                                 "freed",  "record", "agent", "female",   "1913"};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(pool) - 1);
    std::vector<std::string> words;
    for (int i = 0; i < count; ++i) {
        words.emplace_back(pool[pick(rng)]);
    }
    return words;
}

} // namespace

TEST_CASE("levenshtein_indel basics") {
    CHECK(levenshtein_indel("", "abc") == 3);
    CHECK(levenshtein_indel("abc", "abc") == 0);
    CHECK(levenshtein_indel("kitten", "sitting") == 5);
}

TEST_CASE("fuzzy_ratio fixed values") {
    CHECK(fuzzy_ratio("abc", "abc") == doctest::Approx(1.0));
    CHECK(fuzzy_ratio("abcd", "bcde") == doctest::Approx(0.75));
    CHECK(fuzzy_ratio("", "x") == doctest::Approx(0.0));
    CHECK(fuzzy_ratio("", "") == doctest::Approx(1.0));
    CHECK(fuzzy_ratio("hassex", "hassexrecord") == doctest::Approx(1.0 - 6.0 / 18.0));
}

TEST_CASE("fuzzy_ratio equals the exhaustive DP oracle on all short binary strings") {
    const auto strings = binary_strings(6);
    REQUIRE(strings.size() == 127);
    for (const auto& a : strings) {
        for (const auto& b : strings) {
            const std::size_t total = a.size() + b.size();
            const double expected =
                total == 0 ? 1.0 : 1.0 - static_cast<double>(indel_oracle(a, b)) / total;
            REQUIRE(fuzzy_ratio(a, b) == expected);
        }
    }
}

TEST_CASE("token_set_ratio fixed values") {
    CHECK(token_set_ratio("fuzzy was a bear", "bear a was fuzzy") == doctest::Approx(1.0));
    CHECK(token_set_ratio("", "") == doctest::Approx(1.0));
    // Token subset: the intersection-vs-shorter branch is exact.
    CHECK(token_set_ratio("Joseph Vance Lewis", "Joseph Lewis") == doctest::Approx(1.0));
    // Branches: f("joseph lewis","joseph lewis vance") = 0.8,
    //           f("joseph lewis","joseph lewis v") = 12/13,
    //           f("joseph lewis vance","joseph lewis v") = 0.875.
    CHECK(token_set_ratio("Joseph Vance Lewis", "Joseph V. Lewis") ==
          doctest::Approx(12.0 / 13.0));
}

TEST_CASE("token_set_ratio is invariant under token permutation") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto words = random_words(rng, 5);
        std::string a;
        for (const auto& w : words) {
            a += w + " ";
        }
        std::shuffle(words.begin(), words.end(), rng);
        std::string b;
        for (const auto& w : words) {
            b += w + " ";
        }
        CHECK(token_set_ratio(a, b) == doctest::Approx(1.0));
    }
}

TEST_CASE("jaro and jaro_winkler reference pairs") {
    CHECK(jaro("MARTHA", "MARHTA") == doctest::Approx(0.9444444444).epsilon(1e-6));
    CHECK(jaro_winkler("MARTHA", "MARHTA") == doctest::Approx(0.9611).epsilon(1e-4));
    CHECK(jaro_winkler("DWAYNE", "DUANE") == doctest::Approx(0.8400).epsilon(1e-4));
    CHECK(jaro_winkler("x", "x") == doctest::Approx(1.0));
    CHECK(jaro("", "") == doctest::Approx(1.0));
    CHECK(jaro("", "x") == doctest::Approx(0.0));
}

TEST_CASE("jaro_winkler dominates jaro, equal without a common prefix") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> len(0, 10);
    std::uniform_int_distribution<int> ch(0, 3);
    for (int trial = 0; trial < 500; ++trial) {
        std::string a;
        std::string b;
        for (int i = len(rng); i > 0; --i) {
            a.push_back(static_cast<char>('a' + ch(rng)));
        }
        for (int i = len(rng); i > 0; --i) {
            b.push_back(static_cast<char>('a' + ch(rng)));
        }
        const double j = jaro(a, b);
        const double jw = jaro_winkler(a, b);
        CHECK(jw >= j);
        if (a.empty() || b.empty() || a[0] != b[0]) {
            CHECK(jw == j);
        }
    }
}

TEST_CASE("jaro_winkler validates the prefix weight") {
    CHECK_THROWS_AS(jaro_winkler("a", "b", 0.3), std::invalid_argument);
}

TEST_CASE("cosine_tfidf fixed values") {
    const std::vector<std::string> corpus{"enslaved person", "person"};
    CHECK(cosine_tfidf("enslaved person", "enslaved person", corpus) == doctest::Approx(1.0));
    CHECK(cosine_tfidf("alpha beta", "gamma delta", corpus) == doctest::Approx(0.0));
    // Hand-computed with idf(t) = ln((1+N)/(1+df)) + 1 over N=2:
    // idf(enslaved) = ln(3/2)+1, idf(person) = 1; cosine = 1/sqrt(idf_e^2+1).
    CHECK(cosine_tfidf("enslaved person", "person", corpus) ==
          doctest::Approx(0.5797386715376657).epsilon(1e-12));
}

TEST_CASE("cosine_tfidf is symmetric and bounded on random pairs") {
    std::mt19937 rng(31);
    std::vector<std::string> corpus;
    for (int i = 0; i < 20; ++i) {
        std::string doc;
        for (const auto& w : random_words(rng, 4)) {
            doc += w + " ";
        }
        corpus.push_back(doc);
    }
    const IdfTable idf = IdfTable::build(corpus);
    for (int trial = 0; trial < 1000; ++trial) {
        std::string a;
        std::string b;
        for (const auto& w : random_words(rng, 3)) {
            a += w + " ";
        }
        for (const auto& w : random_words(rng, 3)) {
            b += w + " ";
        }
        const double ab = cosine_tfidf(a, b, idf);
        const double ba = cosine_tfidf(b, a, idf);
        CHECK(ab == ba);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0 + 1e-12);
    }
}

TEST_CASE("score_pair casefolds and trims") {
    const IdfTable idf = IdfTable::build(std::vector<std::string>{});
    const SimilarityScores same = score_pair("Female", "female", idf);
    CHECK(same.cosine == doctest::Approx(1.0));
    CHECK(same.fuzzy_ratio == doctest::Approx(1.0));
    CHECK(same.token_set_ratio == doctest::Approx(1.0));
    CHECK(same.jaro_winkler == doctest::Approx(1.0));

    const SimilarityScores empty = score_pair("", "", idf);
    CHECK(empty.cosine == doctest::Approx(1.0));
    CHECK(empty.fuzzy_ratio == doctest::Approx(1.0));
    CHECK(empty.token_set_ratio == doctest::Approx(1.0));
    CHECK(empty.jaro_winkler == doctest::Approx(1.0));

    const SimilarityScores near = score_pair("hasSex", "hasSexRecord", idf);
    CHECK(near.fuzzy_ratio == doctest::Approx(1.0 - 6.0 / 18.0));
}

TEST_CASE("all metrics are symmetric, bounded and reflexive") {
    std::mt19937 rng(47);
    std::uniform_int_distribution<int> len(0, 8);
    std::uniform_int_distribution<int> ch(0, 4);
    const IdfTable idf = IdfTable::build(std::vector<std::string>{"ab", "cd"});
    for (int trial = 0; trial < 300; ++trial) {
        std::string a;
        std::string b;
        for (int i = len(rng); i > 0; --i) {
            a.push_back(static_cast<char>('a' + ch(rng)));
        }
        for (int i = len(rng); i > 0; --i) {
            b.push_back(static_cast<char>('a' + ch(rng)));
        }
        const SimilarityScores ab = score_pair(a, b, idf);
        const SimilarityScores ba = score_pair(b, a, idf);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(ab.as_array()[i] == ba.as_array()[i]);
            CHECK(ab.as_array()[i] >= 0.0);
            CHECK(ab.as_array()[i] <= 1.0 + 1e-12);
        }
        if (!a.empty()) {
            const SimilarityScores self = score_pair(a, a, idf);
            for (double v : self.as_array()) {
                CHECK(v == 1.0);
            }
        }
    }
}

namespace {

std::vector<Triple> fixture_truth() {
    return {
        {"Absalom Jones", "hasSex", "Male"},
        {"Absalom Jones", "hasAgeValue", "71"},
        {"Absalom Jones", "hasPersonStatus", "Freed Person"},
        {"Absalom Jones", "hasRelationshipWith", "Benjamin Rush"},
    };
}

std::vector<ontology::OntologyModule> fixture_modules() {
    return ontology::parse_module_file(
        "# Module: Sex Record Module\nhasSex(Agent, Sex_Type)\n"
        "# Module: Age Record Module\nhasAgeValue(Agent, xsd:double)\n"
        "# Module: Person Status Module\nhasPersonStatus(Agent, Status_Type)\n"
        "# Module: Interagent Relationship Record Module\nhasRelationshipWith(Agent, Agent)\n");
}

} // namespace

TEST_CASE("match_triples covers exact matches") {
    const std::vector<Triple> truth{{"A", "hasSex", "Female"}};
    const std::vector<Triple> generated{{"A", "hasSex", "Female"}};
    const auto records = match_triples(truth, generated, MatchOptions{.threshold = 0.8});
    REQUIRE(records.size() == 1);
    CHECK(records[0].covered);
    CHECK(records[0].best_generated == generated[0]);
}

TEST_CASE("middle initial is covered at 0.80 via token_set_ratio") {
    const std::vector<Triple> truth{{"X", "hasDeathDate", "Joseph Vance Lewis"}};
    const std::vector<Triple> generated{{"X", "hasDeathDate", "Joseph V. Lewis"}};
    const auto records = match_triples(truth, generated, MatchOptions{.threshold = 0.8});
    REQUIRE(records.size() == 1);
    CHECK(records[0].covered);
    CHECK(records[0].object_scores.token_set_ratio == doctest::Approx(12.0 / 13.0));
}

TEST_CASE("empty generated covers nothing") {
    const auto records = match_triples(fixture_truth(), {}, MatchOptions{});
    REQUIRE(records.size() == 4);
    for (const auto& rec : records) {
        CHECK_FALSE(rec.covered);
        CHECK_FALSE(rec.best_generated.has_value());
    }
}

TEST_CASE("truth is deduplicated on predicate+object") {
    std::vector<Triple> truth = fixture_truth();
    truth.push_back(truth[0]);
    truth.push_back({"Someone Else", "hasSex", "male"}); // casefold duplicate
    const std::vector<Triple> generated{{"A", "hasSex", "Male"}};
    const auto with_dupes = match_triples(truth, generated, MatchOptions{});
    const auto without = match_triples(fixture_truth(), generated, MatchOptions{});
    REQUIRE(with_dupes.size() == without.size());
    for (std::size_t i = 0; i < with_dupes.size(); ++i) {
        CHECK(with_dupes[i].covered == without[i].covered);
    }
}

TEST_CASE("same_metric mode is stricter") {
    // Predicate clears only via jaro_winkler-ish partial, object only via
    // token_set: construct a pair where no single metric clears both.
    const std::vector<Triple> truth{{"X", "hasBirthDate", "April 24, 1925"}};
    const std::vector<Triple> generated{{"X", "hasBirthDay", "1925 april 24"}};
    const auto cross =
        match_triples(truth, generated, MatchOptions{.threshold = 0.9, .same_metric = false});
    const auto same =
        match_triples(truth, generated, MatchOptions{.threshold = 0.9, .same_metric = true});
    REQUIRE(cross.size() == 1);
    REQUIRE(same.size() == 1);
    // Cross-metric coverage must be at least as permissive.
    CHECK(cross[0].covered >= same[0].covered);
}

TEST_CASE("threshold monotonicity on a randomized fixture") {
    std::mt19937 rng(59);
    std::vector<Triple> truth;
    std::vector<Triple> generated;
    for (int i = 0; i < 50; ++i) {
        const auto words = random_words(rng, 2);
        truth.push_back({"S", "has" + words[0], words[1] + " value " + std::to_string(i)});
        // Generated triples: some near-misses, some exact, some noise.
        if (i % 3 == 0) {
            generated.push_back(truth.back());
        } else if (i % 3 == 1) {
            generated.push_back({"S", "has" + words[0], words[1] + " val " + std::to_string(i)});
        } else {
            generated.push_back({"S", "rel" + std::to_string(i), "noise " + words[0]});
        }
    }
    int previous = static_cast<int>(truth.size()) + 1;
    for (double tau = 0.5; tau <= 1.0 + 1e-9; tau += 0.05) {
        const auto records =
            match_triples(truth, generated, MatchOptions{.threshold = std::min(tau, 1.0)});
        int covered = 0;
        for (const auto& rec : records) {
            covered += rec.covered ? 1 : 0;
        }
        CHECK(covered <= previous);
        previous = covered;
    }
}

TEST_CASE("coverage buckets by module") {
    const std::vector<Triple> generated{
        {"Absalom Jones", "hasSex", "Male"},
        {"Absalom Jones", "hasAgeValue", "71"},
        {"Absalom Jones", "hasPersonStatus", "freed person"},
    };
    const auto records = match_triples(fixture_truth(), generated, MatchOptions{});
    const auto report = coverage(records, fixture_modules());
    CHECK(report.per_module.size() == 4);
    CHECK(report.per_module.at("Sex Record Module").percent == doctest::Approx(100.0));
    CHECK(report.per_module.at("Interagent Relationship Record Module").percent ==
          doctest::Approx(0.0));
    CHECK(report.avg_percent == doctest::Approx(75.0));
    CHECK(report.total_percent == doctest::Approx(75.0));
    CHECK(report.failed_modules == 1);
    CHECK(report.avg_percent_excl_failed == doctest::Approx(100.0));
    CHECK(report.total_percent_excl_failed == doctest::Approx(100.0));

    int total = 0;
    for (const auto& [name, bucket] : report.per_module) {
        total += bucket.total;
    }
    CHECK(total == static_cast<int>(records.size()));
}

TEST_CASE("coverage: two modules at 100% and 0%") {
    std::vector<MatchRecord> records(2);
    records[0].truth = {"A", "hasSex", "Male"};
    records[0].covered = true;
    records[1].truth = {"A", "hasAgeValue", "71"};
    records[1].covered = false;
    const auto report = coverage(records, fixture_modules());
    CHECK(report.avg_percent == doctest::Approx(50.0));
    CHECK(report.failed_modules == 1);
    CHECK(report.avg_percent_excl_failed == doctest::Approx(100.0));
}

TEST_CASE("coverage with no records is degenerate") {
    const auto report = coverage({}, fixture_modules());
    CHECK(report.degenerate);
    CHECK(report.failed_modules == 0);
    CHECK(report.avg_percent == 0.0);
}

TEST_CASE("coverage drops truth owned by skipped modules") {
    const auto modules = ontology::parse_module_file(
        "# Module: M\nhasX(A, B)\n# Module: R\nisDirectlyBasedOn(A, B)\nSkip: true\n");
    std::vector<MatchRecord> records(2);
    records[0].truth = {"A", "hasX", "v"};
    records[0].covered = true;
    records[1].truth = {"A", "isDirectlyBasedOn", "ref"};
    records[1].covered = false;
    const auto report = coverage(records, modules);
    CHECK(report.per_module.size() == 1);
    CHECK(report.skipped_truth_triples == 1);
    CHECK(report.total_percent == doctest::Approx(100.0));
}

TEST_CASE("unassigned predicates go to the catch-all bucket") {
    std::vector<MatchRecord> records(1);
    records[0].truth = {"A", "mysteryPred", "v"};
    const auto report = coverage(records, fixture_modules());
    CHECK(report.per_module.count("Unassigned") == 1);
}

TEST_CASE("aggregate_runs pools counts and tracks document stats") {
    std::vector<MatchRecord> r1(1);
    r1[0].truth = {"A", "hasSex", "Male"};
    r1[0].covered = true;
    std::vector<MatchRecord> r2(2);
    r2[0].truth = {"B", "hasSex", "Female"};
    r2[0].covered = true;
    r2[1].truth = {"B", "hasAgeValue", "40"};
    r2[1].covered = false;

    const auto modules = fixture_modules();
    const std::vector<CoverageReport> reports{coverage(r1, modules), coverage(r2, modules)};
    const auto summary = aggregate_runs(reports);
    CHECK(summary.doc_avg == doctest::Approx(75.0)); // (100 + 50) / 2
    CHECK(summary.doc_min == doctest::Approx(50.0));
    CHECK(summary.doc_max == doctest::Approx(100.0));
    CHECK(summary.pooled.per_module.at("Sex Record Module").total == 2);
    CHECK(summary.pooled.total_percent == doctest::Approx(100.0 * 2.0 / 3.0));
    CHECK(summary.pooled.failed_modules == 1);

    const auto single = aggregate_runs(std::vector<CoverageReport>{reports[0]});
    CHECK(single.doc_avg == single.doc_min);
    CHECK(single.doc_avg == single.doc_max);

    CHECK_THROWS_AS(aggregate_runs(std::vector<CoverageReport>{}), EmptyInputError);
}
