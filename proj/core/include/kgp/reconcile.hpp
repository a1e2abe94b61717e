#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgp/errors.hpp"
#include "kgp/ontology.hpp"
#include "kgp/types.hpp"

namespace kgp::reconcile {

/// The four metric values for one string pair, each in [0, 1].
struct SimilarityScores {
    double cosine = 0.0;
    double fuzzy_ratio = 0.0;
    double token_set_ratio = 0.0;
    double jaro_winkler = 0.0;

    double max() const;
    /// Metric-by-metric, in declaration order.
    std::array<double, 4> as_array() const;
};

/// Minimum insert/delete edit distance over Unicode scalar values
/// (substitution counts as 2).
int levenshtein_indel(std::string_view a, std::string_view b);

/// 1 - indel(a,b) / (|a|+|b|); ratio("","") = 1.
double fuzzy_ratio(std::string_view a, std::string_view b);

/// Word-order-insensitive ratio over the two token sets: with i the sorted
/// intersection and da/db the sorted differences, compares join(i),
/// join(i)+join(da), join(i)+join(db) pairwise and takes the best.
double token_set_ratio(std::string_view a, std::string_view b);

/// Standard Jaro with match window floor(max(|a|,|b|)/2) - 1.
double jaro(std::string_view a, std::string_view b);

/// Jaro plus the Winkler common-prefix boost j + l*p*(1-j), l capped at
/// max_prefix. prefix_weight must be in [0, 0.25].
double jaro_winkler(std::string_view a, std::string_view b, double prefix_weight = 0.1,
                    int max_prefix = 4);

/// Smoothed document frequencies over a corpus of strings (one string = one
/// document): idf(t) = ln((1+N)/(1+df(t))) + 1.
class IdfTable {
  public:
    static IdfTable build(std::span<const std::string> corpus);

    double idf(const std::string& token) const;
    int corpus_size() const { return corpus_size_; }

  private:
    std::map<std::string, int> df_;
    int corpus_size_ = 0;
};

/// Cosine of the TF-IDF vectors of a and b over their union vocabulary;
/// 0 when either vector is zero.
double cosine_tfidf(std::string_view a, std::string_view b, const IdfTable& idf);
double cosine_tfidf(std::string_view a, std::string_view b,
                    std::span<const std::string> idf_corpus);

/// All four metrics after trimming and case-folding both strings.
SimilarityScores score_pair(std::string_view x, std::string_view y, const IdfTable& idf);

struct MatchOptions {
    double threshold = 0.80; // in (0, 1]
    bool same_metric = false; // one metric must clear both predicate and object
    bool score_subjects = false; // strict mode: subjects must also clear
};

struct MatchRecord {
    Triple truth;
    std::optional<Triple> best_generated;
    SimilarityScores predicate_scores; // truth vs best_generated
    SimilarityScores object_scores;
    bool covered = false;
};

/// Scores each unique truth triple (deduplicated on predicate+object) against
/// every generated triple. A truth triple is covered when some generated
/// triple clears the threshold on both predicate and object; by default the
/// clearing metrics may differ between the two fields.
std::vector<MatchRecord> match_triples(std::span<const Triple> truth,
                                       std::span<const Triple> generated,
                                       const MatchOptions& options);

struct ModuleCoverage {
    int covered = 0;
    int total = 0;
    double percent = 0.0;
};

struct CoverageReport {
    std::map<std::string, ModuleCoverage> per_module;
    double avg_percent = 0.0; // unweighted mean over modules with records
    double total_percent = 0.0; // 100 * sum(covered) / sum(total)
    int failed_modules = 0; // modules with records but zero coverage
    double avg_percent_excl_failed = 0.0;
    double total_percent_excl_failed = 0.0;
    bool degenerate = false; // no records at all; percents reported as 0
    int skipped_truth_triples = 0; // records owned by skipped modules, dropped
};

/// Buckets records by the owning module of the truth predicate. Records owned
/// by a skipped module are excluded from all denominators.
CoverageReport coverage(std::span<const MatchRecord> records,
                        const std::vector<ontology::OntologyModule>& modules);

class EmptyInputError : public Error {
  public:
    EmptyInputError() : Error("no coverage reports to aggregate") {}
};

/// Run-level aggregate: per-document total-percent statistics plus one pooled
/// report (module counts summed across documents) shaped like a report row.
struct RunSummary {
    double doc_avg = 0.0;
    double doc_min = 0.0;
    double doc_max = 0.0;
    CoverageReport pooled;
};

RunSummary aggregate_runs(std::span<const CoverageReport> reports);

} // namespace kgp::reconcile
