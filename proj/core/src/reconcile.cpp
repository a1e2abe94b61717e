#include "kgp/reconcile.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "kgp/text.hpp"

namespace kgp::reconcile {

namespace {

std::string casefold(std::string_view s) {
    return text::ascii_lower(text::trim(s));
}

std::string join_tokens(const std::set<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += t;
    }
    return out;
}

} // namespace

double SimilarityScores::max() const {
    return std::max({cosine, fuzzy_ratio, token_set_ratio, jaro_winkler});
}

std::array<double, 4> SimilarityScores::as_array() const {
    return {cosine, fuzzy_ratio, token_set_ratio, jaro_winkler};
}

int levenshtein_indel(std::string_view a_utf8, std::string_view b_utf8) {
    const std::u32string a = text::decode_utf8(a_utf8);
    const std::u32string b = text::decode_utf8(b_utf8);

    std::vector<int> prev(b.size() + 1);
    std::vector<int> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        prev[j] = static_cast<int>(j);
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1]
                                          : std::min(prev[j], cur[j - 1]) + 1;
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double fuzzy_ratio(std::string_view a, std::string_view b) {
    const std::size_t total = text::codepoint_count(a) + text::codepoint_count(b);
    if (total == 0) {
        return 1.0;
    }
    return 1.0 - static_cast<double>(levenshtein_indel(a, b)) / static_cast<double>(total);
}

double token_set_ratio(std::string_view a, std::string_view b) {
    const auto va = text::tokenize(a);
    const auto vb = text::tokenize(b);
    const std::set<std::string> ta(va.begin(), va.end());
    const std::set<std::string> tb(vb.begin(), vb.end());

    std::set<std::string> intersection;
    std::set<std::string> only_a;
    std::set<std::string> only_b;
    std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(),
                          std::inserter(intersection, intersection.end()));
    std::set_difference(ta.begin(), ta.end(), tb.begin(), tb.end(),
                        std::inserter(only_a, only_a.end()));
    std::set_difference(tb.begin(), tb.end(), ta.begin(), ta.end(),
                        std::inserter(only_b, only_b.end()));

    const std::string s0 = join_tokens(intersection);
    auto with_rest = [&s0](const std::set<std::string>& rest) {
        std::string s = s0;
        const std::string joined = join_tokens(rest);
        if (!joined.empty()) {
            if (!s.empty()) {
                s.push_back(' ');
            }
            s += joined;
        }
        return s;
    };
    const std::string s1 = with_rest(only_a);
    const std::string s2 = with_rest(only_b);

    return std::max({fuzzy_ratio(s0, s1), fuzzy_ratio(s0, s2), fuzzy_ratio(s1, s2)});
}

double jaro(std::string_view a_utf8, std::string_view b_utf8) {
    const std::u32string a = text::decode_utf8(a_utf8);
    const std::u32string b = text::decode_utf8(b_utf8);
    const std::size_t la = a.size();
    const std::size_t lb = b.size();
    if (la == 0 && lb == 0) {
        return 1.0;
    }
    if (la == 0 || lb == 0) {
        return 0.0;
    }

    const std::size_t window = std::max(la, lb) / 2 > 0 ? std::max(la, lb) / 2 - 1 : 0;
    std::vector<bool> a_matched(la, false);
    std::vector<bool> b_matched(lb, false);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < la; ++i) {
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(lb - 1, i + window);
        for (std::size_t j = lo; j <= hi; ++j) {
            if (!b_matched[j] && a[i] == b[j]) {
                a_matched[i] = true;
                b_matched[j] = true;
                ++matches;
                break;
            }
        }
    }
    if (matches == 0) {
        return 0.0;
    }

    std::u32string seq_a;
    std::u32string seq_b;
    for (std::size_t i = 0; i < la; ++i) {
        if (a_matched[i]) {
            seq_a.push_back(a[i]);
        }
    }
    for (std::size_t j = 0; j < lb; ++j) {
        if (b_matched[j]) {
            seq_b.push_back(b[j]);
        }
    }
    std::size_t mismatched = 0;
    for (std::size_t k = 0; k < seq_a.size(); ++k) {
        if (seq_a[k] != seq_b[k]) {
            ++mismatched;
        }
    }
    const double m = static_cast<double>(matches);
    const double transpositions = static_cast<double>(mismatched) / 2.0;
    return (m / static_cast<double>(la) + m / static_cast<double>(lb) +
            (m - transpositions) / m) /
           3.0;
}

double jaro_winkler(std::string_view a_utf8, std::string_view b_utf8, double prefix_weight,
                    int max_prefix) {
    if (prefix_weight < 0.0 || prefix_weight > 0.25) {
        throw std::invalid_argument("jaro_winkler prefix weight must be in [0, 0.25]");
    }
    const double j = jaro(a_utf8, b_utf8);
    const std::u32string a = text::decode_utf8(a_utf8);
    const std::u32string b = text::decode_utf8(b_utf8);
    int prefix = 0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()) && prefix < max_prefix; ++i) {
        if (a[i] != b[i]) {
            break;
        }
        ++prefix;
    }
    return j + static_cast<double>(prefix) * prefix_weight * (1.0 - j);
}

IdfTable IdfTable::build(std::span<const std::string> corpus) {
    IdfTable table;
    table.corpus_size_ = static_cast<int>(corpus.size());
    for (const std::string& doc : corpus) {
        const auto tokens = text::tokenize(doc);
        const std::set<std::string> unique(tokens.begin(), tokens.end());
        for (const auto& t : unique) {
            ++table.df_[t];
        }
    }
    return table;
}

double IdfTable::idf(const std::string& token) const {
    const auto it = df_.find(token);
    const int df = it != df_.end() ? it->second : 0;
    return std::log(static_cast<double>(1 + corpus_size_) / static_cast<double>(1 + df)) + 1.0;
}

double cosine_tfidf(std::string_view a, std::string_view b, const IdfTable& idf) {
    const auto ta = text::tokenize(a);
    const auto tb = text::tokenize(b);

    std::map<std::string, int> tf_a;
    std::map<std::string, int> tf_b;
    for (const auto& t : ta) {
        ++tf_a[t];
    }
    for (const auto& t : tb) {
        ++tf_b[t];
    }
    if (!tf_a.empty() && tf_a == tf_b) {
        return 1.0; // parallel vectors, exact
    }

    std::set<std::string> vocab;
    for (const auto& [t, _] : tf_a) {
        vocab.insert(t);
    }
    for (const auto& [t, _] : tf_b) {
        vocab.insert(t);
    }

    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (const auto& t : vocab) {
        const double w = idf.idf(t);
        const auto ia = tf_a.find(t);
        const auto ib = tf_b.find(t);
        const double wa = ia != tf_a.end() ? ia->second * w : 0.0;
        const double wb = ib != tf_b.end() ? ib->second * w : 0.0;
        dot += wa * wb;
        norm_a += wa * wa;
        norm_b += wb * wb;
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

double cosine_tfidf(std::string_view a, std::string_view b,
                    std::span<const std::string> idf_corpus) {
    return cosine_tfidf(a, b, IdfTable::build(idf_corpus));
}

SimilarityScores score_pair(std::string_view x, std::string_view y, const IdfTable& idf) {
    const std::string cx = casefold(x);
    const std::string cy = casefold(y);
    SimilarityScores s;
    s.cosine = cosine_tfidf(cx, cy, idf);
    s.fuzzy_ratio = fuzzy_ratio(cx, cy);
    s.token_set_ratio = token_set_ratio(cx, cy);
    s.jaro_winkler = jaro_winkler(cx, cy);
    // Identical strings score 1 on every metric; the empty pair scores 1 by
    // convention, which the token-set/fuzzy conventions give us already, but
    // cosine of two empty vectors would be 0.
    if (cx == cy) {
        s.cosine = 1.0;
    }
    return s;
}

std::vector<MatchRecord> match_triples(std::span<const Triple> truth,
                                       std::span<const Triple> generated,
                                       const MatchOptions& options) {
    if (options.threshold <= 0.0 || options.threshold > 1.0) {
        throw std::invalid_argument("threshold must be in (0, 1]");
    }

    // Unique truth triples on (predicate, object), first occurrence order.
    std::vector<Triple> unique_truth;
    {
        std::set<std::pair<std::string, std::string>> seen;
        for (const Triple& t : truth) {
            if (seen.insert({casefold(t.predicate), casefold(t.object)}).second) {
                unique_truth.push_back(t);
            }
        }
    }

    // IDF corpora: the comparison population within the file pair.
    std::vector<std::string> pred_corpus;
    std::vector<std::string> obj_corpus;
    std::vector<std::string> subj_corpus;
    for (const Triple& t : unique_truth) {
        pred_corpus.push_back(t.predicate);
        obj_corpus.push_back(t.object);
        subj_corpus.push_back(t.subject);
    }
    for (const Triple& g : generated) {
        pred_corpus.push_back(g.predicate);
        obj_corpus.push_back(g.object);
        subj_corpus.push_back(g.subject);
    }
    const IdfTable pred_idf = IdfTable::build(pred_corpus);
    const IdfTable obj_idf = IdfTable::build(obj_corpus);
    const IdfTable subj_idf = IdfTable::build(subj_corpus);

    const double tau = options.threshold;
    std::vector<MatchRecord> records;
    records.reserve(unique_truth.size());
    for (const Triple& t : unique_truth) {
        MatchRecord rec;
        rec.truth = t;
        double best_sum = -1.0;
        for (const Triple& g : generated) {
            const SimilarityScores ps = score_pair(t.predicate, g.predicate, pred_idf);
            const SimilarityScores os = score_pair(t.object, g.object, obj_idf);

            bool clears = false;
            if (options.same_metric) {
                const auto pa = ps.as_array();
                const auto oa = os.as_array();
                for (std::size_t m = 0; m < pa.size(); ++m) {
                    if (pa[m] >= tau && oa[m] >= tau) {
                        clears = true;
                        break;
                    }
                }
            } else {
                clears = ps.max() >= tau && os.max() >= tau;
            }
            if (clears && options.score_subjects) {
                clears = score_pair(t.subject, g.subject, subj_idf).max() >= tau;
            }

            // Prefer covering candidates; within a class, highest combined
            // score wins and earlier generated order breaks ties.
            const double sum = ps.max() + os.max();
            const bool better =
                (clears && !rec.covered) || (clears == rec.covered && sum > best_sum);
            if (better) {
                rec.best_generated = g;
                rec.predicate_scores = ps;
                rec.object_scores = os;
                rec.covered = clears;
                best_sum = sum;
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

CoverageReport coverage(std::span<const MatchRecord> records,
                        const std::vector<ontology::OntologyModule>& modules) {
    CoverageReport report;
    for (const MatchRecord& rec : records) {
        const ontology::OntologyModule* m =
            ontology::find_module_of_predicate(rec.truth.predicate, modules);
        if (m != nullptr && m->skipped) {
            ++report.skipped_truth_triples;
            continue;
        }
        const std::string name = m != nullptr ? m->name : std::string{ontology::kUnassignedModule};
        ModuleCoverage& bucket = report.per_module[name];
        ++bucket.total;
        if (rec.covered) {
            ++bucket.covered;
        }
    }

    if (report.per_module.empty()) {
        report.degenerate = true;
        return report;
    }

    int sum_covered = 0;
    int sum_total = 0;
    double percent_sum = 0.0;
    double percent_sum_ok = 0.0;
    int sum_covered_ok = 0;
    int sum_total_ok = 0;
    int modules_ok = 0;
    for (auto& [name, bucket] : report.per_module) {
        bucket.percent = 100.0 * bucket.covered / bucket.total;
        sum_covered += bucket.covered;
        sum_total += bucket.total;
        percent_sum += bucket.percent;
        if (bucket.covered == 0) {
            ++report.failed_modules;
        } else {
            percent_sum_ok += bucket.percent;
            sum_covered_ok += bucket.covered;
            sum_total_ok += bucket.total;
            ++modules_ok;
        }
    }
    const auto n_modules = static_cast<double>(report.per_module.size());
    report.avg_percent = percent_sum / n_modules;
    report.total_percent = 100.0 * sum_covered / sum_total;
    report.avg_percent_excl_failed = modules_ok > 0 ? percent_sum_ok / modules_ok : 0.0;
    report.total_percent_excl_failed =
        sum_total_ok > 0 ? 100.0 * sum_covered_ok / sum_total_ok : 0.0;
    return report;
}

RunSummary aggregate_runs(std::span<const CoverageReport> reports) {
    if (reports.empty()) {
        throw EmptyInputError();
    }

    RunSummary summary;
    summary.doc_min = reports.front().total_percent;
    summary.doc_max = reports.front().total_percent;
    double sum = 0.0;
    for (const CoverageReport& r : reports) {
        sum += r.total_percent;
        summary.doc_min = std::min(summary.doc_min, r.total_percent);
        summary.doc_max = std::max(summary.doc_max, r.total_percent);
        for (const auto& [name, bucket] : r.per_module) {
            ModuleCoverage& pooled = summary.pooled.per_module[name];
            pooled.covered += bucket.covered;
            pooled.total += bucket.total;
        }
        summary.pooled.skipped_truth_triples += r.skipped_truth_triples;
    }
    summary.doc_avg = sum / static_cast<double>(reports.size());

    // Recompute pooled statistics from the summed counts.
    CoverageReport& pooled = summary.pooled;
    if (pooled.per_module.empty()) {
        pooled.degenerate = true;
        return summary;
    }
    int sum_covered = 0;
    int sum_total = 0;
    double percent_sum = 0.0;
    double percent_sum_ok = 0.0;
    int sum_covered_ok = 0;
    int sum_total_ok = 0;
    int modules_ok = 0;
    for (auto& [name, bucket] : pooled.per_module) {
        bucket.percent = 100.0 * bucket.covered / bucket.total;
        sum_covered += bucket.covered;
        sum_total += bucket.total;
        percent_sum += bucket.percent;
        if (bucket.covered == 0) {
            ++pooled.failed_modules;
        } else {
            percent_sum_ok += bucket.percent;
            sum_covered_ok += bucket.covered;
            sum_total_ok += bucket.total;
            ++modules_ok;
        }
    }
    pooled.avg_percent = percent_sum / static_cast<double>(pooled.per_module.size());
    pooled.total_percent = 100.0 * sum_covered / sum_total;
    pooled.avg_percent_excl_failed = modules_ok > 0 ? percent_sum_ok / modules_ok : 0.0;
    pooled.total_percent_excl_failed =
        sum_total_ok > 0 ? 100.0 * sum_covered_ok / sum_total_ok : 0.0;
    return summary;
}

} // namespace kgp::reconcile
