#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgp/config.hpp"
#include "kgp/errors.hpp"

namespace kgp::pipeline {

/// Layout of one run directory under runs_dir.
struct RunPaths {
    std::filesystem::path root;

    static RunPaths create(const std::filesystem::path& runs_dir, const std::string& run_id);
    static RunPaths open(const std::filesystem::path& runs_dir, const std::string& run_id);

    std::filesystem::path manifest_file() const { return root / "manifest"; }
    std::filesystem::path chunks_dir() const { return root / "chunks"; }
    std::filesystem::path summaries_dir() const { return root / "summaries"; }
    std::filesystem::path context_dir() const { return root / "context"; }
    std::filesystem::path triples_dir() const { return root / "triples"; }
    std::filesystem::path journal_dir() const { return root / "journal"; }
    std::filesystem::path reports_dir() const { return root / "reports"; }
    std::filesystem::path matches_dir() const { return reports_dir() / "matches"; }
};

enum class DocStatus { ok, refusal, empty, parse_total_failure, error };

std::string_view doc_status_name(DocStatus status);

struct DocOutcome {
    std::string doc_id;
    DocStatus status = DocStatus::ok;
    std::string detail;
};

struct CommandResult {
    int exit_code = 0; // 0 ok, 1 partial (some per-document failures)
    std::vector<DocOutcome> docs;
    std::vector<std::string> messages;
};

class EmptyCorpusError : public Error {
  public:
    explicit EmptyCorpusError(const std::string& dir)
        : Error("corpus directory has no .txt documents: " + dir) {}
};

class NoOverlappingDocumentsError : public Error {
  public:
    NoOverlappingDocumentsError()
        : Error("no truth document has generated triples in this run") {}
};

class NoRunsError : public Error {
  public:
    NoRunsError() : Error("no evaluated runs found") {}
};

/// Cleans and chunks every corpus document into
/// runs/<id>/chunks/<doc_id>.chunks.tsv.
CommandResult ingest(const config::RunConfig& cfg, const std::string& run_id);

/// Runs the retrieval strategy and extraction per document; writes triples
/// TSVs and journals every prompt/response exchange.
CommandResult populate(const config::RunConfig& cfg, const std::string& run_id);

struct EvalOptions {
    std::optional<double> threshold;  // overrides cfg.threshold
    std::optional<bool> same_metric;  // overrides cfg.same_metric
};

/// Scores generated triples against the truth TSVs and writes per-document
/// match details plus the run-level report (text and JSON).
CommandResult evaluate(const config::RunConfig& cfg, const std::string& run_id,
                       const EvalOptions& options = {});

/// Table-style label for a run: <model>_<schema>_<variant>.
std::string run_label(const config::RunConfig& cfg);

struct ReportOutput {
    std::string text;
    std::string json;
    std::vector<std::string> notices; // e.g. runs skipped for missing evaluation
};

/// Renders the cross-run comparison table from each run's reports/report.json.
/// An empty run_ids selects every evaluated run under runs_dir.
ReportOutput render_report(const std::filesystem::path& runs_dir,
                           const std::vector<std::string>& run_ids = {});

/// Last populate/ingest status per document, read back from the manifest.
std::map<std::string, std::string> read_doc_statuses(const std::filesystem::path& manifest_file,
                                                     std::string_view stage);

} // namespace kgp::pipeline
