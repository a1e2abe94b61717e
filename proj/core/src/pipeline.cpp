#include "kgp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kgp/corpus.hpp"
#include "kgp/extraction.hpp"
#include "kgp/llm.hpp"
#include "kgp/ontology.hpp"
#include "kgp/reconcile.hpp"
#include "kgp/retrieval.hpp"
#include "kgp/text.hpp"
#include "kgp/tsv.hpp"

namespace kgp::pipeline {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write file: " + path.string());
    }
    out << content;
}

std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir,
                                                std::string_view extension) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir)) {
        return files;
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_directory() && entry.path().extension() == extension) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

// Append-only JSONL event log; writes are serialized.
class Manifest {
  public:
    explicit Manifest(const std::filesystem::path& file)
        : out_(file, std::ios::binary | std::ios::app) {
        if (!out_) {
            throw Error("cannot open manifest: " + file.string());
        }
    }

    void append(const json& event) {
        std::lock_guard lock(mutex_);
        out_ << event.dump() << "\n";
        out_.flush();
    }

    void doc_status(std::string_view stage, std::string_view doc_id, std::string_view status,
                    std::string_view detail, long elapsed_ms) {
        json event;
        event["event"] = "doc_status";
        event["stage"] = stage;
        event["doc_id"] = doc_id;
        event["status"] = status;
        if (!detail.empty()) {
            event["detail"] = detail;
        }
        event["elapsed_ms"] = elapsed_ms;
        append(event);
    }

  private:
    std::ofstream out_;
    std::mutex mutex_;
};

// Ensures later commands run against the config the run was created with;
// evaluation-time knobs are not part of the identity.
void check_or_record_identity(const RunPaths& paths, const config::RunConfig& cfg,
                              Manifest& manifest, std::string_view command,
                              const std::string& run_id) {
    const std::string identity = config::identity_snapshot_json(cfg);
    std::ifstream in(paths.manifest_file());
    std::string line;
    while (std::getline(in, line)) {
        json event;
        try {
            event = json::parse(line);
        } catch (const json::exception&) {
            continue;
        }
        if (event.value("event", "") == "run_start" && event.contains("identity")) {
            if (event["identity"].dump() != json::parse(identity).dump()) {
                throw ConfigError("run " + run_id +
                                  " was created with a different config; use a new --run-id");
            }
            break;
        }
    }
    json start;
    start["event"] = "run_start";
    start["command"] = command;
    start["run_id"] = run_id;
    start["prompt_template_version"] = std::string(extraction::kPromptTemplateVersion);
    start["identity"] = json::parse(identity);
    manifest.append(start);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), count));
    if (n <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        threads.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                fn(i);
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
}

std::string chunk_file_row(const corpus::Chunk& chunk) {
    return std::to_string(chunk.index) + "\t" + std::to_string(chunk.token_estimate) + "\t" +
           tsv::escape_field(chunk.text) + "\n";
}

std::vector<corpus::Chunk> load_chunks(const std::filesystem::path& file,
                                       const std::string& doc_id, int budget) {
    std::vector<corpus::Chunk> chunks;
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error("cannot read chunk file: " + file.string());
    }
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = tsv::split_row(line);
        if (fields.size() != 3) {
            throw Error("malformed chunk row " + std::to_string(line_no) + " in " +
                        file.string());
        }
        corpus::Chunk chunk;
        chunk.doc_id = doc_id;
        chunk.index = std::stoi(fields[0]);
        chunk.token_estimate = std::stoi(fields[1]);
        chunk.text = tsv::unescape_field(fields[2]);
        chunk.oversized = chunk.token_estimate > budget;
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

// Writes every exchange verbatim; calls after the first are separated by a
// labeled divider so single-call documents journal the exact request bytes.
class JournalingClient final : public llm::LlmClient {
  public:
    JournalingClient(llm::LlmClient& inner, const std::filesystem::path& prompt_file,
                     const std::filesystem::path& response_file)
        : inner_(inner), prompt_out_(prompt_file, std::ios::binary),
          response_out_(response_file, std::ios::binary) {}

    llm::ChatResponse complete(const llm::ChatRequest& request) override {
        ++calls_;
        std::string prompt_text;
        for (const auto& m : request.messages) {
            prompt_text += m.content;
        }
        write_block(prompt_out_, prompt_text);
        try {
            llm::ChatResponse response = inner_.complete(request);
            write_block(response_out_, response.content);
            return response;
        } catch (const std::exception& e) {
            write_block(response_out_, std::string("<error> ") + e.what());
            throw;
        }
    }

  private:
    void write_block(std::ofstream& out, std::string_view content) {
        if (calls_ > 1) {
            out << "\n===== call " << calls_ << " =====\n";
        }
        out << content;
        out.flush();
    }

    llm::LlmClient& inner_;
    std::ofstream prompt_out_;
    std::ofstream response_out_;
    int calls_ = 0;
};

std::unique_ptr<llm::LlmClient> make_backend(const config::RunConfig& cfg) {
    if (cfg.backend == config::Backend::scripted) {
        auto entries = llm::ScriptedClient::load_script(*cfg.script_file);
        auto prefixes = cfg.refusal_prefixes.empty() ? llm::default_refusal_prefixes()
                                                     : cfg.refusal_prefixes;
        return std::make_unique<llm::ScriptedClient>(std::move(entries), std::move(prefixes));
    }
    llm::HttpClientConfig http;
    http.base_url = cfg.api_base_url;
    const char* key = std::getenv("KGP_API_KEY");
    http.api_key = key != nullptr ? key : "";
    http.inflight_cap = cfg.llm_inflight_cap;
    if (!cfg.refusal_prefixes.empty()) {
        http.refusal_prefixes = cfg.refusal_prefixes;
    }
    return std::make_unique<llm::HttpLlmClient>(std::move(http));
}

std::unique_ptr<retrieval::Embedder> make_embedder(const config::RunConfig& cfg) {
    if (cfg.embedding == "http") {
        const char* key = std::getenv("KGP_API_KEY");
        return std::make_unique<retrieval::HttpEmbedder>(cfg.api_base_url, cfg.embedding_model,
                                                         key != nullptr ? key : "",
                                                         cfg.embedding_dim);
    }
    return std::make_unique<retrieval::HashedBagEmbedder>(cfg.embedding_dim);
}

std::string fmt2(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string fmt6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

json module_coverage_json(const reconcile::CoverageReport& report) {
    json per_module = json::object();
    for (const auto& [name, bucket] : report.per_module) {
        per_module[name] = {{"covered", bucket.covered},
                            {"total", bucket.total},
                            {"percent", bucket.percent}};
    }
    return per_module;
}

json coverage_json(const reconcile::CoverageReport& report) {
    json out;
    out["per_module"] = module_coverage_json(report);
    out["avg_percent"] = report.avg_percent;
    out["total_percent"] = report.total_percent;
    out["failed_modules"] = report.failed_modules;
    out["avg_percent_excl_failed"] = report.avg_percent_excl_failed;
    out["total_percent_excl_failed"] = report.total_percent_excl_failed;
    out["degenerate"] = report.degenerate;
    out["skipped_truth_triples"] = report.skipped_truth_triples;
    return out;
}

} // namespace

std::string_view doc_status_name(DocStatus status) {
    switch (status) {
    case DocStatus::ok:
        return "ok";
    case DocStatus::refusal:
        return "refusal";
    case DocStatus::empty:
        return "empty";
    case DocStatus::parse_total_failure:
        return "parse_total_failure";
    case DocStatus::error:
        return "error";
    }
    return "unknown";
}

RunPaths RunPaths::create(const std::filesystem::path& runs_dir, const std::string& run_id) {
    RunPaths paths{runs_dir / run_id};
    std::filesystem::create_directories(paths.chunks_dir());
    std::filesystem::create_directories(paths.summaries_dir());
    std::filesystem::create_directories(paths.context_dir());
    std::filesystem::create_directories(paths.triples_dir());
    std::filesystem::create_directories(paths.journal_dir());
    std::filesystem::create_directories(paths.matches_dir());
    return paths;
}

RunPaths RunPaths::open(const std::filesystem::path& runs_dir, const std::string& run_id) {
    RunPaths paths{runs_dir / run_id};
    if (!std::filesystem::is_directory(paths.root)) {
        throw ConfigError("run directory does not exist: " + paths.root.string());
    }
    return paths;
}

std::string run_label(const config::RunConfig& cfg) {
    return cfg.model + "_" + cfg.modules_file.stem().string() + "_" +
           std::string(config::variant_name(cfg.prompt_variant));
}

CommandResult ingest(const config::RunConfig& cfg, const std::string& run_id) {
    const auto files = sorted_files(cfg.corpus_dir, ".txt");
    if (files.empty()) {
        throw EmptyCorpusError(cfg.corpus_dir.string());
    }

    const RunPaths paths = RunPaths::create(cfg.runs_dir, run_id);
    Manifest manifest(paths.manifest_file());
    check_or_record_identity(paths, cfg, manifest, "ingest", run_id);

    CommandResult result;
    for (const auto& file : files) {
        const auto started = std::chrono::steady_clock::now();
        DocOutcome outcome;
        outcome.doc_id = file.stem().string();
        try {
            const corpus::RawDocument raw = corpus::load_document(file);
            std::vector<std::string> warnings;
            const corpus::CleanDocument clean =
                corpus::clean_document(raw, cfg.cleaning, &warnings);
            const std::vector<corpus::Chunk> chunks =
                corpus::chunk_paragraphs(clean, cfg.chunk_token_budget);

            std::string content;
            for (const corpus::Chunk& chunk : chunks) {
                content += chunk_file_row(chunk);
            }
            write_file(paths.chunks_dir() / (outcome.doc_id + ".chunks.tsv"), content);
            for (const std::string& w : warnings) {
                result.messages.push_back("warning: " + w);
            }
            outcome.detail = std::to_string(chunks.size()) + " chunks";
        } catch (const std::exception& e) {
            outcome.status = DocStatus::error;
            outcome.detail = e.what();
            result.exit_code = 1;
        }
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        manifest.doc_status("ingest", outcome.doc_id, doc_status_name(outcome.status),
                            outcome.detail, elapsed);
        result.docs.push_back(std::move(outcome));
    }
    manifest.append(json{{"event", "run_end"},
                         {"command", "ingest"},
                         {"exit_code", result.exit_code}});
    return result;
}

CommandResult populate(const config::RunConfig& cfg, const std::string& run_id) {
    const RunPaths paths = RunPaths::open(cfg.runs_dir, run_id);
    const auto chunk_files = sorted_files(paths.chunks_dir(), ".tsv");
    if (chunk_files.empty()) {
        throw ConfigError("run " + run_id + " has no chunks; run ingest first");
    }

    // Fatal setup errors must fire before any LLM call.
    const auto modules = ontology::parse_module_file(read_file(cfg.modules_file));
    const std::string module_content = ontology::render_module_content(modules);
    std::string example_summary;
    if (cfg.strategy == Strategy::Summarization) {
        if (!cfg.example_summary_file.has_value()) {
            throw ConfigError("strategy=summarization requires example_summary_file");
        }
        example_summary = read_file(*cfg.example_summary_file);
        while (!example_summary.empty() &&
               (example_summary.back() == '\n' || example_summary.back() == '\r')) {
            example_summary.pop_back();
        }
    }
    const std::unique_ptr<llm::LlmClient> backend = make_backend(cfg);
    const std::unique_ptr<retrieval::Embedder> embedder = make_embedder(cfg);

    Manifest manifest(paths.manifest_file());
    check_or_record_identity(paths, cfg, manifest, "populate", run_id);
    if (cfg.chunk_token_budget > cfg.model_context_tokens) {
        manifest.append(json{{"event", "warning"},
                             {"message", "chunk_token_budget exceeds model_context_tokens"}});
    }

    llm::RequestParams request_params;
    request_params.model = cfg.model;
    request_params.temperature = cfg.temperature;
    llm::RetryPolicy retry;
    retry.max_attempts = cfg.max_attempts;
    retry.base_delay = std::chrono::milliseconds(cfg.retry_base_delay_ms);

    std::vector<DocOutcome> outcomes(chunk_files.size());
    parallel_for(chunk_files.size(), cfg.workers, [&](std::size_t i) {
        const auto started = std::chrono::steady_clock::now();
        const std::filesystem::path& file = chunk_files[i];
        // strip the ".chunks" inner extension
        const std::string doc_id = file.stem().stem().string();
        DocOutcome& outcome = outcomes[i];
        outcome.doc_id = doc_id;
        try {
            const auto chunks = load_chunks(file, doc_id, cfg.chunk_token_budget);

            JournalingClient journaled(*backend, paths.journal_dir() / (doc_id + ".prompt.txt"),
                                       paths.journal_dir() / (doc_id + ".response.txt"));

            retrieval::RetrievalParams rp;
            rp.strategy = cfg.strategy;
            rp.rag_top_k = cfg.rag_top_k;
            rp.variant = cfg.prompt_variant;
            if (cfg.prompt_variant == PromptVariant::MainAgentRestricted) {
                rp.agent_name = corpus::title_from_doc_id(doc_id);
            }
            rp.example_summary = example_summary;

            const retrieval::RetrievalOutcome retrieved = retrieval::retrieve_context(
                chunks, module_content, rp, journaled, request_params, retry, *embedder);

            std::string provenance;
            for (std::size_t p = 0; p < retrieved.context.provenance.size(); ++p) {
                if (p > 0) {
                    provenance += ",";
                }
                provenance += std::to_string(retrieved.context.provenance[p]);
            }
            write_file(paths.context_dir() / (doc_id + ".context.txt"),
                       "# strategy=" + std::string(config::strategy_name(cfg.strategy)) +
                           " provenance=" + provenance + "\n" + retrieved.context.text);
            if (cfg.strategy == Strategy::Summarization) {
                write_file(paths.summaries_dir() / (doc_id + ".summary.txt"),
                           retrieved.context.text);
            }
            if (retrieved.store.has_value()) {
                std::ofstream vec_out(paths.context_dir() / (doc_id + ".vectors.tsv"),
                                      std::ios::binary);
                retrieved.store->save(vec_out);
            }

            const extraction::ExtractionResult extracted = extraction::extract(
                retrieved.context, modules, journaled, request_params, retry, cfg.prompt_variant,
                rp.agent_name);

            extraction::write_triples_tsv(extracted.triples,
                                          paths.triples_dir() / (doc_id + ".tsv"));
            if (extracted.failure.has_value()) {
                switch (*extracted.failure) {
                case extraction::Failure::refusal:
                    outcome.status = DocStatus::refusal;
                    break;
                case extraction::Failure::empty:
                    outcome.status = DocStatus::empty;
                    break;
                case extraction::Failure::parse_total_failure:
                    outcome.status = DocStatus::parse_total_failure;
                    break;
                }
            }
            std::string detail = std::to_string(extracted.triples.size()) + " triples";
            if (!extracted.unparsed_lines.empty()) {
                detail += ", " + std::to_string(extracted.unparsed_lines.size()) + " unparsed";
            }
            for (const std::string& w : retrieved.warnings) {
                detail += "; " + w;
            }
            outcome.detail = detail;
        } catch (const llm::RefusalError& e) {
            outcome.status = DocStatus::refusal;
            outcome.detail = e.what();
            extraction::write_triples_tsv({}, paths.triples_dir() / (doc_id + ".tsv"));
        } catch (const std::exception& e) {
            outcome.status = DocStatus::error;
            outcome.detail = e.what();
            extraction::write_triples_tsv({}, paths.triples_dir() / (doc_id + ".tsv"));
        }
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        manifest.doc_status("populate", doc_id, doc_status_name(outcome.status), outcome.detail,
                            elapsed);
    });

    CommandResult result;
    result.docs = std::move(outcomes);
    for (const DocOutcome& outcome : result.docs) {
        if (outcome.status != DocStatus::ok) {
            result.exit_code = 1;
        }
    }
    manifest.append(json{{"event", "run_end"},
                         {"command", "populate"},
                         {"exit_code", result.exit_code}});
    return result;
}

namespace {

std::string matches_tsv(const std::vector<reconcile::MatchRecord>& records) {
    std::string out = "truth_subject\ttruth_predicate\ttruth_object\tgen_subject\tgen_predicate"
                      "\tgen_object\tpred_cosine\tpred_fuzzy\tpred_token_set\tpred_jaro_winkler"
                      "\tobj_cosine\tobj_fuzzy\tobj_token_set\tobj_jaro_winkler\tcovered\n";
    for (const auto& rec : records) {
        std::vector<std::string> fields;
        fields.push_back(tsv::escape_field(rec.truth.subject));
        fields.push_back(tsv::escape_field(rec.truth.predicate));
        fields.push_back(tsv::escape_field(rec.truth.object));
        if (rec.best_generated.has_value()) {
            fields.push_back(tsv::escape_field(rec.best_generated->subject));
            fields.push_back(tsv::escape_field(rec.best_generated->predicate));
            fields.push_back(tsv::escape_field(rec.best_generated->object));
        } else {
            fields.insert(fields.end(), {"", "", ""});
        }
        for (double s : rec.predicate_scores.as_array()) {
            fields.push_back(fmt6(s));
        }
        for (double s : rec.object_scores.as_array()) {
            fields.push_back(fmt6(s));
        }
        fields.emplace_back(rec.covered ? "true" : "false");
        out += tsv::join_row(fields) + "\n";
    }
    return out;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s;
}

std::string pad_left(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.insert(0, width - s.size(), ' ');
    }
    return s;
}

std::string table_row_line(const std::string& label, std::size_t label_width,
                           const reconcile::CoverageReport& row) {
    std::string line = pad_right(label, label_width);
    line += pad_left(fmt2(row.avg_percent), 9);
    line += pad_left(fmt2(row.total_percent), 9);
    line += pad_left(std::to_string(row.failed_modules), 5);
    line += pad_left(fmt2(row.avg_percent_excl_failed), 10);
    line += pad_left(fmt2(row.total_percent_excl_failed), 10);
    return line;
}

std::string table_header_line(std::size_t label_width) {
    std::string line = pad_right("LLM Model", label_width);
    line += pad_left("Avg %", 9);
    line += pad_left("Ttl %", 9);
    line += pad_left("#F", 5);
    line += pad_left("Avg_A %", 10);
    line += pad_left("Ttl_A %", 10);
    return line;
}

} // namespace

CommandResult evaluate(const config::RunConfig& cfg, const std::string& run_id,
                       const EvalOptions& options) {
    const RunPaths paths = RunPaths::open(cfg.runs_dir, run_id);
    const auto truth_files = sorted_files(cfg.truth_dir, ".tsv");
    if (truth_files.empty()) {
        throw ConfigError("truth directory has no .tsv files: " + cfg.truth_dir.string());
    }
    const auto modules = ontology::parse_module_file(read_file(cfg.modules_file));

    reconcile::MatchOptions match_options;
    match_options.threshold = options.threshold.value_or(cfg.threshold);
    match_options.same_metric = options.same_metric.value_or(cfg.same_metric);
    match_options.score_subjects = cfg.score_subjects;
    if (match_options.threshold <= 0.0 || match_options.threshold > 1.0) {
        throw ConfigError("threshold must be in (0, 1]");
    }

    std::filesystem::create_directories(paths.matches_dir());

    CommandResult result;
    std::vector<std::string> doc_ids;
    std::vector<reconcile::CoverageReport> doc_reports;
    int overlapping = 0;
    for (const auto& truth_file : truth_files) {
        const std::string doc_id = truth_file.stem().string();
        DocOutcome outcome;
        outcome.doc_id = doc_id;
        try {
            const std::vector<Triple> truth = extraction::read_triples_tsv(truth_file);
            if (truth.empty()) {
                outcome.detail = "empty truth file, skipped";
                result.docs.push_back(std::move(outcome));
                continue;
            }
            const std::filesystem::path generated_file = paths.triples_dir() / (doc_id + ".tsv");
            std::vector<Triple> generated;
            if (std::filesystem::exists(generated_file)) {
                generated = extraction::read_triples_tsv(generated_file);
                ++overlapping;
            } else {
                outcome.detail = "no generated triples; counted at 0%";
            }

            const auto records = reconcile::match_triples(truth, generated, match_options);
            write_file(paths.matches_dir() / (doc_id + ".tsv"), matches_tsv(records));
            doc_ids.push_back(doc_id);
            doc_reports.push_back(reconcile::coverage(records, modules));
        } catch (const std::exception& e) {
            outcome.status = DocStatus::error;
            outcome.detail = e.what();
            result.exit_code = 1;
        }
        result.docs.push_back(std::move(outcome));
    }
    if (overlapping == 0) {
        throw NoOverlappingDocumentsError();
    }

    const reconcile::RunSummary summary = reconcile::aggregate_runs(doc_reports);
    const std::string label = run_label(cfg);

    json report;
    report["label"] = label;
    report["parameters"] = {
        {"threshold", match_options.threshold},
        {"same_metric", match_options.same_metric},
        {"score_subjects", match_options.score_subjects},
        {"strategy", std::string(config::strategy_name(cfg.strategy))},
        {"prompt_variant", std::string(config::variant_name(cfg.prompt_variant))},
        {"model", cfg.model},
        {"schema", cfg.modules_file.stem().string()},
        {"chunk_token_budget", cfg.chunk_token_budget},
        {"rag_top_k", cfg.rag_top_k},
    };
    json documents = json::array();
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
        json doc = coverage_json(doc_reports[i]);
        doc["doc_id"] = doc_ids[i];
        documents.push_back(std::move(doc));
    }
    report["documents"] = std::move(documents);
    report["doc_totals"] = {{"avg", summary.doc_avg},
                            {"min", summary.doc_min},
                            {"max", summary.doc_max}};
    report["table_row"] = {
        {"avg_percent", summary.pooled.avg_percent},
        {"total_percent", summary.pooled.total_percent},
        {"failed_modules", summary.pooled.failed_modules},
        {"avg_percent_excl_failed", summary.pooled.avg_percent_excl_failed},
        {"total_percent_excl_failed", summary.pooled.total_percent_excl_failed},
    };
    report["pooled_per_module"] = module_coverage_json(summary.pooled);
    std::filesystem::create_directories(paths.reports_dir());
    write_file(paths.reports_dir() / "report.json", report.dump(2) + "\n");

    // Aligned-text rendering of the same report.
    std::string txt;
    txt += "Run: " + label + "\n";
    txt += "Threshold: " + fmt2(match_options.threshold) +
           "   Strategy: " + std::string(config::strategy_name(cfg.strategy)) +
           "   Variant: " + std::string(config::variant_name(cfg.prompt_variant)) +
           "   Chunk budget: " + std::to_string(cfg.chunk_token_budget) + "\n\n";
    std::size_t module_width = std::string("Module").size();
    for (const auto& [name, bucket] : summary.pooled.per_module) {
        module_width = std::max(module_width, name.size());
    }
    txt += pad_right("Module", module_width) + pad_left("Covered", 10) + pad_left("Total", 8) +
           pad_left("Percent", 10) + "\n";
    for (const auto& [name, bucket] : summary.pooled.per_module) {
        txt += pad_right(name, module_width) + pad_left(std::to_string(bucket.covered), 10) +
               pad_left(std::to_string(bucket.total), 8) + pad_left(fmt2(bucket.percent), 10) +
               "\n";
    }
    txt += "\n";
    const std::size_t label_width = std::max(label.size(), std::string("LLM Model").size()) + 2;
    txt += table_header_line(label_width) + "\n";
    txt += table_row_line(label, label_width, summary.pooled) + "\n\n";
    txt += "Documents: avg " + fmt2(summary.doc_avg) + "   min " + fmt2(summary.doc_min) +
           "   max " + fmt2(summary.doc_max) + "\n";
    std::size_t doc_width = 0;
    for (const std::string& doc_id : doc_ids) {
        doc_width = std::max(doc_width, doc_id.size());
    }
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
        txt += "  " + pad_right(doc_ids[i], doc_width + 2) +
               pad_left(fmt2(doc_reports[i].total_percent), 8) + "\n";
    }
    write_file(paths.reports_dir() / "report.txt", txt);
    return result;
}

ReportOutput render_report(const std::filesystem::path& runs_dir,
                           const std::vector<std::string>& run_ids) {
    std::vector<std::string> selected;
    if (run_ids.empty()) {
        if (std::filesystem::is_directory(runs_dir)) {
            for (const auto& entry : std::filesystem::directory_iterator(runs_dir)) {
                if (entry.is_directory()) {
                    selected.push_back(entry.path().filename().string());
                }
            }
        }
        std::sort(selected.begin(), selected.end());
    } else {
        selected = run_ids;
    }

    ReportOutput output;
    struct Row {
        std::string run_id;
        std::string label;
        reconcile::CoverageReport table;
    };
    std::vector<Row> rows;
    for (const std::string& run_id : selected) {
        const std::filesystem::path report_file = runs_dir / run_id / "reports" / "report.json";
        if (!std::filesystem::exists(report_file)) {
            output.notices.push_back("run " + run_id + " has no evaluation; skipped");
            continue;
        }
        json doc;
        try {
            doc = json::parse(read_file(report_file));
        } catch (const std::exception& e) {
            output.notices.push_back("run " + run_id + " report unreadable: " + e.what());
            continue;
        }
        Row row;
        row.run_id = run_id;
        row.label = doc.value("label", run_id);
        const json& table = doc["table_row"];
        row.table.avg_percent = table.value("avg_percent", 0.0);
        row.table.total_percent = table.value("total_percent", 0.0);
        row.table.failed_modules = table.value("failed_modules", 0);
        row.table.avg_percent_excl_failed = table.value("avg_percent_excl_failed", 0.0);
        row.table.total_percent_excl_failed = table.value("total_percent_excl_failed", 0.0);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw NoRunsError();
    }

    std::size_t label_width = std::string("LLM Model").size();
    for (const Row& row : rows) {
        label_width = std::max(label_width, row.label.size());
    }
    label_width += 2;
    output.text = table_header_line(label_width) + "\n";
    json runs = json::array();
    for (const Row& row : rows) {
        output.text += table_row_line(row.label, label_width, row.table) + "\n";
        runs.push_back({
            {"run_id", row.run_id},
            {"label", row.label},
            {"avg_percent", row.table.avg_percent},
            {"total_percent", row.table.total_percent},
            {"failed_modules", row.table.failed_modules},
            {"avg_percent_excl_failed", row.table.avg_percent_excl_failed},
            {"total_percent_excl_failed", row.table.total_percent_excl_failed},
        });
    }
    output.json = json{{"runs", std::move(runs)}}.dump(2) + "\n";
    return output;
}

std::map<std::string, std::string> read_doc_statuses(const std::filesystem::path& manifest_file,
                                                     std::string_view stage) {
    std::map<std::string, std::string> statuses;
    std::ifstream in(manifest_file);
    std::string line;
    while (std::getline(in, line)) {
        json event;
        try {
            event = json::parse(line);
        } catch (const json::exception&) {
            continue;
        }
        if (event.value("event", "") == "doc_status" && event.value("stage", "") == stage) {
            statuses[event.value("doc_id", "")] = event.value("status", "");
        }
    }
    return statuses;
}

} // namespace kgp::pipeline
