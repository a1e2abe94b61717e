#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgp/corpus.hpp"
#include "kgp/errors.hpp"
#include "kgp/types.hpp"

namespace kgp::config {

enum class Backend { http, scripted };

/// Declarative run parameters, read from a flat key=value file. Relative
/// paths are resolved against the config file's directory.
struct RunConfig {
    std::filesystem::path corpus_dir;
    std::filesystem::path modules_file;
    std::optional<std::filesystem::path> shortcuts_file;
    std::filesystem::path truth_dir;
    std::filesystem::path runs_dir = "runs";

    Strategy strategy = Strategy::Summarization;
    PromptVariant prompt_variant = PromptVariant::MainAgentRestricted;
    std::string model;
    std::string api_base_url;
    double temperature = 0.0;
    int chunk_token_budget = 2000;
    int rag_top_k = 4;
    double threshold = 0.80;
    Backend backend = Backend::http;
    std::optional<std::filesystem::path> script_file;
    int workers = 1;

    std::optional<std::filesystem::path> example_summary_file;
    bool same_metric = false;
    bool score_subjects = false;
    int model_context_tokens = 8000;
    int max_attempts = 3;
    int retry_base_delay_ms = 250;
    std::vector<std::string> refusal_prefixes; // empty = defaults
    std::string embedding = "local"; // local | http
    std::string embedding_model;
    int embedding_dim = 256;
    int llm_inflight_cap = 4;
    corpus::CleaningRules cleaning;
};

/// Parses and validates; unknown keys are errors.
RunConfig load_run_config(const std::filesystem::path& file);

/// Parses from text with an explicit base directory for relative paths.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);

void validate(const RunConfig& config);

std::string_view strategy_name(Strategy s);
std::string_view variant_name(PromptVariant v); // Table-style naming
std::string_view backend_name(Backend b);

/// Canonical JSON snapshot of the keys that define a run's identity
/// (evaluation-time knobs excluded). Used to detect config drift when a
/// command re-attaches to an existing run directory.
std::string identity_snapshot_json(const RunConfig& config);

} // namespace kgp::config
