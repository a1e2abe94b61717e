#include "kgp/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "kgp/text.hpp"

namespace kgp::config {

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") {
        return true;
    }
    if (value == "false") {
        return false;
    }
    throw ConfigError(key + " must be true or false, got '" + value + "'");
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + " must be an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + " must be a number, got '" + value + "'");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& value) {
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        const std::string_view trimmed = text::trim(item);
        if (!trimmed.empty()) {
            out.emplace_back(trimmed);
        }
    }
    return out;
}

} // namespace

std::string_view strategy_name(Strategy s) {
    return s == Strategy::Rag ? "rag" : "summarization";
}

std::string_view variant_name(PromptVariant v) {
    return v == PromptVariant::MainAgentRestricted ? "MainAgent" : "notrestrictedToMAgent";
}

std::string_view backend_name(Backend b) {
    return b == Backend::scripted ? "scripted" : "http";
}

RunConfig parse_run_config(const std::string& config_text,
                           const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::map<std::string, bool> seen;

    std::istringstream lines(config_text);
    std::string raw_line;
    int line_no = 0;
    while (std::getline(lines, raw_line)) {
        ++line_no;
        std::string_view line = text::trim(raw_line);
        if (line.empty() || line.starts_with("#")) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(line_no, "expected key=value");
        }
        const std::string key{text::trim(line.substr(0, eq))};
        const std::string value{text::trim(line.substr(eq + 1))};
        if (key.empty()) {
            throw ParseError(line_no, "empty key");
        }
        if (seen[key]) {
            throw ParseError(line_no, "duplicate key " + key);
        }
        seen[key] = true;

        if (key == "corpus_dir") {
            cfg.corpus_dir = resolve(base_dir, value);
        } else if (key == "modules_file") {
            cfg.modules_file = resolve(base_dir, value);
        } else if (key == "shortcuts_file") {
            cfg.shortcuts_file = resolve(base_dir, value);
        } else if (key == "truth_dir") {
            cfg.truth_dir = resolve(base_dir, value);
        } else if (key == "runs_dir") {
            cfg.runs_dir = resolve(base_dir, value);
        } else if (key == "strategy") {
            if (value == "summarization") {
                cfg.strategy = Strategy::Summarization;
            } else if (value == "rag") {
                cfg.strategy = Strategy::Rag;
            } else {
                throw ConfigError("strategy must be summarization or rag, got '" + value + "'");
            }
        } else if (key == "prompt_variant") {
            if (value == "main_agent") {
                cfg.prompt_variant = PromptVariant::MainAgentRestricted;
            } else if (value == "unrestricted") {
                cfg.prompt_variant = PromptVariant::Unrestricted;
            } else {
                throw ConfigError("prompt_variant must be main_agent or unrestricted, got '" +
                                  value + "'");
            }
        } else if (key == "model") {
            cfg.model = value;
        } else if (key == "api_base_url") {
            cfg.api_base_url = value;
        } else if (key == "temperature") {
            cfg.temperature = parse_double(key, value);
        } else if (key == "chunk_token_budget") {
            cfg.chunk_token_budget = parse_int(key, value);
        } else if (key == "rag_top_k") {
            cfg.rag_top_k = parse_int(key, value);
        } else if (key == "threshold") {
            cfg.threshold = parse_double(key, value);
        } else if (key == "backend") {
            if (value == "http") {
                cfg.backend = Backend::http;
            } else if (value == "scripted") {
                cfg.backend = Backend::scripted;
            } else {
                throw ConfigError("backend must be http or scripted, got '" + value + "'");
            }
        } else if (key == "script_file") {
            cfg.script_file = resolve(base_dir, value);
        } else if (key == "workers") {
            cfg.workers = parse_int(key, value);
        } else if (key == "example_summary_file") {
            cfg.example_summary_file = resolve(base_dir, value);
        } else if (key == "same_metric") {
            cfg.same_metric = parse_bool(key, value);
        } else if (key == "score_subjects") {
            cfg.score_subjects = parse_bool(key, value);
        } else if (key == "model_context_tokens") {
            cfg.model_context_tokens = parse_int(key, value);
        } else if (key == "max_attempts") {
            cfg.max_attempts = parse_int(key, value);
        } else if (key == "retry_base_delay_ms") {
            cfg.retry_base_delay_ms = parse_int(key, value);
        } else if (key == "refusal_prefixes") {
            cfg.refusal_prefixes = split_csv(value);
        } else if (key == "embedding") {
            if (value != "local" && value != "http") {
                throw ConfigError("embedding must be local or http, got '" + value + "'");
            }
            cfg.embedding = value;
        } else if (key == "embedding_model") {
            cfg.embedding_model = value;
        } else if (key == "embedding_dim") {
            cfg.embedding_dim = parse_int(key, value);
        } else if (key == "llm_inflight_cap") {
            cfg.llm_inflight_cap = parse_int(key, value);
        } else if (key == "clean_headers") {
            cfg.cleaning.strip_headers = parse_bool(key, value);
        } else if (key == "clean_citations") {
            cfg.cleaning.strip_citations = parse_bool(key, value);
        } else if (key == "clean_infoboxes") {
            cfg.cleaning.strip_infoboxes = parse_bool(key, value);
        } else {
            throw ConfigError("unknown config key '" + key + "' (line " +
                              std::to_string(line_no) + ")");
        }
    }

    validate(cfg);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot read config file: " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), file.parent_path());
}

void validate(const RunConfig& config) {
    if (config.threshold <= 0.0 || config.threshold > 1.0) {
        throw ConfigError("threshold must be in (0, 1]");
    }
    if (config.workers < 1) {
        throw ConfigError("workers must be >= 1");
    }
    if (config.backend == Backend::scripted && !config.script_file.has_value()) {
        throw ConfigError("backend=scripted requires script_file");
    }
    if (config.chunk_token_budget < 1) {
        throw ConfigError("chunk_token_budget must be >= 1");
    }
    if (config.rag_top_k < 1) {
        throw ConfigError("rag_top_k must be >= 1");
    }
    if (config.temperature < 0.0) {
        throw ConfigError("temperature must be >= 0");
    }
    if (config.max_attempts < 1) {
        throw ConfigError("max_attempts must be >= 1");
    }
    if (config.embedding_dim < 1) {
        throw ConfigError("embedding_dim must be >= 1");
    }
}

std::string identity_snapshot_json(const RunConfig& config) {
    nlohmann::json snap;
    snap["corpus_dir"] = config.corpus_dir.string();
    snap["modules_file"] = config.modules_file.string();
    snap["shortcuts_file"] =
        config.shortcuts_file.has_value() ? config.shortcuts_file->string() : "";
    snap["strategy"] = std::string(strategy_name(config.strategy));
    snap["prompt_variant"] = std::string(variant_name(config.prompt_variant));
    snap["model"] = config.model;
    snap["backend"] = std::string(backend_name(config.backend));
    snap["script_file"] = config.script_file.has_value() ? config.script_file->string() : "";
    snap["temperature"] = config.temperature;
    snap["chunk_token_budget"] = config.chunk_token_budget;
    snap["rag_top_k"] = config.rag_top_k;
    snap["example_summary_file"] =
        config.example_summary_file.has_value() ? config.example_summary_file->string() : "";
    snap["embedding"] = config.embedding;
    snap["embedding_dim"] = config.embedding_dim;
    snap["clean_headers"] = config.cleaning.strip_headers;
    snap["clean_citations"] = config.cleaning.strip_citations;
    snap["clean_infoboxes"] = config.cleaning.strip_infoboxes;
    return snap.dump();
}

} // namespace kgp::config
