// kgp — ontology-guided triple extraction pipeline over a run directory.
//
// Subcommands: ingest, populate, evaluate, report, modules check, hash-file.
// Exit codes: 0 success, 1 partial (some per-document failures), 2 fatal.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kgp/config.hpp"
#include "kgp/errors.hpp"
#include "kgp/ontology.hpp"
#include "kgp/pipeline.hpp"
#include "kgp/text.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string run_id;
    std::string runs_dir_override;
    int workers_override = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool run_id_required) {
    cmd->add_option("--config", args.config_path, "Run config file (key=value)")->required();
    auto* run_id = cmd->add_option("--run-id", args.run_id, "Run directory name");
    if (run_id_required) {
        run_id->required();
    }
    cmd->add_option("--runs-dir", args.runs_dir_override, "Override the config runs_dir");
    cmd->add_option("--workers", args.workers_override, "Override the config worker count");
}

kgp::config::RunConfig load_config(const CommonArgs& args) {
    kgp::config::RunConfig cfg = kgp::config::load_run_config(args.config_path);
    if (!args.runs_dir_override.empty()) {
        cfg.runs_dir = args.runs_dir_override;
    }
    if (args.workers_override > 0) {
        cfg.workers = args.workers_override;
    }
    return cfg;
}

std::string default_run_id() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "run-%Y%m%d-%H%M%S", std::localtime(&t));
    return buf;
}

int report_result(const kgp::pipeline::CommandResult& result) {
    for (const auto& message : result.messages) {
        std::cerr << message << "\n";
    }
    for (const auto& doc : result.docs) {
        std::cout << doc.doc_id << ": " << kgp::pipeline::doc_status_name(doc.status);
        if (!doc.detail.empty()) {
            std::cout << " (" << doc.detail << ")";
        }
        std::cout << "\n";
    }
    return result.exit_code;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw kgp::Error("cannot read file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ontology-guided triple extraction and evaluation pipeline"};
    app.require_subcommand(1);

    CommonArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "Clean and chunk the corpus into a run");
    add_common(ingest_cmd, ingest_args, false);

    CommonArgs populate_args;
    auto* populate_cmd =
        app.add_subcommand("populate", "Retrieve context and extract triples per document");
    add_common(populate_cmd, populate_args, true);

    CommonArgs evaluate_args;
    double threshold_override = -1.0;
    bool same_metric_flag = false;
    auto* evaluate_cmd =
        app.add_subcommand("evaluate", "Score generated triples against the truth TSVs");
    add_common(evaluate_cmd, evaluate_args, true);
    evaluate_cmd->add_option("--threshold", threshold_override,
                             "Similarity threshold override, in (0, 1]");
    evaluate_cmd->add_flag("--same-metric", same_metric_flag,
                           "Require one metric to clear both predicate and object");

    std::string report_runs_dir;
    std::vector<std::string> report_run_ids;
    std::string report_format = "text";
    std::string report_out;
    std::string report_config;
    auto* report_cmd = app.add_subcommand("report", "Comparison table across evaluated runs");
    report_cmd->add_option("--runs-dir", report_runs_dir, "Directory holding run directories");
    report_cmd->add_option("--config", report_config,
                           "Config file used to resolve runs_dir when --runs-dir is absent");
    report_cmd->add_option("--run-id", report_run_ids, "Restrict to these runs (repeatable)");
    report_cmd->add_option("--format", report_format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    report_cmd->add_option("--out", report_out, "Also write the output to this file");

    auto* modules_cmd = app.add_subcommand("modules", "Module file utilities");
    modules_cmd->require_subcommand(1);
    std::string modules_config;
    auto* modules_check = modules_cmd->add_subcommand("check", "Parse and validate module files");
    modules_check->add_option("--config", modules_config, "Run config file")->required();

    std::string hash_path;
    auto* hash_cmd = app.add_subcommand(
        "hash-file", "Print the scripted-backend hash key for a prompt file's exact bytes");
    hash_cmd->add_option("file", hash_path, "File to hash")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest_cmd) {
            const auto cfg = load_config(ingest_args);
            const std::string run_id =
                ingest_args.run_id.empty() ? default_run_id() : ingest_args.run_id;
            std::cout << "run: " << run_id << "\n";
            return report_result(kgp::pipeline::ingest(cfg, run_id));
        }
        if (*populate_cmd) {
            const auto cfg = load_config(populate_args);
            return report_result(kgp::pipeline::populate(cfg, populate_args.run_id));
        }
        if (*evaluate_cmd) {
            const auto cfg = load_config(evaluate_args);
            kgp::pipeline::EvalOptions options;
            if (threshold_override > 0.0) {
                options.threshold = threshold_override;
            }
            if (same_metric_flag) {
                options.same_metric = true;
            }
            const auto result = kgp::pipeline::evaluate(cfg, evaluate_args.run_id, options);
            const auto report_file = kgp::pipeline::RunPaths::open(cfg.runs_dir,
                                                                   evaluate_args.run_id)
                                         .reports_dir() /
                                     "report.txt";
            std::cout << read_file(report_file);
            return result.exit_code;
        }
        if (*report_cmd) {
            std::filesystem::path runs_dir;
            if (!report_runs_dir.empty()) {
                runs_dir = report_runs_dir;
            } else if (!report_config.empty()) {
                runs_dir = kgp::config::load_run_config(report_config).runs_dir;
            } else {
                runs_dir = "runs";
            }
            const auto output = kgp::pipeline::render_report(runs_dir, report_run_ids);
            for (const auto& notice : output.notices) {
                std::cerr << "note: " << notice << "\n";
            }
            const std::string& body = report_format == "json" ? output.json : output.text;
            std::cout << body;
            if (!report_out.empty()) {
                std::ofstream out(report_out, std::ios::binary);
                out << body;
            }
            return 0;
        }
        if (*modules_check) {
            const auto cfg = kgp::config::load_run_config(modules_config);
            const auto modules = kgp::ontology::parse_module_file(read_file(cfg.modules_file));
            std::size_t relations = 0;
            std::size_t skipped = 0;
            for (const auto& m : modules) {
                relations += m.relations.size();
                if (m.skipped) {
                    ++skipped;
                }
            }
            std::cout << modules.size() << " modules, " << relations << " relations, " << skipped
                      << " skipped\n";
            if (cfg.shortcuts_file.has_value()) {
                const auto rules =
                    kgp::ontology::parse_shortcut_file(read_file(*cfg.shortcuts_file));
                for (const auto& rule : rules) {
                    kgp::ontology::collapse_chain(rule); // validates
                }
                std::cout << rules.size() << " shortcut rules, all chains valid\n";
            }
            return 0;
        }
        if (*hash_cmd) {
            const std::string content = read_file(hash_path);
            const std::uint64_t h = kgp::text::fnv1a64(content);
            static const char* digits = "0123456789abcdef";
            std::string hex(16, '0');
            std::uint64_t v = h;
            for (int i = 15; i >= 0; --i) {
                hex[static_cast<std::size_t>(i)] = digits[v & 0xF];
                v >>= 4;
            }
            std::cout << hex << "\n";
            return 0;
        }
    } catch (const kgp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
