#pragma once

#include <string>

namespace kgp {

/// A (subject, predicate, object) statement; the pipeline's output unit and
/// the evaluator's comparison unit.
struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;

    bool operator==(const Triple&) const = default;
};

/// Population prompt wording. MainAgentRestricted names the document's main
/// agent and tells the model the text is primarily about that entity;
/// Unrestricted omits that instruction.
enum class PromptVariant {
    MainAgentRestricted,
    Unrestricted,
};

/// How module-relevant context is produced before population.
enum class Strategy {
    Summarization,
    Rag,
};

} // namespace kgp
