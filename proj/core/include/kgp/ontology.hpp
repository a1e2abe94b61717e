#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgp/errors.hpp"
#include "kgp/types.hpp"

namespace kgp::ontology {

struct Relation {
    std::string predicate; // e.g. hasSex
    std::string domain;    // class name, e.g. Agent
    std::string range;     // class name or datatype tag, e.g. Sex_Type, xsd:double
};

struct OntologyModule {
    std::string name; // unique per schema
    std::vector<Relation> relations;
    std::optional<std::string> guidance; // injected into prompts as a Note line
    bool skipped = false; // excluded from prompts and coverage denominators
};

/// One step of an original role chain: the predicate traversed and the class
/// reached after it (the final step's class equals the shortcut range).
struct ChainStep {
    std::string predicate;
    std::string target_class;
};

/// A collapsed role chain: the flattened relation plus the chain it replaces.
struct ShortcutRule {
    Relation shortcut;
    std::vector<ChainStep> chain; // length >= 2
};

/// Catch-all bucket name for predicates owned by no module.
inline constexpr std::string_view kUnassignedModule = "Unassigned";

class DuplicateModuleError : public Error {
  public:
    explicit DuplicateModuleError(const std::string& name)
        : Error("duplicate module: " + name) {}
};

class InvalidChainError : public Error {
  public:
    using Error::Error;
};

class PredicateMismatchError : public Error {
  public:
    using Error::Error;
};

class NoActiveModulesError : public Error {
  public:
    NoActiveModulesError() : Error("no active (non-skipped) modules") {}
};

/// Parses the line-oriented module file format:
///
///   # Module: <name>
///   <predicate>(<Domain>, <Range>)
///   Note: <free text guidance>        (optional, one per module)
///   Skip: true                        (optional)
///
/// Declaration order is preserved. Malformed lines raise ParseError with the
/// 1-based line number; duplicate module names raise DuplicateModuleError.
std::vector<OntologyModule> parse_module_file(std::string_view text);

/// Serializes modules back to the file format; parse/render round-trips.
std::string render_module_file(const std::vector<OntologyModule>& modules);

/// Deterministic prompt block: name line, one relation per line, then the
/// guidance line when present. Skipped modules are omitted entirely.
std::string render_module_content(const std::vector<OntologyModule>& modules);

/// Parses shortcut rules, one per line:
///   shortcut <pred>(<Domain>, <Range>) := <p1>/<Class1>/<p2>[/<Class2>/<p3>...]
std::vector<ShortcutRule> parse_shortcut_file(std::string_view text);

/// Validates the rule and returns its flattened relation. Raises
/// InvalidChainError on a chain shorter than 2 steps or a range mismatch
/// between the shortcut and the final chain step.
Relation collapse_chain(const ShortcutRule& rule);

/// Deterministic per-document blank node ids: _:<doc_id>/1, _:<doc_id>/2, ...
class BlankNodeGenerator {
  public:
    explicit BlankNodeGenerator(std::string doc_id) : doc_id_(std::move(doc_id)) {}

    std::string next() { return "_:" + doc_id_ + "/" + std::to_string(next_++); }

  private:
    std::string doc_id_;
    int next_ = 1;
};

/// Inverse of the collapse: rewrites a shortcut triple into the original
/// chain, minting intermediate blank nodes and typing each with `a`.
/// First triple's subject equals t.subject; last triple's object equals
/// t.object.
std::vector<Triple> expand_shortcut_triple(const Triple& t, const ShortcutRule& rule,
                                           BlankNodeGenerator& nodes);

/// Exact case-insensitive predicate lookup; nullptr when unowned.
const OntologyModule* find_module_of_predicate(std::string_view predicate,
                                               const std::vector<OntologyModule>& modules);

/// Owning module name, or kUnassignedModule.
std::string module_of_predicate(std::string_view predicate,
                                const std::vector<OntologyModule>& modules);

} // namespace kgp::ontology
