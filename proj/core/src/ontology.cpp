#include "kgp/ontology.hpp"

#include <sstream>

#include "kgp/text.hpp"

namespace kgp::ontology {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    return text::ascii_lower(a) == text::ascii_lower(b);
}

// Parses `pred(Domain, Range)`; splits the arguments on the first comma.
Relation parse_relation_signature(std::string_view sig, int line_no) {
    const std::size_t open = sig.find('(');
    if (open == std::string_view::npos || sig.back() != ')') {
        throw ParseError(line_no, "missing parentheses");
    }
    const std::string predicate{text::trim(sig.substr(0, open))};
    if (predicate.empty()) {
        throw ParseError(line_no, "empty predicate");
    }
    const std::string_view args = sig.substr(open + 1, sig.size() - open - 2);
    const std::size_t comma = args.find(',');
    if (comma == std::string_view::npos) {
        throw ParseError(line_no, "missing comma");
    }
    Relation rel;
    rel.predicate = predicate;
    rel.domain = std::string{text::trim(args.substr(0, comma))};
    rel.range = std::string{text::trim(args.substr(comma + 1))};
    if (rel.domain.empty()) {
        throw ParseError(line_no, "empty domain");
    }
    if (rel.range.empty()) {
        throw ParseError(line_no, "empty range");
    }
    return rel;
}

} // namespace

std::vector<OntologyModule> parse_module_file(std::string_view file_text) {
    std::vector<OntologyModule> modules;
    OntologyModule* current = nullptr;

    std::istringstream lines{std::string(file_text)};
    std::string raw_line;
    int line_no = 0;
    while (std::getline(lines, raw_line)) {
        ++line_no;
        const std::string_view line = text::trim(raw_line);
        if (line.empty()) {
            continue;
        }
        if (line.starts_with("# Module:")) {
            const std::string name{text::trim(line.substr(9))};
            if (name.empty()) {
                throw ParseError(line_no, "empty module name");
            }
            for (const auto& m : modules) {
                if (m.name == name) {
                    throw DuplicateModuleError(name);
                }
            }
            modules.push_back(OntologyModule{.name = name});
            current = &modules.back();
            continue;
        }
        if (line.starts_with("#")) {
            continue; // comment
        }
        if (line.starts_with("Note:")) {
            if (current == nullptr) {
                throw ParseError(line_no, "guidance outside a module");
            }
            if (current->guidance.has_value()) {
                throw ParseError(line_no, "duplicate Note in module " + current->name);
            }
            current->guidance = std::string{text::trim(line.substr(5))};
            continue;
        }
        if (line.starts_with("Skip:")) {
            if (current == nullptr) {
                throw ParseError(line_no, "Skip outside a module");
            }
            const std::string_view value = text::trim(line.substr(5));
            if (value == "true") {
                current->skipped = true;
            } else if (value == "false") {
                current->skipped = false;
            } else {
                throw ParseError(line_no, "Skip value must be true or false");
            }
            continue;
        }
        Relation rel = parse_relation_signature(line, line_no);
        if (current == nullptr) {
            throw ParseError(line_no, "relation outside a module");
        }
        for (const auto& existing : current->relations) {
            if (existing.predicate == rel.predicate) {
                throw ParseError(line_no,
                                 "duplicate predicate " + rel.predicate + " in module " +
                                     current->name);
            }
        }
        current->relations.push_back(std::move(rel));
    }
    return modules;
}

std::string render_module_file(const std::vector<OntologyModule>& modules) {
    std::string out;
    for (std::size_t i = 0; i < modules.size(); ++i) {
        const auto& m = modules[i];
        if (i > 0) {
            out += "\n";
        }
        out += "# Module: " + m.name + "\n";
        for (const auto& r : m.relations) {
            out += r.predicate + "(" + r.domain + ", " + r.range + ")\n";
        }
        if (m.guidance.has_value()) {
            out += "Note: " + *m.guidance + "\n";
        }
        if (m.skipped) {
            out += "Skip: true\n";
        }
    }
    return out;
}

std::string render_module_content(const std::vector<OntologyModule>& modules) {
    std::string out;
    bool any = false;
    for (const auto& m : modules) {
        if (m.skipped) {
            continue;
        }
        if (any) {
            out += "\n";
        }
        any = true;
        out += m.name + ":\n";
        for (const auto& r : m.relations) {
            out += r.predicate + "(" + r.domain + ", " + r.range + ")\n";
        }
        if (m.guidance.has_value()) {
            out += "Note: " + *m.guidance + "\n";
        }
    }
    if (!any) {
        throw NoActiveModulesError();
    }
    while (!out.empty() && out.back() == '\n') {
        out.pop_back();
    }
    return out;
}

std::vector<ShortcutRule> parse_shortcut_file(std::string_view file_text) {
    std::vector<ShortcutRule> rules;
    std::istringstream lines{std::string(file_text)};
    std::string raw_line;
    int line_no = 0;
    while (std::getline(lines, raw_line)) {
        ++line_no;
        const std::string_view line = text::trim(raw_line);
        if (line.empty() || line.starts_with("#")) {
            continue;
        }
        if (!line.starts_with("shortcut ")) {
            throw ParseError(line_no, "expected 'shortcut' keyword");
        }
        const std::size_t assign = line.find(":=");
        if (assign == std::string_view::npos) {
            throw ParseError(line_no, "missing ':='");
        }
        ShortcutRule rule;
        rule.shortcut =
            parse_relation_signature(text::trim(line.substr(9, assign - 9)), line_no);

        // RHS alternates predicate/class/predicate/...: odd count, >= 3.
        std::vector<std::string> parts;
        std::string part;
        std::istringstream rhs{std::string(text::trim(line.substr(assign + 2)))};
        while (std::getline(rhs, part, '/')) {
            parts.emplace_back(text::trim(part));
            if (parts.back().empty()) {
                throw ParseError(line_no, "empty chain element");
            }
        }
        if (parts.size() < 3 || parts.size() % 2 == 0) {
            throw ParseError(line_no, "chain must alternate predicate/class with >= 2 predicates");
        }
        for (std::size_t i = 0; i < parts.size(); i += 2) {
            ChainStep step;
            step.predicate = parts[i];
            step.target_class = i + 1 < parts.size() ? parts[i + 1] : rule.shortcut.range;
            rule.chain.push_back(std::move(step));
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

Relation collapse_chain(const ShortcutRule& rule) {
    if (rule.chain.size() < 2) {
        throw InvalidChainError("chain for " + rule.shortcut.predicate +
                                " must have at least 2 steps");
    }
    if (rule.chain.back().target_class != rule.shortcut.range) {
        throw InvalidChainError("shortcut range " + rule.shortcut.range +
                                " does not match final chain class " +
                                rule.chain.back().target_class);
    }
    return rule.shortcut;
}

std::vector<Triple> expand_shortcut_triple(const Triple& t, const ShortcutRule& rule,
                                           BlankNodeGenerator& nodes) {
    if (!iequals(t.predicate, rule.shortcut.predicate)) {
        throw PredicateMismatchError("triple predicate " + t.predicate +
                                     " does not match shortcut " + rule.shortcut.predicate);
    }
    collapse_chain(rule); // validate before expanding

    std::vector<Triple> out;
    std::string subject = t.subject;
    for (std::size_t i = 0; i < rule.chain.size(); ++i) {
        const ChainStep& step = rule.chain[i];
        const bool last = i + 1 == rule.chain.size();
        if (last) {
            out.push_back(Triple{subject, step.predicate, t.object});
        } else {
            std::string node = nodes.next();
            out.push_back(Triple{subject, step.predicate, node});
            out.push_back(Triple{node, "a", step.target_class});
            subject = std::move(node);
        }
    }
    return out;
}

const OntologyModule* find_module_of_predicate(std::string_view predicate,
                                               const std::vector<OntologyModule>& modules) {
    for (const auto& m : modules) {
        for (const auto& r : m.relations) {
            if (iequals(r.predicate, predicate)) {
                return &m;
            }
        }
    }
    return nullptr;
}

std::string module_of_predicate(std::string_view predicate,
                                const std::vector<OntologyModule>& modules) {
    const OntologyModule* m = find_module_of_predicate(predicate, modules);
    return m != nullptr ? m->name : std::string{kUnassignedModule};
}

} // namespace kgp::ontology
