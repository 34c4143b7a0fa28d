#pragma once

#include <string>
#include <vector>

namespace repoforge::pysrc {

/// One logical line of Python source: physical lines joined across
/// backslash continuations and open brackets, with comments and string
/// bodies neutralized for structural scanning.
struct LogicalLine {
    std::string text;        // structural text (string literals blanked)
    std::string raw;         // original text of the first physical line onward
    int line = 0;            // 1-based physical line of the first char
    int indent = 0;          // leading spaces (tabs count as 8)
    bool starts_with_string = false;  // first token is a string literal
};

/// Tokenize source into logical lines. Throws AnalysisError on unterminated
/// string literals or brackets.
std::vector<LogicalLine> logical_lines(const std::string& path, const std::string& source);

struct ImportRef {
    std::string module;   // dotted module as written, "" for bare relative
    int relative_level = 0;  // leading dots on "from"-imports
    std::vector<std::string> names;  // imported names ("*" for star imports)
    bool is_from = false;
    int line = 0;
};

struct FunctionDef {
    std::string name;
    std::vector<std::string> params;
    bool has_docstring = false;
};

struct ClassDef {
    std::string name;
    std::vector<FunctionDef> methods;
    bool has_docstring = false;
};

struct ModuleStructure {
    std::vector<ImportRef> imports;
    std::vector<FunctionDef> functions;  // top-level only
    std::vector<ClassDef> classes;
    std::string module_docstring;  // empty if absent
};

/// Parse imports and def/class structure from source. Imports at any
/// nesting depth are reported (conditional and function-local imports
/// included); functions/classes only at module scope, methods one level
/// under their class.
ModuleStructure parse_module(const std::string& path, const std::string& source);

}  // namespace repoforge::pysrc
