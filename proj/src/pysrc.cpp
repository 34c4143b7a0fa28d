#include "repoforge/pysrc.hpp"

#include <cctype>

#include "repoforge/errors.hpp"

namespace repoforge::pysrc {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct Cursor {
    const std::string& src;
    std::size_t pos = 0;
    int line = 1;

    bool done() const { return pos >= src.size(); }
    char peek(std::size_t off = 0) const {
        return pos + off < src.size() ? src[pos + off] : '\0';
    }
    char advance() {
        char c = src[pos++];
        if (c == '\n') ++line;
        return c;
    }
};

// Skips a string literal starting at the cursor (after any prefix letters
// were consumed by the caller). Emits a placeholder into `out`.
void skip_string(const std::string& path, Cursor& cur, std::string& out) {
    char quote = cur.peek();
    bool triple = cur.peek(1) == quote && cur.peek(2) == quote;
    int start_line = cur.line;
    cur.advance();
    if (triple) {
        cur.advance();
        cur.advance();
    }
    out += quote;
    while (true) {
        if (cur.done()) {
            throw AnalysisError(path, start_line, "unterminated string literal");
        }
        char c = cur.peek();
        if (c == '\\') {
            cur.advance();
            if (!cur.done()) cur.advance();
            continue;
        }
        if (!triple && c == '\n') {
            throw AnalysisError(path, start_line, "unterminated string literal");
        }
        if (c == quote) {
            if (!triple) {
                cur.advance();
                break;
            }
            if (cur.peek(1) == quote && cur.peek(2) == quote) {
                cur.advance();
                cur.advance();
                cur.advance();
                break;
            }
        }
        cur.advance();
    }
    out += quote;
}

bool is_string_prefix(const std::string& s) {
    if (s.size() > 2) return false;
    for (char c : s) {
        char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (l != 'r' && l != 'b' && l != 'u' && l != 'f') return false;
    }
    return !s.empty();
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// Splits `s` on top-level commas (ignoring commas inside brackets).
std::vector<std::string> split_top_level(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == sep && depth == 0) {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!strip(cur).empty()) out.push_back(strip(cur));
    return out;
}

}  // namespace

std::vector<LogicalLine> logical_lines(const std::string& path, const std::string& source) {
    std::vector<LogicalLine> lines;
    Cursor cur{source};

    while (!cur.done()) {
        // Measure indentation of the physical line.
        int indent = 0;
        while (!cur.done() && (cur.peek() == ' ' || cur.peek() == '\t')) {
            indent += cur.peek() == '\t' ? 8 : 1;
            cur.advance();
        }
        if (cur.done()) break;
        if (cur.peek() == '\n') {
            cur.advance();
            continue;
        }
        if (cur.peek() == '#') {
            while (!cur.done() && cur.peek() != '\n') cur.advance();
            continue;
        }

        LogicalLine ll;
        ll.line = cur.line;
        ll.indent = indent;
        int bracket_depth = 0;
        bool first_token_seen = false;

        while (!cur.done()) {
            char c = cur.peek();
            if (c == '#') {
                while (!cur.done() && cur.peek() != '\n') cur.advance();
                continue;
            }
            if (c == '\'' || c == '"') {
                if (!first_token_seen) {
                    ll.starts_with_string = true;
                    first_token_seen = true;
                }
                skip_string(path, cur, ll.text);
                continue;
            }
            if (is_ident_start(c)) {
                std::string ident;
                while (!cur.done() && is_ident_char(cur.peek())) ident += cur.advance();
                if ((cur.peek() == '\'' || cur.peek() == '"') && is_string_prefix(ident)) {
                    if (!first_token_seen) {
                        ll.starts_with_string = true;
                        first_token_seen = true;
                    }
                    skip_string(path, cur, ll.text);
                    continue;
                }
                first_token_seen = true;
                ll.text += ident;
                continue;
            }
            if (c == '\\' && cur.peek(1) == '\n') {
                cur.advance();
                cur.advance();
                ll.text += ' ';
                continue;
            }
            if (c == '\n') {
                if (bracket_depth > 0) {
                    cur.advance();
                    ll.text += ' ';
                    continue;
                }
                cur.advance();
                break;
            }
            if (c == '(' || c == '[' || c == '{') ++bracket_depth;
            if (c == ')' || c == ']' || c == '}') {
                if (bracket_depth > 0) --bracket_depth;
            }
            if (!std::isspace(static_cast<unsigned char>(c))) first_token_seen = true;
            ll.text += cur.advance();
        }
        if (!strip(ll.text).empty() || ll.starts_with_string) {
            ll.text = strip(ll.text);
            lines.push_back(std::move(ll));
        }
    }
    return lines;
}

namespace {

bool starts_with_word(const std::string& s, const std::string& word, std::size_t* after = nullptr) {
    if (s.compare(0, word.size(), word) != 0) return false;
    if (s.size() > word.size() && is_ident_char(s[word.size()])) return false;
    if (after) {
        std::size_t p = word.size();
        while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
        *after = p;
    }
    return true;
}

std::vector<std::string> parse_params(const std::string& inside) {
    std::vector<std::string> params;
    for (auto& piece : split_top_level(inside, ',')) {
        if (piece.empty()) continue;
        std::string name;
        std::size_t i = 0;
        while (i < piece.size() && piece[i] == '*') name += piece[i++];
        while (i < piece.size() && is_ident_char(piece[i])) name += piece[i++];
        if (name.empty() || name == "*" || name == "/") {
            if (piece == "/" || piece == "*") continue;  // positional/kw markers
        }
        if (!name.empty()) params.push_back(name);
    }
    return params;
}

// Parses "import a.b as c, d" / "from .x import y as z, w" forms.
bool parse_import(const LogicalLine& ll, ImportRef& ref) {
    std::size_t after = 0;
    if (starts_with_word(ll.text, "import", &after)) {
        ref.is_from = false;
        ref.line = ll.line;
        // "import" yields one ImportRef per target; caller splits on names.
        ref.module = ll.text.substr(after);
        return true;
    }
    if (starts_with_word(ll.text, "from", &after)) {
        std::string rest = ll.text.substr(after);
        std::size_t imp = rest.find("import");
        // require " import " as a word
        while (imp != std::string::npos) {
            bool left_ok = imp == 0 || !is_ident_char(rest[imp - 1]);
            bool right_ok = imp + 6 >= rest.size() || !is_ident_char(rest[imp + 6]);
            if (left_ok && right_ok) break;
            imp = rest.find("import", imp + 1);
        }
        if (imp == std::string::npos) return false;
        std::string mod = strip(rest.substr(0, imp));
        std::string names_part = strip(rest.substr(imp + 6));
        ref.is_from = true;
        ref.line = ll.line;
        std::size_t dots = 0;
        while (dots < mod.size() && mod[dots] == '.') ++dots;
        ref.relative_level = static_cast<int>(dots);
        ref.module = strip(mod.substr(dots));
        // strip surrounding parens on the name list
        if (!names_part.empty() && names_part.front() == '(') {
            names_part = strip(names_part.substr(1));
            if (!names_part.empty() && names_part.back() == ')')
                names_part = strip(names_part.substr(0, names_part.size() - 1));
        }
        for (auto& item : split_top_level(names_part, ',')) {
            if (item.empty()) continue;
            if (item == "*") {
                ref.names.push_back("*");
                continue;
            }
            std::string name;
            for (char c : item) {
                if (is_ident_char(c) || c == '.') name += c;
                else break;
            }
            if (!name.empty()) ref.names.push_back(name);
        }
        return true;
    }
    return false;
}

}  // namespace

ModuleStructure parse_module(const std::string& path, const std::string& source) {
    ModuleStructure out;
    auto lines = logical_lines(path, source);

    if (!lines.empty() && lines[0].starts_with_string) {
        out.module_docstring = lines[0].text;
    }

    // class/function context tracked by indentation
    int class_indent = -1;
    ClassDef* open_class = nullptr;
    const LogicalLine* pending_def = nullptr;  // awaits docstring check
    FunctionDef* pending_fn = nullptr;
    ClassDef* pending_cls = nullptr;

    for (std::size_t idx = 0; idx < lines.size(); ++idx) {
        const auto& ll = lines[idx];

        if (pending_def && ll.indent > pending_def->indent) {
            if (ll.starts_with_string) {
                if (pending_fn) pending_fn->has_docstring = true;
                if (pending_cls) pending_cls->has_docstring = true;
            }
        }
        pending_def = nullptr;
        pending_fn = nullptr;
        pending_cls = nullptr;

        if (open_class && ll.indent <= class_indent) {
            open_class = nullptr;
            class_indent = -1;
        }

        std::size_t after = 0;
        ImportRef ref;
        if (parse_import(ll, ref)) {
            if (!ref.is_from) {
                // split "import a.b as x, c" into separate refs
                for (auto& item : split_top_level(ref.module, ',')) {
                    ImportRef one;
                    one.is_from = false;
                    one.line = ref.line;
                    std::string mod;
                    for (char c : item) {
                        if (is_ident_char(c) || c == '.') mod += c;
                        else break;
                    }
                    if (!mod.empty()) {
                        one.module = mod;
                        out.imports.push_back(std::move(one));
                    }
                }
            } else {
                out.imports.push_back(std::move(ref));
            }
            continue;
        }

        bool is_def = starts_with_word(ll.text, "def", &after);
        bool is_async_def = false;
        if (!is_def && starts_with_word(ll.text, "async", &after)) {
            std::string rest = ll.text.substr(after);
            std::size_t a2 = 0;
            if (starts_with_word(rest, "def", &a2)) {
                is_def = true;
                is_async_def = true;
                after += a2;
            }
        }
        if (is_def) {
            std::string rest = ll.text.substr(after);
            std::string name;
            std::size_t i = 0;
            while (i < rest.size() && is_ident_char(rest[i])) name += rest[i++];
            if (name.empty()) {
                throw AnalysisError(path, ll.line, "malformed def");
            }
            std::size_t open = rest.find('(', i);
            std::size_t close = rest.rfind(')');
            if (open == std::string::npos || close == std::string::npos || close < open) {
                throw AnalysisError(path, ll.line, "malformed parameter list");
            }
            FunctionDef fn;
            fn.name = name;
            fn.params = parse_params(rest.substr(open + 1, close - open - 1));
            (void)is_async_def;

            if (open_class && ll.indent > class_indent) {
                open_class->methods.push_back(std::move(fn));
                pending_fn = &open_class->methods.back();
            } else if (ll.indent == 0) {
                out.functions.push_back(std::move(fn));
                pending_fn = &out.functions.back();
            } else {
                continue;  // nested function, not part of the skeleton
            }
            pending_def = &ll;
            continue;
        }

        if (starts_with_word(ll.text, "class", &after) && ll.indent == 0) {
            std::string rest = ll.text.substr(after);
            std::string name;
            std::size_t i = 0;
            while (i < rest.size() && is_ident_char(rest[i])) name += rest[i++];
            if (name.empty()) throw AnalysisError(path, ll.line, "malformed class");
            ClassDef cls;
            cls.name = name;
            out.classes.push_back(std::move(cls));
            open_class = &out.classes.back();
            class_indent = ll.indent;
            pending_cls = open_class;
            pending_def = &ll;
            continue;
        }
    }
    return out;
}

}  // namespace repoforge::pysrc
