#include "drl/constraint_lang.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "drl/errors.hpp"

namespace drl {

// ------------------------------------------------------------ VariableBinding

VariableBinding::VariableBinding(std::vector<std::string> names, Source source)
    : source_(source) {
    for (auto& n : names) {
        if (index_.contains(n)) throw std::invalid_argument("duplicate variable name '" + n + "'");
        index_.emplace(n, names_.size());
        names_.push_back(std::move(n));
    }
}

std::optional<VarIndex> VariableBinding::find(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    return std::nullopt;
}

std::optional<VarIndex> VariableBinding::resolve(std::string_view name) {
    if (auto found = find(name)) return found;
    if (source_ != Source::inferred) return std::nullopt;
    index_.emplace(std::string(name), names_.size());
    names_.emplace_back(name);
    return names_.size() - 1;
}

// -------------------------------------------------------------------- Formula

Formula Formula::atom(LinearExpr lhs, Comparator cmp, LinearExpr rhs, SourcePos pos) {
    Formula f;
    f.kind = Kind::atom;
    f.pos = pos;
    f.lhs = std::move(lhs);
    f.cmp = cmp;
    f.rhs = std::move(rhs);
    return f;
}

Formula Formula::negation(Formula child, SourcePos pos) {
    Formula f;
    f.kind = Kind::negation;
    f.pos = pos;
    f.children.push_back(std::move(child));
    return f;
}

Formula Formula::conjunction(std::vector<Formula> children, SourcePos pos) {
    Formula f;
    f.kind = Kind::conjunction;
    f.pos = pos;
    f.children = std::move(children);
    return f;
}

Formula Formula::disjunction(std::vector<Formula> children, SourcePos pos) {
    Formula f;
    f.kind = Kind::disjunction;
    f.pos = pos;
    f.children = std::move(children);
    return f;
}

Formula Formula::implication(Formula lhs, Formula rhs, SourcePos pos) {
    Formula f;
    f.kind = Kind::implication;
    f.pos = pos;
    f.children.push_back(std::move(lhs));
    f.children.push_back(std::move(rhs));
    return f;
}

bool operator==(const Formula& a, const Formula& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Formula::Kind::atom) return a.cmp == b.cmp && a.lhs == b.lhs && a.rhs == b.rhs;
    return a.children == b.children;
}

bool Formula::holds(std::span<const double> sample) const {
    switch (kind) {
        case Kind::atom: {
            const double l = evaluate(lhs, sample);
            const double r = evaluate(rhs, sample);
            switch (cmp) {
                case Comparator::ge: return l >= r;
                case Comparator::le: return l <= r;
                case Comparator::gt: return l > r;
                case Comparator::lt: return l < r;
                case Comparator::eq: return l == r;
                case Comparator::ne: return l != r;
            }
            return false;
        }
        case Kind::negation: return !children.front().holds(sample);
        case Kind::conjunction:
            return std::all_of(children.begin(), children.end(),
                               [&](const Formula& c) { return c.holds(sample); });
        case Kind::disjunction:
            return std::any_of(children.begin(), children.end(),
                               [&](const Formula& c) { return c.holds(sample); });
        case Kind::implication: return !children[0].holds(sample) || children[1].holds(sample);
    }
    return false;
}

// --------------------------------------------------------------------- Parser

namespace {

enum class Tok {
    ident, number, ge, le, gt, lt, eq, ne, arrow, plus, minus, star,
    lparen, rparen, kw_and, kw_or, kw_not, end
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t column;  // 1-based
};

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(std::string_view text, std::size_t line, std::size_t column_offset) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto col = [&](std::size_t at) { return at + 1 + column_offset; };
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        auto two = [&](char next) { return i + 1 < text.size() && text[i + 1] == next; };
        if (ident_start(c)) {
            while (i < text.size() && ident_char(text[i])) ++i;
            std::string word(text.substr(start, i - start));
            const std::string kw = lower(word);
            Tok kind = Tok::ident;
            if (kw == "and") kind = Tok::kw_and;
            else if (kw == "or") kind = Tok::kw_or;
            else if (kw == "not") kind = Tok::kw_not;
            else if (kw == "implies") kind = Tok::arrow;
            out.push_back({kind, std::move(word), col(start)});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < text.size() &&
                                                             std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) ++i;
            if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
                if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
                    i = j;
                    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                }
            }
            if (i < text.size() && ident_char(text[i])) {
                throw ParseError("malformed number", line, col(start));
            }
            out.push_back({Tok::number, std::string(text.substr(start, i - start)), col(start)});
            continue;
        }
        Tok kind;
        std::size_t len = 1;
        switch (c) {
            case '>': kind = two('=') ? (len = 2, Tok::ge) : Tok::gt; break;
            case '<': kind = two('=') ? (len = 2, Tok::le) : Tok::lt; break;
            case '=':
                if (!two('=')) throw ParseError("expected '==' (single '=' is not a comparator)", line, col(start));
                kind = Tok::eq;
                len = 2;
                break;
            case '!': kind = two('=') ? (len = 2, Tok::ne) : Tok::kw_not; break;
            case '-': kind = two('>') ? (len = 2, Tok::arrow) : Tok::minus; break;
            case '+': kind = Tok::plus; break;
            case '*': kind = Tok::star; break;
            case '(': kind = Tok::lparen; break;
            case ')': kind = Tok::rparen; break;
            case '&': kind = Tok::kw_and; break;
            case '|': kind = Tok::kw_or; break;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", line, col(start));
        }
        out.push_back({kind, std::string(text.substr(start, len)), col(start)});
        i += len;
    }
    out.push_back({Tok::end, "", col(text.size())});
    return out;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, VariableBinding& binding, std::size_t line)
        : tokens_(std::move(tokens)), binding_(binding), line_(line) {}

    Formula parse_all() {
        Formula f = implication();
        if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
        return f;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& take() { return tokens_[pos_++]; }
    bool accept(Tok k) {
        if (peek().kind != k) return false;
        ++pos_;
        return true;
    }
    SourcePos here() const { return {line_, peek().column}; }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, peek().column); }

    Formula implication() {
        const SourcePos at = here();
        Formula lhs = disjunction();
        if (accept(Tok::arrow)) return Formula::implication(std::move(lhs), implication(), at);
        return lhs;
    }

    Formula disjunction() {
        const SourcePos at = here();
        std::vector<Formula> parts;
        parts.push_back(conjunction());
        while (accept(Tok::kw_or)) parts.push_back(conjunction());
        if (parts.size() == 1) return std::move(parts.front());
        return Formula::disjunction(std::move(parts), at);
    }

    Formula conjunction() {
        const SourcePos at = here();
        std::vector<Formula> parts;
        parts.push_back(negation());
        while (accept(Tok::kw_and)) parts.push_back(negation());
        if (parts.size() == 1) return std::move(parts.front());
        return Formula::conjunction(std::move(parts), at);
    }

    Formula negation() {
        const SourcePos at = here();
        if (accept(Tok::kw_not)) return Formula::negation(negation(), at);
        if (accept(Tok::lparen)) {
            Formula inner = implication();
            if (!accept(Tok::rparen)) fail("expected ')'");
            return inner;
        }
        return atom();
    }

    Formula atom() {
        const SourcePos at = here();
        LinearExpr lhs = expr();
        Comparator cmp;
        switch (peek().kind) {
            case Tok::ge: cmp = Comparator::ge; break;
            case Tok::le: cmp = Comparator::le; break;
            case Tok::gt: cmp = Comparator::gt; break;
            case Tok::lt: cmp = Comparator::lt; break;
            case Tok::eq: cmp = Comparator::eq; break;
            case Tok::ne: cmp = Comparator::ne; break;
            default: fail(peek().kind == Tok::end ? "expected comparator" : "expected comparator, found '" + peek().text + "'");
        }
        take();
        LinearExpr rhs = expr();
        return Formula::atom(std::move(lhs), cmp, std::move(rhs), at);
    }

    LinearExpr expr() {
        LinearExpr e = term();
        for (;;) {
            if (accept(Tok::plus)) e += term();
            else if (accept(Tok::minus)) e -= term();
            else return e;
        }
    }

    LinearExpr term() {
        const bool negative = accept(Tok::minus);
        LinearExpr t;
        if (peek().kind == Tok::number) {
            const Token& num = take();
            Rational value;
            try {
                value = parse_decimal(num.text);
            } catch (const std::invalid_argument& e) {
                throw ParseError(e.what(), line_, num.column);
            }
            if (accept(Tok::star)) {
                if (peek().kind != Tok::ident) fail("expected variable after '*'");
                t = LinearExpr::variable(variable(take()), value);
            } else {
                t = LinearExpr(value);
            }
        } else if (peek().kind == Tok::ident) {
            const Token& id = take();
            t = LinearExpr::variable(variable(id));
            if (peek().kind == Tok::star) {
                take();
                if (peek().kind == Tok::ident) fail("nonlinear term: product of variables '" + id.text + "' and '" + peek().text + "'");
                fail("coefficients must precede the variable (write 'c*" + id.text + "')");
            }
        } else {
            fail(peek().kind == Tok::end ? "unexpected end of formula" : "expected term, found '" + peek().text + "'");
        }
        if (negative) t *= Rational(-1);
        return t;
    }

    VarIndex variable(const Token& id) {
        if (auto v = binding_.resolve(id.text)) return *v;
        throw ParseError("unknown identifier '" + id.text + "'", line_, id.column);
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    VariableBinding& binding_;
    std::size_t line_;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// "vars: a, b" -> names; nullopt when the line is not a header.
std::optional<std::vector<std::pair<std::string, std::size_t>>> header_names(std::string_view line,
                                                                             std::size_t lineno) {
    std::string_view body = trim(line);
    if (body.size() < 5 || lower(body.substr(0, 4)) != "vars") return std::nullopt;
    std::string_view rest = body.substr(4);
    const std::size_t lead = line.find(body) + 4;
    std::size_t skipped = 0;
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) {
        rest.remove_prefix(1);
        ++skipped;
    }
    if (rest.empty() || rest.front() != ':') return std::nullopt;
    rest.remove_prefix(1);
    std::size_t column = lead + skipped + 2;

    std::vector<std::pair<std::string, std::size_t>> names;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = rest.find(',', start);
        std::string_view raw = rest.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        std::string_view name = trim(raw);
        const std::size_t name_col = column + start + (raw.find_first_not_of(" \t") == std::string_view::npos ? 0 : raw.find_first_not_of(" \t"));
        if (name.empty() || !ident_start(name.front()) ||
            !std::all_of(name.begin(), name.end(), ident_char)) {
            throw ParseError("invalid variable name '" + std::string(name) + "' in vars header", lineno, name_col);
        }
        const std::string kw = lower(name);
        if (kw == "and" || kw == "or" || kw == "not" || kw == "implies") {
            throw ParseError("keyword '" + std::string(name) + "' cannot name a variable", lineno, name_col);
        }
        names.emplace_back(std::string(name), name_col);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return names;
}

}  // namespace

Formula parse_formula(std::string_view text, VariableBinding& binding, std::size_t line) {
    return Parser(tokenize(text, line, 0), binding, line).parse_all();
}

std::vector<ParsedFormula> parse(std::string_view text, VariableBinding& binding) {
    std::vector<ParsedFormula> out;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    bool header_allowed = true;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (trim(line).empty()) {
            if (eol == text.size()) break;
            continue;
        }

        if (auto names = header_names(line, lineno)) {
            if (!header_allowed) {
                throw ParseError("vars header must precede all formulas and appear once", lineno, 1);
            }
            std::vector<std::string> plain;
            for (auto& [n, column] : *names) {
                if (std::find(plain.begin(), plain.end(), n) != plain.end()) {
                    throw ParseError("duplicate variable '" + n + "' in vars header", lineno, column);
                }
                plain.push_back(n);
            }
            binding = VariableBinding(std::move(plain), VariableBinding::Source::declared);
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        // Columns are reported relative to the raw line.
        Formula f = Parser(tokenize(line, lineno, 0), binding, lineno).parse_all();
        out.push_back({std::move(f), lineno, std::string(trim(line))});
        if (eol == text.size()) break;
    }
    return out;
}

// ---------------------------------------------------------------- Normalizer

namespace {

using Clauses = std::vector<Constraint>;

struct CnfBuilder {
    const NormalizationConfig& cfg;
    std::size_t line;

    void add_unique(Clauses& cs, std::optional<Constraint> c) const {
        if (!c) return;
        if (std::find(cs.begin(), cs.end(), *c) == cs.end()) cs.push_back(std::move(*c));
        check(cs.size());
    }

    void check(std::size_t n) const {
        if (n > cfg.max_clauses) {
            throw BudgetExceeded("formula on line " + std::to_string(line) + " needs more than " +
                                 std::to_string(cfg.max_clauses) + " clauses in conjunctive normal form");
        }
    }

    Clauses unit(LinearExpr e) const {
        Clauses cs;
        add_unique(cs, Constraint::make({Inequality(std::move(e))}));
        return cs;
    }

    // Atom "lhs cmp rhs" (negated when requested), epsilon-rewritten.
    Clauses atom(const Formula& f, bool negated) const {
        Comparator cmp = f.cmp;
        if (negated) {
            switch (cmp) {
                case Comparator::ge: cmp = Comparator::lt; break;
                case Comparator::le: cmp = Comparator::gt; break;
                case Comparator::gt: cmp = Comparator::le; break;
                case Comparator::lt: cmp = Comparator::ge; break;
                case Comparator::eq: cmp = Comparator::ne; break;
                case Comparator::ne: cmp = Comparator::eq; break;
            }
        }
        const LinearExpr diff = f.lhs - f.rhs;  // lhs - rhs
        const LinearExpr eps(cfg.epsilon);
        switch (cmp) {
            case Comparator::ge: return unit(diff);
            case Comparator::le: return unit(-diff);
            case Comparator::gt: return unit(diff - eps);
            case Comparator::lt: return unit(-diff - eps);
            case Comparator::eq: return conj({unit(diff), unit(-diff)});
            case Comparator::ne: {
                Clauses cs;
                add_unique(cs, Constraint::make({Inequality(diff - eps), Inequality(-diff - eps)}));
                return cs;
            }
        }
        return {};
    }

    Clauses conj(std::vector<Clauses> parts) const {
        Clauses out;
        for (auto& p : parts) {
            for (auto& c : p) add_unique(out, std::move(c));
        }
        return out;
    }

    // Distribution: (A1 & A2) | (B1 & B2) = (A1|B1) & (A1|B2) & ...
    Clauses disj(std::vector<Clauses> parts) const {
        Clauses acc;
        bool first = true;
        for (auto& p : parts) {
            if (first) {
                acc = std::move(p);
                first = false;
                continue;
            }
            // An empty clause list is "true": the whole disjunction is valid.
            if (acc.empty() || p.empty()) return {};
            check(acc.size() * p.size());
            Clauses next;
            for (const auto& a : acc) {
                for (const auto& b : p) {
                    std::vector<Inequality> ds(a.disjuncts().begin(), a.disjuncts().end());
                    ds.insert(ds.end(), b.disjuncts().begin(), b.disjuncts().end());
                    add_unique(next, Constraint::make(std::move(ds)));
                }
            }
            acc = std::move(next);
        }
        return acc;
    }

    Clauses build(const Formula& f, bool negated) const {
        using K = Formula::Kind;
        switch (f.kind) {
            case K::atom: return atom(f, negated);
            case K::negation: return build(f.children.front(), !negated);
            case K::conjunction:
            case K::disjunction: {
                std::vector<Clauses> parts;
                for (const auto& c : f.children) parts.push_back(build(c, negated));
                const bool as_and = (f.kind == K::conjunction) != negated;
                return as_and ? conj(std::move(parts)) : disj(std::move(parts));
            }
            case K::implication: {
                std::vector<Clauses> parts;
                parts.push_back(build(f.children[0], !negated));
                parts.push_back(build(f.children[1], negated));
                // a -> b = !a | b;  !(a -> b) = a & !b
                return negated ? conj(std::move(parts)) : disj(std::move(parts));
            }
        }
        return {};
    }
};

}  // namespace

ConstraintSet normalize(const Formula& ast, std::size_t dimension, const NormalizationConfig& cfg) {
    if (sgn(cfg.epsilon) <= 0) throw std::invalid_argument("epsilon must be positive");
    if (cfg.max_clauses < 1) throw std::invalid_argument("max_clauses must be at least 1");
    CnfBuilder builder{cfg, ast.pos.line};
    ConstraintSet set(dimension);
    for (auto& c : builder.build(ast, false)) set.add(std::move(c));
    set.prune_subsumed();
    return set;
}

ConstraintSet normalize(const std::vector<ParsedFormula>& formulas, std::size_t dimension,
                        const NormalizationConfig& cfg) {
    ConstraintSet set(dimension);
    for (const auto& f : formulas) {
        const ConstraintSet part = normalize(f.ast, dimension, cfg);
        for (const auto& c : part.constraints()) set.add(c);
    }
    set.prune_subsumed();
    return set;
}

// ------------------------------------------------------------------- Printing

std::string to_dsl(const Inequality& ineq, const VariableBinding& binding) {
    // Scale by the lcm of the denominators so every coefficient is an integer.
    mpz_class lcm = ineq.expr().bias().get_den();
    for (const auto& t : ineq.expr().terms()) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), t.coeff.get_den_mpz_t());
    const LinearExpr e = ineq.expr() * Rational(lcm);

    std::ostringstream out;
    bool first = true;
    auto emit = [&](const mpz_class& value, const std::string* name) {
        const bool negative = value < 0;
        const mpz_class magnitude = abs(value);
        if (first) out << (negative ? "-" : "");
        else out << (negative ? " - " : " + ");
        first = false;
        if (!name) out << magnitude.get_str();
        else if (magnitude == 1) out << *name;
        else out << magnitude.get_str() << "*" << *name;
    };
    // Positive terms first: "x4 - x1" rather than "-x1 + x4".
    for (const auto& t : e.terms()) {
        if (sgn(t.coeff) > 0) emit(t.coeff.get_num(), &binding.name(t.var));
    }
    for (const auto& t : e.terms()) {
        if (sgn(t.coeff) < 0) emit(t.coeff.get_num(), &binding.name(t.var));
    }
    if (sgn(e.bias()) != 0 || first) emit(e.bias().get_num(), nullptr);
    out << " >= 0";
    return out.str();
}

std::string to_dsl(const Constraint& constraint, const VariableBinding& binding) {
    if (constraint.size() == 1) return to_dsl(constraint.disjuncts().front(), binding);
    std::string out;
    for (const auto& d : constraint.disjuncts()) {
        if (!out.empty()) out += " or ";
        out += "(" + to_dsl(d, binding) + ")";
    }
    return out;
}

std::string roundtrip_print(const ConstraintSet& set, const VariableBinding& binding) {
    std::string out;
    for (const auto& c : set.constraints()) out += to_dsl(c, binding) + "\n";
    return out;
}

}  // namespace drl
