#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "nbplan/lp.hpp"

namespace nbplan::lp {

namespace {

constexpr std::size_t kWrapColumn = 200;

std::string number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return csv::format_double(v);
}

// Appends " + 3 x" style terms, wrapping long expressions over several lines.
class ExpressionWriter {
public:
    explicit ExpressionWriter(std::ostream& out, std::size_t column) : out_(out), column_(column) {}

    void term(double coeff, const std::string& name, bool first) {
        std::string text;
        if (coeff < 0) text = first ? "-" : " -";
        else if (!first) text = " +";
        text += " " + number(std::abs(coeff)) + " " + name;
        if (column_ + text.size() > kWrapColumn) {
            out_ << "\n   ";
            column_ = 3;
        }
        out_ << text;
        column_ += text.size();
    }

private:
    std::ostream& out_;
    std::size_t column_;
};

enum class TokenKind { Name, Number, Colon, Plus, Minus, Less, Greater, Equal };

struct Token {
    TokenKind kind;
    std::string text;
    double value = 0.0;
};

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) ||
           std::string_view("_./!#$%&(),;?@`'{}|~\"").find(c) != std::string_view::npos;
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == ':') {
            tokens.push_back({TokenKind::Colon, ":"});
            ++i;
        } else if (c == '+') {
            tokens.push_back({TokenKind::Plus, "+"});
            ++i;
        } else if (c == '-') {
            tokens.push_back({TokenKind::Minus, "-"});
            ++i;
        } else if (c == '<' || c == '>' || c == '=') {
            TokenKind kind = c == '<' ? TokenKind::Less : c == '>' ? TokenKind::Greater : TokenKind::Equal;
            ++i;
            if (kind != TokenKind::Equal && i < text.size() && text[i] == '=') ++i;
            else if (kind == TokenKind::Equal && i < text.size() && (text[i] == '<' || text[i] == '>')) {
                kind = text[i] == '<' ? TokenKind::Less : TokenKind::Greater;
                ++i;
            }
            tokens.push_back({kind, ""});
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
            if (ec != std::errc()) throw ModelError("LP parse error: bad number near '" + text.substr(i, 20) + "'");
            std::size_t end = static_cast<std::size_t>(ptr - text.data());
            tokens.push_back({TokenKind::Number, text.substr(i, end - i), value});
            i = end;
        } else if (is_name_char(c)) {
            std::size_t start = i;
            while (i < text.size() && is_name_char(text[i])) ++i;
            std::string name = text.substr(start, i - start);
            std::string lower = name;
            std::transform(lower.begin(), lower.end(), lower.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
            if (lower == "inf" || lower == "infinity")
                tokens.push_back({TokenKind::Number, name, kInf});
            else
                tokens.push_back({TokenKind::Name, std::move(name)});
        } else {
            throw ModelError(std::string("LP parse error: unexpected character '") + c + "'");
        }
    }
    return tokens;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    bool done() const { return pos_ >= tokens_.size(); }
    const Token& peek(std::size_t ahead = 0) const {
        if (pos_ + ahead >= tokens_.size()) throw ModelError("LP parse error: unexpected end of section");
        return tokens_[pos_ + ahead];
    }
    Token next() {
        Token t = peek();
        ++pos_;
        return t;
    }
    bool has(std::size_t ahead) const { return pos_ + ahead < tokens_.size(); }

    std::optional<std::string> label() {
        if (has(1) && peek().kind == TokenKind::Name && peek(1).kind == TokenKind::Colon) {
            std::string name = next().text;
            next();
            return name;
        }
        return std::nullopt;
    }

    // Reads "[+|-] [coef] name ..." until a relational operator or a new label.
    std::vector<std::pair<std::string, double>> expression(bool stop_at_label) {
        std::vector<std::pair<std::string, double>> terms;
        while (!done()) {
            const Token& t = peek();
            if (t.kind == TokenKind::Less || t.kind == TokenKind::Greater || t.kind == TokenKind::Equal) break;
            if (stop_at_label && !terms.empty() && has(1) && t.kind == TokenKind::Name &&
                peek(1).kind == TokenKind::Colon)
                break;
            double sign = 1.0;
            while (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus)
                if (next().kind == TokenKind::Minus) sign = -sign;
            double coeff = 1.0;
            if (peek().kind == TokenKind::Number) coeff = next().value;
            Token name = next();
            if (name.kind != TokenKind::Name) throw ModelError("LP parse error: expected variable name");
            terms.emplace_back(name.text, sign * coeff);
        }
        return terms;
    }

    double signed_number() {
        double sign = 1.0;
        while (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus)
            if (next().kind == TokenKind::Minus) sign = -sign;
        Token t = next();
        if (t.kind != TokenKind::Number) throw ModelError("LP parse error: expected number");
        return sign * t.value;
    }

    bool at_number() const {
        std::size_t k = 0;
        while (has(k) && (peek(k).kind == TokenKind::Plus || peek(k).kind == TokenKind::Minus)) ++k;
        return has(k) && peek(k).kind == TokenKind::Number;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

enum class Section { None, Objective, Constraints, Bounds, End };

Section classify(std::string line) {
    std::transform(line.begin(), line.end(), line.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) return Section::None;
    line = line.substr(first);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (line == "minimize" || line == "minimise" || line == "minimum" || line == "min")
        return Section::Objective;
    if (line == "subject to" || line == "such that" || line == "st" || line == "s.t.")
        return Section::Constraints;
    if (line == "bounds" || line == "bound") return Section::Bounds;
    if (line == "end") return Section::End;
    return Section::None;
}

Sense to_sense(TokenKind kind) {
    switch (kind) {
        case TokenKind::Less: return Sense::LessEqual;
        case TokenKind::Greater: return Sense::GreaterEqual;
        default: return Sense::Equal;
    }
}

}  // namespace

void write_lp(std::ostream& out, const LinearProgram& lp) {
    out << "\\ nbplan LP export: " << lp.variable_count() << " variables, "
        << lp.constraint_count() << " constraints\n";
    out << "Minimize\n obj:";
    {
        ExpressionWriter w(out, 5);
        bool first = true;
        // Every variable appears here, so re-reading preserves variable order.
        for (const auto& v : lp.variables()) {
            w.term(v.cost, v.name, first);
            first = false;
        }
    }
    out << "\nSubject To\n";
    for (const auto& c : lp.constraints()) {
        out << ' ' << c.name << ':';
        ExpressionWriter w(out, c.name.size() + 2);
        bool first = true;
        for (const Term& t : c.terms) {
            w.term(t.coeff, lp.variables()[t.var.index].name, first);
            first = false;
        }
        if (first && lp.variable_count() > 0) w.term(0.0, lp.variables().front().name, true);
        const char* op = c.sense == Sense::LessEqual ? "<=" : c.sense == Sense::GreaterEqual ? ">=" : "=";
        out << ' ' << op << ' ' << number(c.rhs) << '\n';
    }
    out << "Bounds\n";
    for (const auto& v : lp.variables()) {
        if (v.lower == 0.0 && v.upper == kInf) continue;
        if (v.lower == -kInf && v.upper == kInf)
            out << ' ' << v.name << " free\n";
        else if (v.lower == v.upper)
            out << ' ' << v.name << " = " << number(v.lower) << '\n';
        else
            out << ' ' << number(v.lower) << " <= " << v.name << " <= " << number(v.upper) << '\n';
    }
    out << "End\n";
}

LinearProgram read_lp(std::istream& in) {
    std::string objective_text, constraint_text, bounds_text;
    Section section = Section::None;
    std::string line;
    bool ended = false;
    while (std::getline(in, line)) {
        if (auto comment = line.find('\\'); comment != std::string::npos) line.erase(comment);
        Section s = classify(line);
        if (s == Section::End) {
            ended = true;
            break;
        }
        if (s != Section::None) {
            section = s;
            continue;
        }
        switch (section) {
            case Section::Objective: objective_text += line + "\n"; break;
            case Section::Constraints: constraint_text += line + "\n"; break;
            case Section::Bounds: bounds_text += line + "\n"; break;
            default:
                if (line.find_first_not_of(" \t\r") != std::string::npos)
                    throw ModelError("LP parse error: text outside any section");
        }
    }
    if (!ended) throw ModelError("LP parse error: missing End");

    LinearProgram lp;
    auto ensure = [&lp](const std::string& name) {
        if (!lp.find_variable(name)) lp.add_variable(name, 0.0, kInf, 0.0);
        return *lp.find_variable(name);
    };

    {
        Parser p(tokenize(objective_text));
        p.label();
        for (const auto& [name, coeff] : p.expression(false)) {
            VarId id = ensure(name);
            lp.set_cost(id, lp.variables()[id.index].cost + coeff);
        }
    }

    struct PendingRow {
        std::string name;
        std::vector<std::pair<std::string, double>> terms;
        Sense sense;
        double rhs;
    };
    std::vector<PendingRow> rows;
    {
        Parser p(tokenize(constraint_text));
        std::size_t unnamed = 0;
        while (!p.done()) {
            auto name = p.label();
            auto terms = p.expression(true);
            Token op = p.next();
            if (op.kind != TokenKind::Less && op.kind != TokenKind::Greater && op.kind != TokenKind::Equal)
                throw ModelError("LP parse error: expected relational operator");
            double rhs = p.signed_number();
            for (const auto& term : terms) ensure(term.first);
            rows.push_back({name ? *name : "R" + std::to_string(++unnamed), std::move(terms),
                            to_sense(op.kind), rhs});
        }
    }
    for (auto& r : rows) lp.add_constraint(r.name, r.terms, r.sense, r.rhs);

    {
        Parser p(tokenize(bounds_text));
        while (!p.done()) {
            if (p.at_number()) {
                double lower = p.signed_number();
                Token op = p.next();
                Token name = p.next();
                if (name.kind != TokenKind::Name) throw ModelError("LP parse error: expected name in bounds");
                VarId id = ensure(name.text);
                const Variable& v = lp.variables()[id.index];
                double lo = v.lower, hi = v.upper;
                if (op.kind == TokenKind::Less) lo = lower;
                else if (op.kind == TokenKind::Greater) hi = lower;
                else lo = hi = lower;
                if (!p.done() && (p.peek().kind == TokenKind::Less || p.peek().kind == TokenKind::Greater)) {
                    Token op2 = p.next();
                    double bound = p.signed_number();
                    if (op2.kind == TokenKind::Less) hi = bound;
                    else lo = bound;
                }
                lp.set_bounds(id, lo, hi);
            } else {
                Token name = p.next();
                if (name.kind != TokenKind::Name) throw ModelError("LP parse error: expected name in bounds");
                VarId id = ensure(name.text);
                if (!p.done() && p.peek().kind == TokenKind::Name) {
                    std::string word = p.next().text;
                    std::transform(word.begin(), word.end(), word.begin(),
                                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                    if (word != "free") throw ModelError("LP parse error: unexpected '" + word + "' in bounds");
                    lp.set_bounds(id, -kInf, kInf);
                    continue;
                }
                Token op = p.next();
                double bound = p.signed_number();
                const Variable& v = lp.variables()[id.index];
                if (op.kind == TokenKind::Less) lp.set_bounds(id, v.lower, bound);
                else if (op.kind == TokenKind::Greater) lp.set_bounds(id, bound, v.upper);
                else lp.set_bounds(id, bound, bound);
            }
        }
    }
    return lp;
}

}  // namespace nbplan::lp
