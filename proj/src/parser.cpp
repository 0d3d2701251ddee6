#include "lnafim/parser.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <optional>

#include "lnafim/errors.hpp"

namespace lnafim {

namespace {

enum class Tok { Ident, Number, Plus, Minus, Star, Slash, Caret, LParen, RParen, Arrow, At, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int column = 1;
};

class Lexer {
 public:
  Lexer(std::string_view line, int line_no) : line_no_(line_no) {
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      const int col = static_cast<int>(i) + 1;
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < line.size() &&
               (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_'))
          ++j;
        tokens_.push_back({Tok::Ident, std::string(line.substr(i, j - i)), 0.0, col});
        i = j;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t j = i;
        while (j < line.size() &&
               (std::isdigit(static_cast<unsigned char>(line[j])) || line[j] == '.'))
          ++j;
        if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
          std::size_t k = j + 1;
          if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
          if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
            while (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) ++k;
            j = k;
          }
        }
        const std::string_view s = line.substr(i, j - i);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
          error(col, "malformed number '" + std::string(s) + "'");
        tokens_.push_back({Tok::Number, std::string(s), v, col});
        i = j;
        continue;
      }
      if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
        tokens_.push_back({Tok::Arrow, "->", 0.0, col});
        i += 2;
        continue;
      }
      Tok k;
      switch (c) {
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '^': k = Tok::Caret; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case '@': k = Tok::At; break;
        default: error(col, std::string("unexpected character '") + c + "'");
      }
      tokens_.push_back({k, std::string(1, c), 0.0, col});
      ++i;
    }
    tokens_.push_back({Tok::End, "", 0.0, static_cast<int>(line.size()) + 1});
  }

  const Token& peek() const { return tokens_[pos_]; }
  Token next() { return tokens_[pos_ == tokens_.size() - 1 ? pos_ : pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  Token expect(Tok k, const char* what) {
    if (peek().kind != k) error(peek().column, std::string("expected ") + what);
    return next();
  }
  bool at_end() const { return peek().kind == Tok::End; }

  [[noreturn]] void error(int column, const std::string& msg) const {
    throw InputError("line " + std::to_string(line_no_) + ", column " + std::to_string(column) +
                     ": " + msg);
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int line_no_;
};

struct SymbolTable {
  std::map<std::string, int, std::less<>> species;
  std::map<std::string, int, std::less<>> params;
};

bool is_reserved(std::string_view name) {
  return name == "t" || name == "exp" || name == "log" || name == "sqrt" || name == "species" ||
         name == "params" || name == "reaction";
}

// expr    := term (('+'|'-') term)*
// term    := unary (('*'|'/') unary)*
// unary   := '-' unary | power
// power   := primary ('^' unary)?
// primary := number | ident | func '(' expr ')' | '(' expr ')'
class ExprParser {
 public:
  ExprParser(Lexer& lex, const SymbolTable& syms) : lex_(lex), syms_(syms) {}

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (lex_.accept(Tok::Plus)) e = e + term();
      else if (lex_.accept(Tok::Minus)) e = e - term();
      else return e;
    }
  }

 private:
  Expr term() {
    Expr e = unary();
    for (;;) {
      if (lex_.accept(Tok::Star)) e = e * unary();
      else if (lex_.accept(Tok::Slash)) e = e / unary();
      else return e;
    }
  }

  Expr unary() {
    if (lex_.accept(Tok::Minus)) return -unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (lex_.peek().kind != Tok::Caret) return base;
    const int col = lex_.next().column;
    Expr exponent = unary();
    if (!exponent.is_constant()) lex_.error(col, "exponent of '^' must be a constant expression");
    return Expr::pow(std::move(base), std::move(exponent));
  }

  Expr primary() {
    const Token tok = lex_.next();
    switch (tok.kind) {
      case Tok::Number: return Expr::constant(tok.number);
      case Tok::LParen: {
        Expr e = expr();
        lex_.expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        if (tok.text == "exp" || tok.text == "log" || tok.text == "sqrt") {
          lex_.expect(Tok::LParen, "'(' after function name");
          Expr arg = expr();
          lex_.expect(Tok::RParen, "')'");
          if (tok.text == "exp") return Expr::exp(std::move(arg));
          if (tok.text == "log") return Expr::log(std::move(arg));
          return Expr::sqrt(std::move(arg));
        }
        if (tok.text == "t") return Expr::time();
        if (auto it = syms_.species.find(tok.text); it != syms_.species.end())
          return Expr::species(it->second);
        if (auto it = syms_.params.find(tok.text); it != syms_.params.end())
          return Expr::param(it->second);
        lex_.error(tok.column, "undeclared symbol " + tok.text);
      }
      case Tok::End: lex_.error(tok.column, "unexpected end of expression");
      default: lex_.error(tok.column, "unexpected '" + tok.text + "'");
    }
  }

  Lexer& lex_;
  const SymbolTable& syms_;
};

std::vector<std::pair<int, int>> parse_side(Lexer& lex, const SymbolTable& syms) {
  std::vector<std::pair<int, int>> side;
  if (lex.peek().kind == Tok::Number && lex.peek().number == 0.0) {
    lex.next();
    return side;
  }
  std::map<int, int> counts;
  for (;;) {
    int mult = 1;
    if (lex.peek().kind == Tok::Number) {
      const Token n = lex.next();
      if (n.number < 1.0 || n.number != static_cast<double>(static_cast<int>(n.number)))
        lex.error(n.column, "stoichiometric coefficient must be a positive integer");
      mult = static_cast<int>(n.number);
      lex.expect(Tok::Star, "'*' after stoichiometric coefficient");
    }
    const Token name = lex.expect(Tok::Ident, "species name");
    auto it = syms.species.find(name.text);
    if (it == syms.species.end()) {
      if (syms.params.count(name.text) != 0)
        lex.error(name.column, "'" + name.text + "' is a parameter, not a species");
      lex.error(name.column, "undeclared symbol " + name.text);
    }
    counts[it->second] += mult;
    if (!lex.accept(Tok::Plus)) break;
  }
  side.assign(counts.begin(), counts.end());
  return side;
}

void declare(Lexer& lex, std::vector<std::string>& names, SymbolTable& syms, bool species) {
  bool any = false;
  while (!lex.at_end()) {
    const Token tok = lex.expect(Tok::Ident, "identifier");
    if (is_reserved(tok.text)) lex.error(tok.column, "'" + tok.text + "' is a reserved name");
    if (syms.species.count(tok.text) != 0 || syms.params.count(tok.text) != 0)
      lex.error(tok.column, "duplicate name " + tok.text);
    const int index = static_cast<int>(names.size());
    (species ? syms.species : syms.params).emplace(tok.text, index);
    names.push_back(tok.text);
    any = true;
  }
  if (!any) lex.error(lex.peek().column, "declaration lists no names");
}

}  // namespace

ReactionNetwork parse_model(std::string_view text) {
  std::vector<std::string> species;
  std::vector<std::string> params;
  std::vector<Reaction> reactions;
  SymbolTable syms;

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;

    Lexer lex(line, line_no);
    if (lex.at_end()) continue;
    const Token head = lex.expect(Tok::Ident, "'species', 'params' or 'reaction'");
    if (head.text == "species") {
      declare(lex, species, syms, true);
    } else if (head.text == "params") {
      declare(lex, params, syms, false);
    } else if (head.text == "reaction") {
      Reaction r;
      r.reactants = parse_side(lex, syms);
      lex.expect(Tok::Arrow, "'->'");
      r.products = parse_side(lex, syms);
      lex.expect(Tok::At, "'@' before rate expression");
      ExprParser ep(lex, syms);
      r.rate = ep.expr();
      if (!lex.at_end()) lex.error(lex.peek().column, "unexpected '" + lex.peek().text + "'");
      std::map<int, int> net;
      for (auto [s, m] : r.reactants) net[s] -= m;
      for (auto [s, m] : r.products) net[s] += m;
      bool changes = false;
      for (auto [s, m] : net) changes = changes || m != 0;
      if (!changes)
        lex.error(head.column, "reaction " + std::to_string(reactions.size() + 1) +
                                   " has an all-zero stoichiometry column");
      reactions.push_back(std::move(r));
    } else {
      lex.error(head.column, "unknown statement '" + head.text + "'");
    }
    if (end == text.size()) break;
  }
  if (species.empty()) throw InputError("model declares no species");
  if (reactions.empty()) throw InputError("model declares no reactions");
  return ReactionNetwork(std::move(species), std::move(params), std::move(reactions));
}

Expr parse_expression(std::string_view text, const std::vector<std::string>& species,
                      const std::vector<std::string>& params) {
  SymbolTable syms;
  for (std::size_t i = 0; i < species.size(); ++i)
    syms.species.emplace(species[i], static_cast<int>(i));
  for (std::size_t i = 0; i < params.size(); ++i)
    syms.params.emplace(params[i], static_cast<int>(i));
  Lexer lex(text, 1);
  ExprParser ep(lex, syms);
  Expr e = ep.expr();
  if (!lex.at_end()) lex.error(lex.peek().column, "unexpected '" + lex.peek().text + "'");
  return e;
}

}  // namespace lnafim
