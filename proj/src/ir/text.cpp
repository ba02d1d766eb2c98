#include "crossvec/ir/text.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace crossvec::ir {

namespace {

int precedence(const Expr& e)
{
  const Node& n = e.node();
  if (const auto* b = std::get_if<Binary>(&n.value)) {
    return (b->op == BinaryOp::add || b->op == BinaryOp::sub) ? 1 : 2;
  }
  if (const auto* u = std::get_if<Unary>(&n.value); u && u->op == UnaryOp::neg) {
    return 3;
  }
  return 4;
}

void print(std::ostream& os, const Expr& e);

void print_operand(std::ostream& os, const Expr& e, bool parens)
{
  if (parens) {
    os << '(';
  }
  print(os, e);
  if (parens) {
    os << ')';
  }
}

void print_list(std::ostream& os, const std::vector<Expr>& items)
{
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) {
      os << ", ";
    }
    print(os, items[i]);
  }
}

void print(std::ostream& os, const Expr& e)
{
  const Node& n = e.node();
  if (const auto* l = std::get_if<Literal>(&n.value)) {
    if (l->is_real()) {
      os << format_real(std::get<double>(l->value));
    } else {
      os << std::get<std::int64_t>(l->value);
    }
  } else if (const auto* v = std::get_if<Variable>(&n.value)) {
    os << v->name;
  } else if (const auto* r = std::get_if<ArrayRead>(&n.value)) {
    os << r->array;
    if (!r->indices.empty()) {
      os << '[';
      print_list(os, r->indices);
      os << ']';
    }
  } else if (const auto* b = std::get_if<Binary>(&n.value)) {
    int p = precedence(e);
    print_operand(os, b->lhs, precedence(b->lhs) < p);
    os << ' ' << to_string(b->op) << ' ';
    print_operand(os, b->rhs, precedence(b->rhs) <= p);
  } else {
    const auto& u = std::get<Unary>(n.value);
    if (u.op == UnaryOp::abs) {
      os << "abs(";
      print(os, u.operand);
      os << ')';
    } else {
      // A literal operand is parenthesized so that "-(1.0)" stays a negation
      // while "-1.0" reads back as a negative literal.
      os << '-';
      print_operand(os, u.operand, precedence(u.operand) < 3 || std::holds_alternative<Literal>(u.operand.node().value));
    }
  }
}

std::string join_names(const std::vector<std::string>& names)
{
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) {
      out += ", ";
    }
    out += names[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { ident, integer, real, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  int line = 0;
  int column = 0;
};

class LineLexer {
public:
  LineLexer(std::string_view line, int line_number) : s_(line), line_(line_number) { advance(); }

  const Token& peek() const { return tok_; }

  Token take()
  {
    Token t = tok_;
    advance();
    return t;
  }

  bool accept(std::string_view punct)
  {
    if (tok_.kind == Tok::punct && tok_.text == punct) {
      advance();
      return true;
    }
    return false;
  }

  void expect(std::string_view punct)
  {
    if (!accept(punct)) {
      fail("expected '" + std::string(punct) + "'");
    }
  }

  std::string expect_ident()
  {
    if (tok_.kind != Tok::ident) {
      fail("expected an identifier");
    }
    return take().text;
  }

  void expect_keyword(std::string_view word)
  {
    if (tok_.kind != Tok::ident || tok_.text != word) {
      fail("expected '" + std::string(word) + "'");
    }
    advance();
  }

  [[noreturn]] void fail(const std::string& message) const
  {
    std::string found = tok_.kind == Tok::end ? "end of line" : "'" + tok_.text + "'";
    throw ParseError(line_, tok_.column, message + ", found " + found);
  }

  [[noreturn]] void fail_at(const Token& t, const std::string& message) const
  {
    throw ParseError(line_, t.column, message);
  }

  bool at_end() const { return tok_.kind == Tok::end; }

  /// Column of the next character in the raw line (one-based).
  int line() const { return line_; }

private:
  void advance()
  {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) {
      ++pos_;
    }
    tok_ = Token{};
    tok_.line = line_;
    tok_.column = static_cast<int>(pos_) + 1;
    if (pos_ >= s_.size()) {
      tok_.kind = Tok::end;
      return;
    }
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      tok_.kind = Tok::ident;
      tok_.text = std::string(s_.substr(start, pos_ - start));
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      bool is_real = false;
      while (pos_ < s_.size()) {
        char d = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          ++pos_;
        } else if (d == '.') {
          is_real = true;
          ++pos_;
        } else if (d == 'e' || d == 'E') {
          is_real = true;
          ++pos_;
          if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
            ++pos_;
          }
        } else {
          break;
        }
      }
      tok_.kind = is_real ? Tok::real : Tok::integer;
      tok_.text = std::string(s_.substr(start, pos_ - start));
      return;
    }
    static const char* two[] = {"//", "+=", "<=", "->"};
    for (const char* p : two) {
      if (s_.substr(pos_, 2) == p) {
        tok_.kind = Tok::punct;
        tok_.text = p;
        pos_ += 2;
        return;
      }
    }
    static const std::string single = "()[],=:+-*/<?";
    if (single.find(c) == std::string::npos) {
      throw ParseError(line_, tok_.column, std::string("unexpected character '") + c + "'");
    }
    tok_.kind = Tok::punct;
    tok_.text = std::string(1, c);
    ++pos_;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  LoopKernel run()
  {
    std::vector<std::pair<int, std::string_view>> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t nl = text_.find('\n', pos);
      std::string_view line = text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++number;
      std::size_t first = line.find_first_not_of(" \t\r");
      if (first != std::string_view::npos && line[first] != '#') {
        lines.emplace_back(number, line);
      } else if (number == 1 && first != std::string_view::npos) {
        lines.emplace_back(number, line);
      }
      if (nl == std::string_view::npos) {
        break;
      }
      pos = nl + 1;
    }
    if (lines.empty() || trim(lines.front().second) != kTextFormatHeader) {
      int line = lines.empty() ? 1 : lines.front().first;
      throw ParseError(line, 1, "missing header '" + std::string(kTextFormatHeader) + "'");
    }
    bool ended = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (ended) {
        throw ParseError(lines[i].first, 1, "content after 'end'");
      }
      LineLexer lex(lines[i].second, lines[i].first);
      Token head = lex.peek();
      if (head.kind != Tok::ident) {
        lex.fail("expected a directive");
      }
      lex.take();
      if (head.text == "kernel") {
        kernel_.name = lex.expect_ident();
      } else if (head.text == "params") {
        while (!lex.at_end()) {
          kernel_.parameters.push_back(lex.expect_ident());
        }
      } else if (head.text == "domain") {
        parse_domain(lex);
      } else if (head.text == "array") {
        parse_array(lex);
      } else if (head.text == "stmt") {
        parse_statement(lex);
      } else if (head.text == "end") {
        ended = true;
      } else {
        lex.fail_at(head, "unknown directive '" + head.text + "'");
      }
      if (!lex.at_end()) {
        lex.fail("unexpected trailing input");
      }
    }
    if (!ended) {
      int line = lines.back().first;
      throw ParseError(line + 1, 1, "missing 'end'");
    }
    return std::move(kernel_);
  }

private:
  static std::string_view trim(std::string_view s)
  {
    auto a = s.find_first_not_of(" \t\r");
    auto b = s.find_last_not_of(" \t\r");
    return a == std::string_view::npos ? std::string_view{} : s.substr(a, b - a + 1);
  }

  void key(LineLexer& lex, std::string_view name)
  {
    lex.expect_keyword(name);
    lex.expect("=");
  }

  std::vector<Expr> expr_list(LineLexer& lex)
  {
    std::vector<Expr> out;
    lex.expect("(");
    if (lex.accept(")")) {
      return out;
    }
    do {
      out.push_back(expression(lex));
    } while (lex.accept(","));
    lex.expect(")");
    return out;
  }

  std::vector<std::string> name_list(LineLexer& lex)
  {
    std::vector<std::string> out;
    lex.expect("(");
    if (lex.accept(")")) {
      return out;
    }
    do {
      out.push_back(lex.expect_ident());
    } while (lex.accept(","));
    lex.expect(")");
    return out;
  }

  std::int64_t integer_token(LineLexer& lex)
  {
    bool negative = lex.accept("-");
    if (lex.peek().kind != Tok::integer) {
      lex.fail("expected an integer");
    }
    Token t = lex.take();
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size()) {
      lex.fail_at(t, "integer '" + t.text + "' out of range");
    }
    return negative ? -v : v;
  }

  double real_token(LineLexer& lex)
  {
    bool negative = lex.accept("-");
    if (lex.peek().kind != Tok::real && lex.peek().kind != Tok::integer) {
      lex.fail("expected a number");
    }
    Token t = lex.take();
    double v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size()) {
      lex.fail_at(t, "malformed number '" + t.text + "'");
    }
    return negative ? -v : v;
  }

  void parse_domain(LineLexer& lex)
  {
    IndexVar d;
    d.name = lex.expect_ident();
    key(lex, "lower");
    d.lower = expr_list(lex);
    key(lex, "upper");
    d.upper = expr_list(lex);
    key(lex, "tag");
    Token tag = lex.peek();
    std::string name = lex.expect_ident();
    if (name == "seq") {
      d.tag = SequentialTag{};
    } else if (name == "simd") {
      lex.expect("(");
      d.tag = SimdTag{static_cast<int>(integer_token(lex))};
      lex.expect(")");
    } else {
      lex.fail_at(tag, "unknown iname tag '" + name + "'");
    }
    kernel_.domains.push_back(std::move(d));
  }

  void parse_array(LineLexer& lex)
  {
    ArrayDecl a;
    a.name = lex.expect_ident();
    Token kind = lex.peek();
    std::string k = lex.expect_ident();
    if (k == "argument") {
      a.kind = ArrayKind::argument;
    } else if (k == "constant") {
      a.kind = ArrayKind::constant;
    } else if (k == "temporary") {
      a.kind = ArrayKind::temporary;
    } else {
      lex.fail_at(kind, "unknown array kind '" + k + "'");
    }
    Token type = lex.peek();
    std::string t = lex.expect_ident();
    if (t == "real64") {
      a.type = ScalarType::real64;
    } else if (t == "int32") {
      a.type = ScalarType::int32;
    } else {
      lex.fail_at(type, "unknown element type '" + t + "'");
    }
    key(lex, "shape");
    lex.expect("(");
    if (!lex.accept(")")) {
      do {
        if (lex.accept("?")) {
          a.shape.emplace_back(std::nullopt);
        } else {
          a.shape.emplace_back(integer_token(lex));
        }
      } while (lex.accept(","));
      lex.expect(")");
    }
    key(lex, "strides");
    lex.expect("(");
    if (!lex.accept(")")) {
      do {
        a.strides.push_back(integer_token(lex));
      } while (lex.accept(","));
      lex.expect(")");
    }
    key(lex, "align");
    a.alignment = static_cast<int>(integer_token(lex));
    while (!lex.at_end()) {
      Token flag = lex.peek();
      std::string f = lex.expect_ident();
      if (f == "lane") {
        a.lane_expanded = true;
      } else if (f == "data") {
        lex.expect("=");
        lex.expect("(");
        if (!lex.accept(")")) {
          do {
            a.data.push_back(real_token(lex));
          } while (lex.accept(","));
          lex.expect(")");
        }
      } else {
        lex.fail_at(flag, "unknown array attribute '" + f + "'");
      }
    }
    arrays_.insert(a.name);
    kernel_.arrays.push_back(std::move(a));
  }

  void parse_statement(LineLexer& lex)
  {
    Statement s;
    s.id = lex.expect_ident();
    key(lex, "within");
    s.within = name_list(lex);
    key(lex, "deps");
    s.depends_on = name_list(lex);
    lex.expect(":");
    s.lhs.array = lex.expect_ident();
    if (lex.accept("[")) {
      do {
        s.lhs.indices.push_back(expression(lex));
      } while (lex.accept(","));
      lex.expect("]");
    }
    if (lex.accept("+=")) {
      s.mode = AssignMode::increment;
    } else {
      lex.expect("=");
      s.mode = AssignMode::assign;
    }
    s.rhs = expression(lex);
    kernel_.statements.push_back(std::move(s));
  }

  Expr expression(LineLexer& lex)
  {
    Expr lhs = term(lex);
    for (;;) {
      if (lex.accept("+")) {
        lhs = lhs + term(lex);
      } else if (lex.accept("-")) {
        lhs = lhs - term(lex);
      } else {
        return lhs;
      }
    }
  }

  Expr term(LineLexer& lex)
  {
    Expr lhs = unary(lex);
    for (;;) {
      if (lex.accept("*")) {
        lhs = lhs * unary(lex);
      } else if (lex.accept("//")) {
        lhs = floordiv(lhs, unary(lex));
      } else if (lex.accept("/")) {
        lhs = lhs / unary(lex);
      } else {
        return lhs;
      }
    }
  }

  Expr unary(LineLexer& lex)
  {
    if (lex.accept("-")) {
      Tok next = lex.peek().kind;
      if (next == Tok::integer) {
        Token t = lex.take();
        std::int64_t v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        return integer(-v);
      }
      if (next == Tok::real) {
        Token t = lex.take();
        double v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        return real(-v);
      }
      return -unary(lex);
    }
    return primary(lex);
  }

  Expr primary(LineLexer& lex)
  {
    const Token& t = lex.peek();
    if (t.kind == Tok::integer) {
      Token tok = lex.take();
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
      if (ec != std::errc() || p != tok.text.data() + tok.text.size()) {
        lex.fail_at(tok, "malformed integer '" + tok.text + "'");
      }
      return integer(v);
    }
    if (t.kind == Tok::real) {
      Token tok = lex.take();
      double v = 0;
      auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
      if (ec != std::errc() || p != tok.text.data() + tok.text.size()) {
        lex.fail_at(tok, "malformed number '" + tok.text + "'");
      }
      return real(v);
    }
    if (lex.accept("(")) {
      Expr e = expression(lex);
      lex.expect(")");
      return e;
    }
    if (t.kind == Tok::ident) {
      std::string name = lex.take().text;
      if (name == "abs") {
        lex.expect("(");
        Expr e = expression(lex);
        lex.expect(")");
        return abs(e);
      }
      if (lex.accept("[")) {
        std::vector<Expr> indices;
        do {
          indices.push_back(expression(lex));
        } while (lex.accept(","));
        lex.expect("]");
        return read(name, std::move(indices));
      }
      if (arrays_.count(name)) {
        return read(name);
      }
      return var(name);
    }
    lex.fail("expected an expression");
  }

  std::string_view text_;
  LoopKernel kernel_;
  std::set<std::string> arrays_;
};

} // namespace

std::string format_real(double value)
{
  if (!std::isfinite(value)) {
    throw InvalidArgument("cannot format non-finite value");
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, end);
  if (out.find_first_of(".e") == std::string::npos) {
    out += ".0";
  }
  return out;
}

std::string to_text(const Expr& e)
{
  std::ostringstream os;
  print(os, e);
  return os.str();
}

std::string dump(const LoopKernel& kernel)
{
  std::ostringstream os;
  os << kTextFormatHeader << '\n';
  os << "kernel " << kernel.name << '\n';
  os << "params";
  for (const auto& p : kernel.parameters) {
    os << ' ' << p;
  }
  os << '\n';
  for (const auto& d : kernel.domains) {
    os << "domain " << d.name << " lower=(";
    print_list(os, d.lower);
    os << ") upper=(";
    print_list(os, d.upper);
    os << ") tag=";
    if (d.is_simd()) {
      os << "simd(" << d.simd_width() << ')';
    } else {
      os << "seq";
    }
    os << '\n';
  }
  for (const auto& a : kernel.arrays) {
    os << "array " << a.name << ' ' << to_string(a.kind) << ' ' << to_string(a.type) << " shape=(";
    for (std::size_t i = 0; i < a.shape.size(); ++i) {
      os << (i ? ", " : "");
      if (a.shape[i]) {
        os << *a.shape[i];
      } else {
        os << '?';
      }
    }
    os << ") strides=(";
    for (std::size_t i = 0; i < a.strides.size(); ++i) {
      os << (i ? ", " : "") << a.strides[i];
    }
    os << ") align=" << a.alignment;
    if (a.lane_expanded) {
      os << " lane";
    }
    if (a.kind == ArrayKind::constant) {
      os << " data=(";
      for (std::size_t i = 0; i < a.data.size(); ++i) {
        os << (i ? ", " : "") << format_real(a.data[i]);
      }
      os << ')';
    }
    os << '\n';
  }
  for (const auto& s : kernel.statements) {
    os << "stmt " << s.id << " within=(" << join_names(s.within) << ") deps=(" << join_names(s.depends_on)
       << ") : " << s.lhs.array;
    if (!s.lhs.indices.empty()) {
      os << '[';
      print_list(os, s.lhs.indices);
      os << ']';
    }
    os << (s.mode == AssignMode::increment ? " += " : " = ");
    print(os, s.rhs);
    os << '\n';
  }
  os << "end\n";
  return os.str();
}

LoopKernel parse(std::string_view text)
{
  return Parser(text).run();
}

} // namespace crossvec::ir
