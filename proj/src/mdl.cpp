#include "mfr/mdl.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace mfr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

enum class Tok { Ident, Int, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int column = 0;  // 1-based
};

struct LineError {
  ParseIssueKind kind;
  int column;
  std::string message;
};

class Lexer {
 public:
  explicit Lexer(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
      char c = line[i];
      if (is_space(c)) {
        ++i;
        continue;
      }
      int col = static_cast<int>(i) + 1;
      if (c == '#') break;
      if (ident_start(c)) {
        std::size_t j = i;
        while (j < line.size() && ident_char(line[j])) ++j;
        tokens_.push_back({Tok::Ident, std::string(line.substr(i, j - i)), col});
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        tokens_.push_back({Tok::Int, std::string(line.substr(i, j - i)), col});
        i = j;
      } else if (c == '"') {
        std::string s;
        std::size_t j = i + 1;
        bool closed = false;
        while (j < line.size()) {
          if (line[j] == '\\' && j + 1 < line.size()) {
            char e = line[j + 1];
            s += e == 'n' ? '\n' : e;
            j += 2;
          } else if (line[j] == '"') {
            closed = true;
            ++j;
            break;
          } else {
            s += line[j++];
          }
        }
        if (!closed) {
          error_ = LineError{ParseIssueKind::Syntax, col, "unterminated string"};
          return;
        }
        tokens_.push_back({Tok::String, std::move(s), col});
        i = j;
      } else {
        static const char* two[] = {":=", "==", "!=", "<=", ">=", ".."};
        std::string p;
        for (const char* t : two)
          if (line.substr(i, 2) == t) p = t;
        if (p.empty()) {
          if (std::string_view("(),:={}[]<>+-").find(c) == std::string_view::npos) {
            error_ = LineError{ParseIssueKind::Syntax, col, std::string("unexpected character '") + c + "'"};
            return;
          }
          p = std::string(1, c);
        }
        tokens_.push_back({Tok::Punct, p, col});
        i += p.size();
      }
    }
    end_column_ = static_cast<int>(line.size()) + 1;
  }

  const std::optional<LineError>& error() const { return error_; }
  bool empty() const { return tokens_.empty(); }

  const Token& peek(std::size_t ahead = 0) const {
    static const Token end{Tok::End, "", 0};
    if (pos_ + ahead < tokens_.size()) return tokens_[pos_ + ahead];
    return end;
  }
  int column() const { return pos_ < tokens_.size() ? tokens_[pos_].column : end_column_; }
  bool at_end() const { return pos_ >= tokens_.size(); }
  Token next() {
    Token t = peek();
    if (pos_ < tokens_.size()) ++pos_;
    return t;
  }
  bool accept(std::string_view punct) {
    if (peek().kind == Tok::Punct && peek().text == punct) {
      ++pos_;
      return true;
    }
    return false;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int end_column_ = 1;
  std::optional<LineError> error_;
};

class LineParser {
 public:
  explicit LineParser(Lexer& lex) : lex_(lex) {}

  [[noreturn]] void fail(ParseIssueKind kind, std::string msg) {
    throw LineError{kind, lex_.column(), std::move(msg)};
  }
  [[noreturn]] void fail_at(ParseIssueKind kind, int col, std::string msg) {
    throw LineError{kind, col, std::move(msg)};
  }

  void expect(std::string_view punct) {
    if (!lex_.accept(punct)) fail(ParseIssueKind::Syntax, "expected '" + std::string(punct) + "'" + found());
  }

  std::string found() const {
    const Token& t = lex_.peek();
    if (t.kind == Tok::End) return ", found end of line";
    return ", found '" + t.text + "'";
  }

  std::string identifier(const char* what) {
    if (lex_.peek().kind != Tok::Ident) fail(ParseIssueKind::Syntax, std::string("expected ") + what + found());
    return lex_.next().text;
  }

  void end() {
    if (!lex_.at_end()) fail(ParseIssueKind::Syntax, "unexpected trailing input '" + lex_.peek().text + "'");
  }

  std::int64_t integer(ParseIssueKind kind = ParseIssueKind::Syntax) {
    bool neg = lex_.accept("-");
    if (lex_.peek().kind != Tok::Int) fail(kind, "expected integer" + found());
    Token t = lex_.next();
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) fail_at(kind, t.column, "integer out of range: " + t.text);
    return neg ? -v : v;
  }

  // ( id, id, ... ): optional when `optional_parens`.
  std::vector<std::string> id_list_parens(const char* what, ParseIssueKind kind) {
    std::vector<std::string> out;
    expect("(");
    if (lex_.accept(")")) return out;
    while (true) {
      if (lex_.peek().kind != Tok::Ident) fail(kind, std::string("expected ") + what + found());
      out.push_back(lex_.next().text);
      if (lex_.accept(")")) return out;
      if (!lex_.accept(",")) fail(kind, "expected ',' or ')'" + found());
    }
  }

  Value literal() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Ident) {
      std::string s = lex_.next().text;
      if (s == "true") return true;
      if (s == "false") return false;
      return Symbol{s};
    }
    if (t.kind == Tok::Int || (t.kind == Tok::Punct && t.text == "-")) return integer();
    fail(ParseIssueKind::MalformedTerm, "expected literal value" + found());
  }

  Term term() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Ident) {
      std::string name = lex_.next().text;
      if (lex_.peek().kind == Tok::Punct && lex_.peek().text == "(")
        return VarRef{name, id_list_parens("identifier argument", ParseIssueKind::MalformedTerm)};
      if (name == "true") return BoolLit{true};
      if (name == "false") return BoolLit{false};
      return NameRef{name};
    }
    if (t.kind == Tok::Int || (t.kind == Tok::Punct && t.text == "-"))
      return IntLit{integer(ParseIssueKind::MalformedTerm)};
    fail(ParseIssueKind::MalformedTerm, "expected term" + found());
  }

  Comparison comparison(int line) {
    Comparison c;
    c.lhs = term();
    const Token& t = lex_.peek();
    static const std::pair<const char*, CmpOp> ops[] = {{"==", CmpOp::Eq}, {"!=", CmpOp::Ne}, {"<=", CmpOp::Le},
                                                        {">=", CmpOp::Ge}, {"<", CmpOp::Lt},  {">", CmpOp::Gt}};
    bool matched = false;
    if (t.kind == Tok::Punct)
      for (const auto& [s, op] : ops)
        if (t.text == s) {
          c.op = op;
          matched = true;
        }
    if (!matched) fail(ParseIssueKind::Syntax, "expected comparison operator" + found());
    lex_.next();
    c.rhs = term();
    end();
    c.line.value = line;
    return c;
  }

  Domain domain() {
    if (lex_.accept("{")) {
      EnumDomain e;
      if (lex_.accept("}")) return e;
      while (true) {
        e.members.push_back(identifier("enumeration member"));
        if (lex_.accept("}")) return e;
        if (!lex_.accept(",")) fail(ParseIssueKind::Syntax, "expected ',' or '}'" + found());
      }
    }
    std::string kw = identifier("domain (bool, {..}, int[lo..hi])");
    if (kw == "bool") return BoolDomain{};
    if (kw == "int") {
      IntDomain r;
      expect("[");
      r.lo = integer();
      expect("..");
      r.hi = integer();
      expect("]");
      return r;
    }
    fail(ParseIssueKind::Syntax, "unknown domain '" + kw + "'");
  }

  Effect effect(int line) {
    Effect e;
    e.line.value = line;
    e.target.name = identifier("effect target");
    if (lex_.peek().kind == Tok::Punct && lex_.peek().text == "(")
      e.target.args = id_list_parens("identifier argument", ParseIssueKind::MalformedTerm);
    expect(":=");
    Term rhs = term();
    if (lex_.peek().kind == Tok::Punct && (lex_.peek().text == "+" || lex_.peek().text == "-")) {
      bool minus = lex_.next().text == "-";
      if (lex_.peek().kind != Tok::Int) fail(ParseIssueKind::MalformedTerm, "expected integer delta" + found());
      std::int64_t mag = integer(ParseIssueKind::MalformedTerm);
      e.update = DeltaUpdate{std::move(rhs), minus ? -mag : mag};
    } else {
      e.update = AssignUpdate{std::move(rhs)};
    }
    end();
    return e;
  }

 private:
  Lexer& lex_;
};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_space(s.front()) || s.front() == '\n')) s.remove_prefix(1);
  while (!s.empty() && (is_space(s.back()) || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string domain_text(const Domain& d) {
  return std::visit(overloaded{[](const BoolDomain&) -> std::string { return "bool"; },
                               [](const EnumDomain& e) { return "{" + join(e.members) + "}"; },
                               [](const IntDomain& r) {
                                 return "int[" + std::to_string(r.lo) + ".." + std::to_string(r.hi) + "]";
                               }},
                    d);
}

std::string target_text(const VarRef& r) {
  return r.args.empty() ? r.name : r.name + "(" + join(r.args) + ")";
}

}  // namespace

const char* to_string(ParseIssueKind k) {
  switch (k) {
    case ParseIssueKind::Syntax:
      return "syntax";
    case ParseIssueKind::UnknownKeyword:
      return "unknown-keyword";
    case ParseIssueKind::MalformedTerm:
      return "malformed-term";
  }
  return "?";
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !ident_start(s.front())) return false;
  for (char c : s)
    if (!ident_char(c)) return false;
  return true;
}

ParseResult parse_model(std::string_view text) {
  ProblemModel model;
  std::vector<ParseIssue> issues;
  bool have_name = false;
  ActionSchema* current = nullptr;

  auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    int line_no = static_cast<int>(li) + 1;
    Lexer lex(lines[li]);
    if (lex.error()) {
      issues.push_back({line_no, lex.error()->column, lex.error()->kind, lex.error()->message});
      continue;
    }
    if (lex.empty()) continue;
    LineParser p(lex);
    try {
      const Token& head = lex.peek();
      if (head.kind != Tok::Ident) p.fail(ParseIssueKind::Syntax, "expected a declaration keyword" + p.found());
      std::string kw = lex.next().text;
      bool action_body = kw == "pre" || kw == "eff";
      if (!action_body) current = nullptr;

      if (kw == "model") {
        if (have_name) p.fail_at(ParseIssueKind::Syntax, head.column, "duplicate model line");
        if (lex.peek().kind != Tok::String) p.fail(ParseIssueKind::Syntax, "expected quoted model name" + p.found());
        model.name = lex.next().text;
        p.end();
        have_name = true;
      } else if (kw == "entity") {
        EntitySort sort;
        sort.line.value = line_no;
        sort.name = p.identifier("sort name");
        p.expect(":");
        while (true) {
          sort.members.push_back(p.identifier("entity name"));
          if (lex.at_end()) break;
          p.expect(",");
        }
        model.sorts.push_back(std::move(sort));
      } else if (kw == "var") {
        VariableDecl v;
        v.line.value = line_no;
        v.name = p.identifier("variable name");
        if (lex.peek().kind == Tok::Punct && lex.peek().text == "(")
          v.params = p.id_list_parens("sort name", ParseIssueKind::Syntax);
        p.expect(":");
        v.domain = p.domain();
        p.expect("=");
        v.initial = p.literal();
        p.end();
        model.variables.push_back(std::move(v));
      } else if (kw == "init") {
        InitOverride init;
        init.line.value = line_no;
        init.variable = p.identifier("variable name");
        if (lex.peek().kind == Tok::Punct && lex.peek().text == "(")
          init.args = p.id_list_parens("entity name", ParseIssueKind::MalformedTerm);
        p.expect("=");
        init.value = p.literal();
        p.end();
        model.inits.push_back(std::move(init));
      } else if (kw == "action") {
        ActionSchema a;
        a.line.value = line_no;
        a.name = p.identifier("action name");
        if (lex.accept("(") && !lex.accept(")")) {
          while (true) {
            Parameter param;
            param.name = p.identifier("parameter name");
            p.expect(":");
            param.sort = p.identifier("parameter sort");
            a.params.push_back(std::move(param));
            if (lex.accept(")")) break;
            p.expect(",");
          }
        }
        p.end();
        model.actions.push_back(std::move(a));
        current = &model.actions.back();
      } else if (kw == "pre" || kw == "eff") {
        if (!current) p.fail_at(ParseIssueKind::Syntax, head.column, "'" + kw + "' outside an action block");
        if (kw == "pre")
          current->preconditions.push_back(p.comparison(line_no));
        else
          current->effects.push_back(p.effect(line_no));
      } else if (kw == "constraint") {
        if (lex.peek().kind != Tok::Ident || lex.peek().text != "always")
          p.fail(ParseIssueKind::Syntax, "expected 'always'" + p.found());
        lex.next();
        model.constraints.push_back(p.comparison(line_no));
      } else if (kw == "goal") {
        model.goal.push_back(p.comparison(line_no));
      } else {
        p.fail_at(ParseIssueKind::UnknownKeyword, head.column, "unknown keyword '" + kw + "'");
      }
    } catch (const LineError& e) {
      issues.push_back({line_no, e.column, e.kind, e.message});
    }
  }
  if (!issues.empty()) return ParseResult(std::move(issues));
  return ParseResult(std::move(model));
}

std::string serialize_model(const ProblemModel& model) {
  std::ostringstream out;
  out << "model " << quote(model.name) << "\n";
  for (const auto& s : model.sorts) out << "entity " << s.name << ": " << join(s.members) << "\n";
  for (const auto& v : model.variables) {
    out << "var " << v.name;
    if (!v.params.empty()) out << "(" << join(v.params) << ")";
    out << ": " << domain_text(v.domain) << " = " << to_string(v.initial) << "\n";
  }
  for (const auto& i : model.inits) {
    out << "init " << i.variable;
    if (!i.args.empty()) out << "(" << join(i.args) << ")";
    out << " = " << to_string(i.value) << "\n";
  }
  for (const auto& a : model.actions) {
    out << "action " << a.name << "(";
    for (std::size_t k = 0; k < a.params.size(); ++k) {
      if (k) out << ", ";
      out << a.params[k].name << ": " << a.params[k].sort;
    }
    out << ")\n";
    for (const auto& c : a.preconditions) out << "  pre " << to_string(c) << "\n";
    for (const auto& e : a.effects) {
      out << "  eff " << target_text(e.target) << " := ";
      std::visit(overloaded{[&](const AssignUpdate& u) { out << to_string(u.value); },
                            [&](const DeltaUpdate& u) {
                              out << to_string(u.source) << (u.delta < 0 ? " - " : " + ")
                                  << (u.delta < 0 ? -u.delta : u.delta);
                            }},
                 e.update);
      out << "\n";
    }
  }
  for (const auto& c : model.constraints) out << "constraint always " << to_string(c) << "\n";
  for (const auto& g : model.goal) out << "goal " << to_string(g) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Plans

std::optional<ParsedStep> parse_invocation(std::string_view text) {
  Lexer lex(text);
  if (lex.error() || lex.peek().kind != Tok::Ident) return std::nullopt;
  ParsedStep step;
  step.action = lex.next().text;
  if (!lex.accept("(")) return std::nullopt;
  if (!lex.accept(")")) {
    while (true) {
      if (lex.peek().kind != Tok::Ident) return std::nullopt;
      step.args.push_back(lex.next().text);
      if (lex.accept(")")) break;
      if (!lex.accept(",")) return std::nullopt;
    }
  }
  if (!lex.at_end()) return std::nullopt;
  return step;
}

namespace {

std::optional<ParsedStep> parse_step_line(std::string_view line) {
  line = trim(line);
  constexpr std::string_view kStep = "step";
  if (line.substr(0, kStep.size()) != kStep) return std::nullopt;
  line.remove_prefix(kStep.size());
  if (line.empty() || !is_space(line.front())) return std::nullopt;
  line = trim(line);
  std::size_t digits = 0;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
  if (digits == 0) return std::nullopt;
  line.remove_prefix(digits);
  line = trim(line);
  if (line.empty() || line.front() != ':') return std::nullopt;
  line.remove_prefix(1);
  // `#` has no comment meaning inside a plan line.
  if (line.find('#') != std::string_view::npos) return std::nullopt;
  return parse_invocation(line);
}

}  // namespace

Plan parse_plan(std::string_view text) {
  Plan plan;
  int index = 0;
  for (std::string_view line : split_lines(text)) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    PlanStep step;
    step.index = ++index;
    step.raw = std::string(line);
    step.parsed = parse_step_line(line);
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

std::string format_plan(const Plan& plan) {
  std::string out;
  for (const auto& s : plan.steps) {
    if (s.parsed)
      out += "step " + std::to_string(s.index) + ": " + s.parsed->action + "(" + join(s.parsed->args) + ")";
    else
      out += s.raw;
    out += "\n";
  }
  return out;
}

Plan make_plan(const std::vector<ParsedStep>& steps) {
  Plan plan;
  for (const auto& s : steps) {
    PlanStep step;
    step.index = static_cast<int>(plan.steps.size()) + 1;
    step.raw = "step " + std::to_string(step.index) + ": " + s.action + "(" + join(s.args) + ")";
    step.parsed = s;
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Fenced block extraction

ExtractedArtifacts extract_blocks(std::string_view text) {
  ExtractedArtifacts out;
  std::size_t pos = 0;
  auto line_end = [&](std::size_t from) {
    std::size_t nl = text.find('\n', from);
    return nl == std::string_view::npos ? text.size() : nl + 1;
  };
  auto fence_tag = [&](std::string_view line) -> std::optional<std::string_view> {
    std::string_view t = trim(line);
    if (t.substr(0, 3) != "```") return std::nullopt;
    return trim(t.substr(3));
  };

  while (pos < text.size()) {
    std::size_t end = line_end(pos);
    std::string_view line = text.substr(pos, end - pos);
    auto tag = fence_tag(line);
    if (!tag || (*tag != "mdl" && *tag != "plan")) {
      if (tag) {
        // Foreign fence: copy through to its closing fence verbatim.
        std::size_t p = end;
        out.residue.append(line);
        while (p < text.size()) {
          std::size_t e = line_end(p);
          std::string_view l = text.substr(p, e - p);
          out.residue.append(l);
          p = e;
          if (auto t = fence_tag(l); t && t->empty()) break;
        }
        pos = p;
        continue;
      }
      out.residue.append(line);
      pos = end;
      continue;
    }
    std::size_t body_start = end;
    std::size_t p = body_start;
    std::size_t body_end = text.size();
    std::size_t after = text.size();
    while (p < text.size()) {
      std::size_t e = line_end(p);
      if (auto t = fence_tag(text.substr(p, e - p)); t && t->empty()) {
        body_end = p;
        after = e;
        break;
      }
      p = e;
    }
    std::string body(text.substr(body_start, body_end - body_start));
    auto& slot = *tag == "mdl" ? out.model_text : out.plan_text;
    if (slot) out.residue += *slot;  // superseded by a later block
    slot = std::move(body);
    pos = after;
  }
  return out;
}

}  // namespace mfr
