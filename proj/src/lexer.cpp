#include "minikind/lexer.hpp"

#include <cctype>
#include <map>

namespace minikind {

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::IntLit: return "integer literal";
    case Tok::RealLit: return "real literal";
    case Tok::KwNode: return "'node'";
    case Tok::KwReturns: return "'returns'";
    case Tok::KwVar: return "'var'";
    case Tok::KwLet: return "'let'";
    case Tok::KwTel: return "'tel'";
    case Tok::KwBool: return "'bool'";
    case Tok::KwInt: return "'int'";
    case Tok::KwReal: return "'real'";
    case Tok::KwIf: return "'if'";
    case Tok::KwThen: return "'then'";
    case Tok::KwElse: return "'else'";
    case Tok::KwNot: return "'not'";
    case Tok::KwAnd: return "'and'";
    case Tok::KwOr: return "'or'";
    case Tok::KwXor: return "'xor'";
    case Tok::KwDiv: return "'div'";
    case Tok::KwMod: return "'mod'";
    case Tok::KwPre: return "'pre'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwAssert: return "'assert'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Eq: return "'='";
    case Tok::Neq: return "'<>'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Arrow: return "'->'";
    case Tok::Implies: return "'=>'";
    case Tok::PragmaProperty: return "'--%PROPERTY'";
    case Tok::PragmaMain: return "'--%MAIN'";
    case Tok::End: return "end of input";
  }
  return "?";
}

namespace {

const std::map<std::string, Tok>& keywords() {
  static const std::map<std::string, Tok> kw = {
      {"node", Tok::KwNode},   {"returns", Tok::KwReturns}, {"var", Tok::KwVar},
      {"let", Tok::KwLet},     {"tel", Tok::KwTel},         {"bool", Tok::KwBool},
      {"int", Tok::KwInt},     {"real", Tok::KwReal},       {"if", Tok::KwIf},
      {"then", Tok::KwThen},   {"else", Tok::KwElse},       {"not", Tok::KwNot},
      {"and", Tok::KwAnd},     {"or", Tok::KwOr},           {"xor", Tok::KwXor},
      {"div", Tok::KwDiv},     {"mod", Tok::KwMod},         {"pre", Tok::KwPre},
      {"true", Tok::KwTrue},   {"false", Tok::KwFalse},     {"assert", Tok::KwAssert},
  };
  return kw;
}

class Lexer {
 public:
  Lexer(const std::string& src, std::string file, LexOptions opts)
      : src_(src), file_(std::move(file)), opts_(opts) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments(out);
      if (eof()) break;
      out.push_back(next_token());
    }
    Token end;
    end.kind = Tok::End;
    end.span = here(0);
    out.push_back(end);
    return out;
  }

 private:
  bool eof() const { return pos_ >= src_.size(); }
  char cur() const { return src_[pos_]; }
  char peek(size_t off = 1) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    pos_++;
  }

  SourceSpan here(int len) const { return SourceSpan(file_, line_, col_, line_, col_ + len); }

  [[noreturn]] void fail(const std::string& msg) { throw LexError(here(1), msg); }

  void skip_space_and_comments(std::vector<Token>& out) {
    for (;;) {
      while (!eof() && std::isspace(static_cast<unsigned char>(cur()))) advance();
      if (!eof() && cur() == '-' && peek() == '-') {
        if (peek(2) == '%') {
          emit_pragma(out);
          continue;
        }
        while (!eof() && cur() != '\n') advance();
        continue;
      }
      return;
    }
  }

  void emit_pragma(std::vector<Token>& out) {
    SourceSpan start = here(0);
    advance();  // -
    advance();  // -
    advance();  // %
    std::string word;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '_')) {
      word += cur();
      advance();
    }
    Token t;
    t.span = SourceSpan(file_, start.line, start.col, line_, col_);
    if (word == "PROPERTY") {
      t.kind = Tok::PragmaProperty;
    } else if (word == "MAIN") {
      t.kind = Tok::PragmaMain;
    } else {
      throw LexError(t.span, "unknown pragma '--%" + word + "'");
    }
    t.text = "--%" + word;
    out.push_back(t);
  }

  bool ident_start(char c) const {
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return true;
    return opts_.flat_idents && c == '%';
  }
  bool ident_char(char c) const {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') return true;
    return opts_.flat_idents && (c == '.' || c == '%');
  }

  Token next_token() {
    SourceSpan start = here(0);
    char c = cur();

    if (ident_start(c)) {
      std::string word;
      while (!eof() && ident_char(cur())) {
        word += cur();
        advance();
      }
      Token t;
      t.span = SourceSpan(file_, start.line, start.col, line_, col_);
      auto it = keywords().find(word);
      if (it != keywords().end()) {
        t.kind = it->second;
      } else {
        t.kind = Tok::Ident;
      }
      t.text = word;
      return t;
    }

    if (std::isdigit(static_cast<unsigned char>(c))) return number();

    auto punct = [&](Tok k, int len, const char* text) {
      Token t;
      t.kind = k;
      t.text = text;
      for (int i = 0; i < len; i++) advance();
      t.span = SourceSpan(file_, start.line, start.col, line_, col_);
      return t;
    };

    switch (c) {
      case '(': return punct(Tok::LParen, 1, "(");
      case ')': return punct(Tok::RParen, 1, ")");
      case ':': return punct(Tok::Colon, 1, ":");
      case ';': return punct(Tok::Semi, 1, ";");
      case ',': return punct(Tok::Comma, 1, ",");
      case '+': return punct(Tok::Plus, 1, "+");
      case '*': return punct(Tok::Star, 1, "*");
      case '=':
        if (peek() == '>') return punct(Tok::Implies, 2, "=>");
        return punct(Tok::Eq, 1, "=");
      case '<':
        if (peek() == '>') return punct(Tok::Neq, 2, "<>");
        if (peek() == '=') return punct(Tok::Le, 2, "<=");
        return punct(Tok::Lt, 1, "<");
      case '>':
        if (peek() == '=') return punct(Tok::Ge, 2, ">=");
        return punct(Tok::Gt, 1, ">");
      case '-':
        if (peek() == '>') return punct(Tok::Arrow, 2, "->");
        return punct(Tok::Minus, 1, "-");
      default: fail(std::string("illegal character '") + c + "'");
    }
  }

  Token number() {
    SourceSpan start = here(0);
    std::string digits;
    while (!eof() && std::isdigit(static_cast<unsigned char>(cur()))) {
      digits += cur();
      advance();
    }
    // A real literal needs digits on both sides of the dot. In flat-ident
    // mode `.` never follows a number (names start with letters), so the
    // lookahead is unambiguous either way.
    if (!eof() && cur() == '.' && std::isdigit(static_cast<unsigned char>(peek()))) {
      advance();  // .
      std::string frac;
      while (!eof() && std::isdigit(static_cast<unsigned char>(cur()))) {
        frac += cur();
        advance();
      }
      Token t;
      t.kind = Tok::RealLit;
      t.span = SourceSpan(file_, start.line, start.col, line_, col_);
      t.text = digits + "." + frac;
      mpz_class num(digits + frac, 10);  // explicit base: default 0 reads "025" as octal
      mpz_class den = 1;
      for (size_t i = 0; i < frac.size(); i++) den *= 10;
      t.real_val = mpq_class(num, den);
      t.real_val.canonicalize();
      return t;
    }
    if (!eof() && std::isalpha(static_cast<unsigned char>(cur())))
      fail("malformed numeric literal");
    Token t;
    t.kind = Tok::IntLit;
    t.span = SourceSpan(file_, start.line, start.col, line_, col_);
    t.text = digits;
    t.int_val = mpz_class(digits, 10);
    return t;
  }

  const std::string& src_;
  std::string file_;
  LexOptions opts_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

}  // namespace

std::vector<Token> lex(const std::string& source, const std::string& filename,
                       const LexOptions& opts) {
  return Lexer(source, filename, opts).run();
}

}  // namespace minikind
