//! Recursive-descent parser for the concrete formula grammar.
//!
//! ```text
//! formula  := iff ;
//! iff      := imp ( "<->" imp )* ;
//! imp      := or ( "->" or )* ;            (* right-assoc *)
//! or       := and ( "|" and )* ;
//! and      := unary ( "&" unary )* ;
//! unary    := "!" unary | quant | atom | "(" formula ")" ;
//! quant    := ("forall"|"exists") var "." unary ;
//! atom     := name "(" var ( "," var )? ")" | var "=" var
//!           | var ("<=" | "<=0" | "<=1") var ;
//! ```
//!
//! Predicate names start with an upper-case letter. Names with a leading
//! underscore are also accepted; they are reserved for generated symbols.

use std::collections::HashMap;

use thiserror::Error;

use super::{Arity, Formula, OrderSym, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: variable `{name}` is not allowed, only x and y may occur")]
    ThirdVariable {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: predicate `{name}` used with arity {found}, earlier with arity {expected}")]
    ArityConflict {
        line: usize,
        column: usize,
        name: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    /// Predicate name.
    Name(String),
    /// Lower-case word: keyword or variable.
    Word(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Equals,
    Order(OrderSym),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) | Tok::Word(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DoubleArrow => "`<->`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Order(o) => format!("`{}`", o.token()),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let start_col = column;
        let (tok, len) = if c.is_ascii_uppercase() || c == '_' || c.is_ascii_lowercase() {
            let end = (i..chars.len())
                .find(|&j| !(chars[j].is_ascii_alphanumeric() || chars[j] == '_'))
                .unwrap_or(chars.len());
            let word: String = chars[i..end].iter().collect();
            let tok = if c.is_ascii_lowercase() {
                Tok::Word(word)
            } else {
                Tok::Name(word)
            };
            (tok, end - i)
        } else {
            let rest = |s: &str| chars[i..].iter().take(s.len()).copied().eq(s.chars());
            if rest("<->") {
                (Tok::DoubleArrow, 3)
            } else if rest("<=0") {
                (Tok::Order(OrderSym::Leq0), 3)
            } else if rest("<=1") {
                (Tok::Order(OrderSym::Leq1), 3)
            } else if rest("<=") {
                (Tok::Order(OrderSym::Leq), 2)
            } else if rest("->") {
                (Tok::Arrow, 2)
            } else {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '!' => Tok::Bang,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    '=' => Tok::Equals,
                    other => {
                        return Err(ParseError::Syntax {
                            line,
                            column,
                            message: format!("unexpected character `{other}`"),
                        })
                    }
                };
                (tok, 1)
            }
        };
        out.push(Spanned {
            tok,
            line,
            column: start_col,
        });
        i += len;
        column += len;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    arities: HashMap<String, usize>,
}

/// Parses a formula. Arity conflicts between uses of the same predicate
/// name are rejected here.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        arities: HashMap::new(),
    };
    let f = p.formula()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message,
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            )))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::DoubleArrow {
            self.next();
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.next();
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.next();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.next();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.next();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.next();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Word(w) if w == "forall" || w == "exists" => {
                self.next();
                let v = self.var()?;
                self.expect(Tok::Dot)?;
                let body = self.unary()?;
                Ok(if w == "forall" {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                })
            }
            Tok::Word(_) => {
                let a = self.var()?;
                let tok = self.peek().clone();
                match tok {
                    Tok::Equals => {
                        self.next();
                        Ok(Formula::Eq(a, self.var()?))
                    }
                    Tok::Order(o) => {
                        self.next();
                        Ok(Formula::Order(o, a, self.var()?))
                    }
                    other => Err(self.error(format!(
                        "expected `=` or an order symbol, found {}",
                        other.describe()
                    ))),
                }
            }
            Tok::Name(_) => self.predicate(),
            other => Err(self.error(format!("unexpected {}", other.describe()))),
        }
    }

    fn predicate(&mut self) -> Result<Formula, ParseError> {
        let head = self.next();
        let Tok::Name(name) = head.tok else {
            unreachable!("predicate() called on a non-name token")
        };
        self.expect(Tok::LParen)?;
        let a = self.var()?;
        let f = if *self.peek() == Tok::Comma {
            self.next();
            let b = self.var()?;
            Formula::Binary(name.clone(), a, b)
        } else {
            Formula::Unary(name.clone(), a)
        };
        self.expect(Tok::RParen)?;
        let found = match f {
            Formula::Unary(..) => Arity::Unary,
            _ => Arity::Binary,
        }
        .as_usize();
        match self.arities.get(&name) {
            Some(&expected) if expected != found => Err(ParseError::ArityConflict {
                line: head.line,
                column: head.column,
                name,
                expected,
                found,
            }),
            _ => {
                self.arities.insert(name, found);
                Ok(f)
            }
        }
    }

    fn var(&mut self) -> Result<Var, ParseError> {
        let t = self.toks[self.pos].clone();
        match &t.tok {
            Tok::Word(w) if w == "x" => {
                self.next();
                Ok(Var::X)
            }
            Tok::Word(w) if w == "y" => {
                self.next();
                Ok(Var::Y)
            }
            Tok::Word(w) if w != "forall" && w != "exists" => Err(ParseError::ThirdVariable {
                line: t.line,
                column: t.column,
                name: w.clone(),
            }),
            other => Err(self.error(format!("expected a variable, found {}", other.describe()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::render;

    #[test]
    fn tautology() {
        let f = parse("forall x. (P(x) | !P(x))").unwrap();
        let p = Formula::unary("P", Var::X);
        assert_eq!(
            f,
            Formula::forall(Var::X, Formula::or(p.clone(), Formula::not(p)))
        );
    }

    #[test]
    fn order_gadget() {
        let f = parse("exists x. (P(x) & forall y. (y <= x))").unwrap();
        let expected = Formula::exists(
            Var::X,
            Formula::and(
                Formula::unary("P", Var::X),
                Formula::forall(Var::Y, Formula::Order(OrderSym::Leq, Var::Y, Var::X)),
            ),
        );
        assert_eq!(f, expected);
        assert_eq!(render(&f), "exists x. (P(x) & forall y. (y <= x))");
    }

    #[test]
    fn third_variable_is_rejected() {
        let err = parse("forall z. P(z)").unwrap_err();
        assert_eq!(
            err,
            ParseError::ThirdVariable {
                line: 1,
                column: 8,
                name: "z".into()
            }
        );
        assert!(matches!(
            parse("P(x) & R(x,w)"),
            Err(ParseError::ThirdVariable { .. })
        ));
    }

    #[test]
    fn arity_conflict_is_rejected() {
        let err = parse("P(x) &\n  P(x,y)").unwrap_err();
        assert_eq!(
            err,
            ParseError::ArityConflict {
                line: 2,
                column: 3,
                name: "P".into(),
                expected: 1,
                found: 2
            }
        );
    }

    #[test]
    fn syntax_error_positions() {
        match parse("forall x. (P(x) |\n   & Q(x))").unwrap_err() {
            ParseError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 4)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("P(x"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x < y"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse(""), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        let p = || Formula::unary("P", Var::X);
        let q = || Formula::unary("Q", Var::X);
        let r = || Formula::unary("S", Var::X);
        assert_eq!(
            parse("P(x) | Q(x) & S(x)").unwrap(),
            Formula::or(p(), Formula::and(q(), r()))
        );
        assert_eq!(
            parse("P(x) -> Q(x) -> S(x)").unwrap(),
            Formula::implies(p(), Formula::implies(q(), r()))
        );
        assert_eq!(
            parse("P(x) <-> Q(x) <-> S(x)").unwrap(),
            Formula::iff(Formula::iff(p(), q()), r())
        );
        assert_eq!(
            parse("!P(x) & Q(x)").unwrap(),
            Formula::and(Formula::not(p()), q())
        );
        // quantifier bodies are unary
        assert_eq!(
            parse("forall x. P(x) & Q(x)").unwrap(),
            Formula::and(Formula::forall(Var::X, p()), q())
        );
    }

    #[test]
    fn indexed_order_tokens() {
        assert_eq!(
            parse("x <=0 y").unwrap(),
            Formula::Order(OrderSym::Leq0, Var::X, Var::Y)
        );
        assert_eq!(
            parse("x<=1y").unwrap(),
            Formula::Order(OrderSym::Leq1, Var::X, Var::Y)
        );
    }

    #[test]
    fn generated_names_parse() {
        assert_eq!(parse("_S0(x)").unwrap(), Formula::unary("_S0", Var::X));
    }
}
