use num_complex::Complex64;

use super::ast::{Control, Decl, Guard, Program, Span, Stmt, VarKind};
use super::lexer::{tokenize, Tok};
use super::SyntaxError;
use crate::gates::GateKind;
use crate::linalg::CMatrix;

pub const KEYWORDS: &[&str] =
    &["qubit", "uint", "skip", "ctrl", "nctrl", "if", "while", "x", "h", "z", "cx", "inc", "dec", "u"];

/// Syntax-only parse; no name resolution or arity checks.
pub fn parse_syntax(src: &str) -> Result<Program, SyntaxError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    p.program()
}

struct Parser {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn next(&mut self) -> (Tok, Span) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::new(self.span(), msg))
    }

    fn expect(&mut self, want: Tok) -> Result<Span, SyntaxError> {
        if *self.peek() == want {
            Ok(self.next().1)
        } else {
            self.error(format!("expected {}, found {}", want.describe(), self.peek().describe()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            Tok::Ident(s) => self.error(format!("`{s}` is a keyword and cannot name a variable")),
            other => self.error(format!("expected identifier, found {}", other.describe())),
        }
    }

    fn int(&mut self) -> Result<u64, SyntaxError> {
        match *self.peek() {
            Tok::Int(v) => {
                self.next();
                Ok(v)
            }
            ref other => self.error(format!("expected integer, found {}", other.describe())),
        }
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut decls = Vec::new();
        while self.is_keyword("qubit") || self.is_keyword("uint") {
            decls.push(self.decl()?);
        }
        let mut stmts = Vec::new();
        while *self.peek() != Tok::Eof {
            stmts.push(self.stmt()?);
        }
        if stmts.is_empty() {
            return self.error("program has no statements");
        }
        Ok(Program { decls, body: Stmt::seq(stmts) })
    }

    fn decl(&mut self) -> Result<Decl, SyntaxError> {
        let span = self.span();
        let (kind, width) = if self.is_keyword("qubit") {
            self.next();
            (VarKind::Qubit, 1)
        } else {
            self.next();
            self.expect(Tok::Lt)?;
            let w = self.int()?;
            self.expect(Tok::Gt)?;
            let w = u32::try_from(w).map_err(|_| SyntaxError::new(span, "register width out of range"))?;
            (VarKind::Uint, w)
        };
        let name = self.ident()?;
        let init = if *self.peek() == Tok::Eq {
            self.next();
            self.int()?
        } else {
            0
        };
        self.expect(Tok::Semi)?;
        Ok(Decl { name, kind, width, init, span })
    }

    fn block(&mut self) -> Result<Stmt, SyntaxError> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.error("unclosed block");
            }
            stmts.push(self.stmt()?);
        }
        if stmts.is_empty() {
            return self.error("empty block");
        }
        self.next();
        Ok(Stmt::seq(stmts))
    }

    fn guard(&mut self) -> Result<Guard, SyntaxError> {
        if *self.peek() != Tok::LParen {
            return Ok(Guard::Qubit(self.ident()?));
        }
        self.next();
        let var = self.ident()?;
        let guard = match self.next() {
            (Tok::Gt, _) => match self.next() {
                (Tok::Int(0), _) => Guard::GtZero(var),
                (_, span) => return Err(SyntaxError::new(span, "only `> 0` comparisons are supported")),
            },
            (Tok::EqEq, _) => Guard::EqConst(var, self.int()?),
            (other, span) => {
                return Err(SyntaxError::new(span, format!("expected `>` or `==`, found {}", other.describe())))
            }
        };
        self.expect(Tok::RParen)?;
        Ok(guard)
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let span = self.span();
        let word = match self.peek() {
            Tok::Ident(s) => s.clone(),
            other => return self.error(format!("expected statement, found {}", other.describe())),
        };
        match word.as_str() {
            "skip" => {
                self.next();
                self.expect(Tok::Semi)?;
                Ok(Stmt::Skip)
            }
            "x" | "h" | "z" | "cx" | "inc" | "dec" | "u" => {
                self.next();
                let gate = match word.as_str() {
                    "x" => GateKind::X,
                    "h" => GateKind::H,
                    "z" => GateKind::Z,
                    "cx" => GateKind::CX,
                    "inc" => GateKind::Inc,
                    "dec" => GateKind::Dec,
                    _ => GateKind::Custom(self.matrix()?),
                };
                let mut operands = vec![self.ident()?];
                while *self.peek() != Tok::Semi {
                    operands.push(self.ident()?);
                }
                self.next();
                Ok(Stmt::Apply { gate, operands, controls: Vec::new(), span })
            }
            "ctrl" | "nctrl" => {
                self.next();
                let var = self.ident()?;
                let body = self.block()?;
                push_control(body, &Control { var, positive: word == "ctrl" })
                    .map_err(|msg| SyntaxError::new(span, msg))
            }
            "if" => {
                self.next();
                let guard = self.guard()?;
                let body = self.block()?;
                Ok(Stmt::If { guard, body: Box::new(body), span })
            }
            "while" => {
                self.next();
                let bound = if *self.peek() == Tok::Lt {
                    self.next();
                    let k = self.int()?;
                    self.expect(Tok::Gt)?;
                    Some(usize::try_from(k).map_err(|_| SyntaxError::new(span, "loop bound out of range"))?)
                } else {
                    None
                };
                let guard = self.guard()?;
                let body = Box::new(self.block()?);
                Ok(match bound {
                    Some(bound) => Stmt::BoundedWhile { bound, guard, body, span },
                    None => Stmt::While { guard, body, span },
                })
            }
            other => self.error(format!("unknown statement `{other}`")),
        }
    }

    fn matrix(&mut self) -> Result<CMatrix, SyntaxError> {
        let span = self.span();
        self.expect(Tok::LBracket)?;
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        loop {
            self.expect(Tok::LBracket)?;
            let mut row = vec![self.complex()?];
            while *self.peek() == Tok::Comma {
                self.next();
                row.push(self.complex()?);
            }
            self.expect(Tok::RBracket)?;
            rows.push(row);
            if *self.peek() == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::RBracket)?;
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(SyntaxError::new(span, "matrix rows have different lengths"));
        }
        let flat: Vec<Complex64> = rows.iter().flatten().copied().collect();
        Ok(CMatrix::from_row_slice(rows.len(), cols, &flat))
    }

    /// `a`, `bi`, `a+bi`, `a-bi`, with an optional leading sign.
    fn complex(&mut self) -> Result<Complex64, SyntaxError> {
        let first_neg = self.sign();
        let (mut re, mut im) = (0.0, 0.0);
        let first_is_real = match self.next() {
            (Tok::Int(v), _) => {
                re = v as f64;
                true
            }
            (Tok::Float(v), _) => {
                re = v;
                true
            }
            (Tok::Imag(v), _) => {
                im = v;
                false
            }
            (Tok::Ident(s), _) if s == "i" => {
                im = 1.0;
                false
            }
            (other, span) => return Err(SyntaxError::new(span, format!("expected number, found {}", other.describe()))),
        };
        if first_neg {
            re = -re;
            im = -im;
        }
        let imag_follows = matches!(self.peek(), Tok::Plus | Tok::Minus)
            && matches!(self.peek_at(1), Tok::Imag(_) | Tok::Ident(_));
        if first_is_real && imag_follows {
            let neg = self.sign();
            im = match self.next() {
                (Tok::Imag(v), _) => v,
                (Tok::Ident(s), _) if s == "i" => 1.0,
                (other, span) => {
                    return Err(SyntaxError::new(span, format!("expected imaginary part, found {}", other.describe())))
                }
            };
            if neg {
                im = -im;
            }
        }
        Ok(Complex64::new(re, im))
    }

    fn sign(&mut self) -> bool {
        match self.peek() {
            Tok::Minus => {
                self.next();
                true
            }
            Tok::Plus => {
                self.next();
                false
            }
            _ => false,
        }
    }
}

fn push_control(stmt: Stmt, control: &Control) -> Result<Stmt, String> {
    match stmt {
        Stmt::Skip => Ok(Stmt::Skip),
        Stmt::Apply { gate, operands, mut controls, span } => {
            controls.insert(0, control.clone());
            Ok(Stmt::Apply { gate, operands, controls, span })
        }
        Stmt::Seq(a, b) => Ok(Stmt::Seq(Box::new(push_control(*a, control)?), Box::new(push_control(*b, control)?))),
        _ => Err("only gate applications and skip may appear inside a ctrl/nctrl block".into()),
    }
}
