use super::ast::Span;
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Float(f64),
    /// Number immediately followed by `i`, e.g. `0.5i`.
    Imag(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Lt,
    Gt,
    EqEq,
    Eq,
    Semi,
    Comma,
    Plus,
    Minus,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Float(v) => format!("`{v:?}`"),
            Tok::Imag(v) => format!("`{v:?}i`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), span));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut is_float = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            if i < chars.len() && chars[i] == '.' {
                is_float = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_float = true;
                    while i < j {
                        bump!();
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !chars.get(i + 1).is_some_and(|d| d.is_ascii_alphanumeric() || *d == '_');
            if imaginary {
                bump!();
                let v: f64 = text.parse().map_err(|_| SyntaxError::new(span, format!("bad number `{text}`")))?;
                out.push((Tok::Imag(v), span));
            } else if is_float {
                let v: f64 = text.parse().map_err(|_| SyntaxError::new(span, format!("bad number `{text}`")))?;
                out.push((Tok::Float(v), span));
            } else {
                let v: u64 = text
                    .parse()
                    .map_err(|_| SyntaxError::new(span, format!("integer `{text}` out of range")))?;
                out.push((Tok::Int(v), span));
            }
            continue;
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '=' => {
                if chars.get(i + 1) == Some(&'=') {
                    bump!();
                    Tok::EqEq
                } else {
                    Tok::Eq
                }
            }
            other => return Err(SyntaxError::new(span, format!("unexpected character `{other}`"))),
        };
        bump!();
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span::new(line, col)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn numbers() {
        assert_eq!(
            toks("1 2.5 0.5i 1e-3 3e2i i"),
            vec![
                Tok::Int(1),
                Tok::Float(2.5),
                Tok::Imag(0.5),
                Tok::Float(1e-3),
                Tok::Imag(300.0),
                Tok::Ident("i".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_operators() {
        assert_eq!(
            toks("while<3> (q == 2) # trailing\n{"),
            vec![
                Tok::Ident("while".into()),
                Tok::Lt,
                Tok::Int(3),
                Tok::Gt,
                Tok::LParen,
                Tok::Ident("q".into()),
                Tok::EqEq,
                Tok::Int(2),
                Tok::RParen,
                Tok::LBrace,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions() {
        let t = tokenize("qubit q;\n  skip;").unwrap();
        assert_eq!((t[3].1.line, t[3].1.col), (2, 3));
    }

    #[test]
    fn stray_character() {
        let err = tokenize("qubit q;\n$").unwrap_err();
        assert_eq!((err.line, err.col), (2, 1));
    }
}
