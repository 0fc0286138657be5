//! Tokenizer for the Solidity subset.

use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Arrow,
    Assign,
    AddAssign,
    SubAssign,
    OrOr,
    AndAnd,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    StarStar,
    Slash,
    Percent,
    Bang,
    PlusPlus,
    MinusMinus,
    /// Operators the subset carries through lexing but gives no semantics
    /// (bitwise, shifts, ternary parts); statements using them go opaque.
    Other(char),
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub fn lex(file: usize, source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr) => {
            tokens.push(Token {
                tok: $tok,
                line: $line,
                col: $col,
            })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |i: &mut usize, line: &mut u32, col: &mut u32, by: usize| {
            for k in 0..by {
                if chars[*i + k] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
            }
            *i += by;
        };

        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        // comments
        if c == '/' && i + 1 < chars.len() {
            if chars[i + 1] == '/' {
                while i < chars.len() && chars[i] != '\n' {
                    advance(&mut i, &mut line, &mut col, 1);
                }
                continue;
            }
            if chars[i + 1] == '*' {
                advance(&mut i, &mut line, &mut col, 2);
                while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                    advance(&mut i, &mut line, &mut col, 1);
                }
                if i + 1 >= chars.len() {
                    return Err(FrontendError::Parse {
                        file,
                        line: tline,
                        col: tcol,
                        message: "unterminated block comment".into(),
                    });
                }
                advance(&mut i, &mut line, &mut col, 2);
                continue;
            }
        }
        if c == '"' || c == '\'' {
            let quote = c;
            advance(&mut i, &mut line, &mut col, 1);
            let mut s = String::new();
            while i < chars.len() && chars[i] != quote {
                if chars[i] == '\\' && i + 1 < chars.len() {
                    s.push(chars[i]);
                    s.push(chars[i + 1]);
                    advance(&mut i, &mut line, &mut col, 2);
                } else {
                    s.push(chars[i]);
                    advance(&mut i, &mut line, &mut col, 1);
                }
            }
            if i >= chars.len() {
                return Err(FrontendError::Parse {
                    file,
                    line: tline,
                    col: tcol,
                    message: "unterminated string literal".into(),
                });
            }
            advance(&mut i, &mut line, &mut col, 1);
            push!(Tok::Str(s), tline, tcol);
            continue;
        }
        if c.is_ascii_digit() {
            let mut raw = String::new();
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.')
            {
                raw.push(chars[i]);
                advance(&mut i, &mut line, &mut col, 1);
            }
            let normalized = normalize_number(&raw).ok_or(FrontendError::Parse {
                file,
                line: tline,
                col: tcol,
                message: format!("malformed number literal `{raw}`"),
            })?;
            push!(Tok::Number(normalized), tline, tcol);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let mut name = String::new();
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$')
            {
                name.push(chars[i]);
                advance(&mut i, &mut line, &mut col, 1);
            }
            push!(Tok::Ident(name), tline, tcol);
            continue;
        }

        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let (tok, len) = match two.as_str() {
            "=>" => (Tok::Arrow, 2),
            "==" => (Tok::EqEq, 2),
            "!=" => (Tok::NotEq, 2),
            "<=" => (Tok::Le, 2),
            ">=" => (Tok::Ge, 2),
            "&&" => (Tok::AndAnd, 2),
            "||" => (Tok::OrOr, 2),
            "+=" => (Tok::AddAssign, 2),
            "-=" => (Tok::SubAssign, 2),
            "**" => (Tok::StarStar, 2),
            "++" => (Tok::PlusPlus, 2),
            "--" => (Tok::MinusMinus, 2),
            _ => match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '[' => (Tok::LBracket, 1),
                ']' => (Tok::RBracket, 1),
                ';' => (Tok::Semi, 1),
                ',' => (Tok::Comma, 1),
                '.' => (Tok::Dot, 1),
                '=' => (Tok::Assign, 1),
                '<' => (Tok::Lt, 1),
                '>' => (Tok::Gt, 1),
                '+' => (Tok::Plus, 1),
                '-' => (Tok::Minus, 1),
                '*' => (Tok::Star, 1),
                '/' => (Tok::Slash, 1),
                '%' => (Tok::Percent, 1),
                '!' => (Tok::Bang, 1),
                other => (Tok::Other(other), 1),
            },
        };
        advance(&mut i, &mut line, &mut col, len);
        push!(tok, tline, tcol);
    }
    push!(Tok::Eof, line, col);
    Ok(tokens)
}

/// Strip underscores, expand `1e18`-style scientific notation, lowercase hex.
fn normalize_number(raw: &str) -> Option<String> {
    let cleaned: String = raw.chars().filter(|c| *c != '_').collect();
    if cleaned.starts_with("0x") || cleaned.starts_with("0X") {
        let hex = &cleaned[2..];
        if hex.is_empty() || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return None;
        }
        return Some(format!("0x{}", hex.to_ascii_lowercase()));
    }
    if let Some(pos) = cleaned.find(['e', 'E']) {
        let (mantissa, exp) = cleaned.split_at(pos);
        let exp: u32 = exp[1..].parse().ok()?;
        if mantissa.is_empty() || !mantissa.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let mut out = mantissa.trim_start_matches('0').to_string();
        if out.is_empty() {
            return Some("0".into());
        }
        out.extend(std::iter::repeat('0').take(exp as usize));
        return Some(out);
    }
    if cleaned.chars().all(|c| c.is_ascii_digit()) {
        let trimmed = cleaned.trim_start_matches('0');
        return Some(if trimmed.is_empty() {
            "0".into()
        } else {
            trimmed.into()
        });
    }
    // version shapes like `0.8.13` survive lexing; they only occur in pragma
    // lines, which the parser skips
    if !cleaned.is_empty() && cleaned.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return Some(cleaned);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_normalize() {
        assert_eq!(normalize_number("1_000"), Some("1000".into()));
        assert_eq!(normalize_number("1e18"), Some("1000000000000000000".into()));
        assert_eq!(normalize_number("0xAbC"), Some("0xabc".into()));
        assert_eq!(normalize_number("007"), Some("7".into()));
        assert_eq!(normalize_number("0.8.13"), Some("0.8.13".into()));
        assert_eq!(normalize_number("1x5"), None);
    }

    #[test]
    fn operators_and_locations() {
        let toks = lex(0, "a >= 10_000;\n_r.length").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("a".into()));
        assert_eq!(toks[1].tok, Tok::Ge);
        assert_eq!(toks[2].tok, Tok::Number("10000".into()));
        assert_eq!(toks[4].tok, Tok::Ident("_r".into()));
        assert_eq!(toks[4].line, 2);
        assert_eq!(toks[5].tok, Tok::Dot);
    }
}
