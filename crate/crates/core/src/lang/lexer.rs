use super::ast::{Pos, Type};
use super::LangError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Float literal text (without suffix) and the suffix type, if any.
    Float(String, Option<Type>),
    Int(i64),
    Type(Type),
    If,
    Else,
    While,
    Return,
    Assert,
    Print,
    True,
    False,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LangError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, 2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(LangError::syntax(pos, "unterminated comment"));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col, 2);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let (tok, len) = lex_number(&chars[i..], pos)?;
            out.push(Token { tok, pos });
            advance(&mut i, &mut line, &mut col, len);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            let tok = match word.as_str() {
                "float" | "single" => Tok::Type(Type::Single),
                "double" => Tok::Type(Type::Double),
                "extended" => Tok::Type(Type::Extended),
                "int" => Tok::Type(Type::Int),
                "bool" => Tok::Type(Type::Bool),
                "void" => Tok::Type(Type::Void),
                "if" => Tok::If,
                "else" => Tok::Else,
                "while" => Tok::While,
                "return" => Tok::Return,
                "assert" => Tok::Assert,
                "print" => Tok::Print,
                "true" => Tok::True,
                "false" => Tok::False,
                "INFINITY" => Tok::Float("inf".into(), None),
                "NAN" => Tok::Float("nan".into(), None),
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, pos });
            advance(&mut i, &mut line, &mut col, j - start);
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, len) = match two.as_str() {
            "<=" => (Tok::Le, 2),
            ">=" => (Tok::Ge, 2),
            "==" => (Tok::EqEq, 2),
            "!=" => (Tok::Ne, 2),
            "&&" => (Tok::AndAnd, 2),
            "||" => (Tok::OrOr, 2),
            _ => {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Assign,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '%' => Tok::Percent,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    '!' => Tok::Bang,
                    _ => return Err(LangError::syntax(pos, format!("unexpected character `{c}`"))),
                };
                (t, 1)
            }
        };
        out.push(Token { tok, pos });
        advance(&mut i, &mut line, &mut col, len);
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

/// Scans one numeric literal; returns the token and its length in chars.
fn lex_number(s: &[char], pos: Pos) -> Result<(Tok, usize), LangError> {
    let mut j = 0;
    let hex = s.len() > 1 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
    let mut is_float = false;
    if hex {
        j = 2;
        while j < s.len() && (s[j].is_ascii_hexdigit() || s[j] == '.') {
            is_float |= s[j] == '.';
            j += 1;
        }
        if j < s.len() && (s[j] == 'p' || s[j] == 'P') {
            is_float = true;
            j += 1;
            if j < s.len() && (s[j] == '+' || s[j] == '-') {
                j += 1;
            }
            while j < s.len() && s[j].is_ascii_digit() {
                j += 1;
            }
        }
    } else {
        while j < s.len() && (s[j].is_ascii_digit() || s[j] == '.') {
            is_float |= s[j] == '.';
            j += 1;
        }
        if j < s.len() && (s[j] == 'e' || s[j] == 'E') {
            is_float = true;
            j += 1;
            if j < s.len() && (s[j] == '+' || s[j] == '-') {
                j += 1;
            }
            while j < s.len() && s[j].is_ascii_digit() {
                j += 1;
            }
        }
    }
    let text: String = s[..j].iter().collect();
    let mut suffix = None;
    if j < s.len() {
        match s[j] {
            'f' | 'F' if is_float => suffix = Some(Type::Single),
            'l' | 'L' if is_float => suffix = Some(Type::Extended),
            _ => {}
        }
        if suffix.is_some() {
            j += 1;
        }
    }
    if j < s.len() && (s[j].is_ascii_alphanumeric() || s[j] == '_' || s[j] == '.') {
        return Err(LangError::syntax(pos, format!("malformed number `{}`", s[..=j].iter().collect::<String>())));
    }
    if is_float {
        // validate now so the error carries the source position
        fplab_softfloat::parse_exact(&text).map_err(|e| LangError::syntax(pos, e.to_string()))?;
        return Ok((Tok::Float(text, suffix), j));
    }
    let value = if hex { i64::from_str_radix(&text[2..], 16) } else { text.parse::<i64>() };
    match value {
        Ok(v) => Ok((Tok::Int(v), j)),
        Err(_) => Err(LangError::syntax(pos, format!("integer literal `{text}` out of range"))),
    }
}
