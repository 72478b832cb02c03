//! Line-oriented input format for polynomial systems.
//!
//! A file holds one directive per line: `vars:` names the variables (required,
//! before the first polynomial), `mode:` and `blocks:` optionally preset the
//! solving mode and the per-block variable counts, and each `f:` line gives
//! one polynomial. Blank lines and lines starting with `#` are skipped.
//!
//! Expressions use `+ - * ^` with parentheses for grouping; multiplication is
//! always written out. Numbers are integer, decimal, or scientific; a number
//! directly followed by `i` is imaginary, so `(1.5-2i)` is a complex
//! coefficient. Exponents are integer literals; negative exponents apply to
//! single variables only (Laurent monomials for the toric mode).
//!
//! `print_input` renders a parsed file back to canonical text; parsing that
//! text again reproduces the same system exactly.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use polysolve::poly::Polynomial;
use polysolve::{Mode, PolynomialSystem};

/// Largest accepted exponent literal; keeps degree arithmetic and repeated
/// multiplication far away from overflow before the matrix entry cap can
/// take over.
const MAX_EXPONENT: i64 = 1_000_000;

/// Parse failure with its position; `line` 0 means the file as a whole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, col, message: message.into() })
}

/// A parsed input file: the square system plus the declarations that came
/// with it.
#[derive(Clone, Debug)]
pub struct ParsedInput {
    pub system: PolynomialSystem,
    pub vars: Vec<String>,
    pub mode: Option<Mode>,
    pub blocks: Option<Vec<usize>>,
}

/// Parses a complete input file into a square polynomial system.
pub fn parse_input(text: &str) -> Result<ParsedInput, ParseError> {
    let mut vars: Option<Vec<String>> = None;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut mode: Option<Mode> = None;
    let mut blocks: Option<Vec<usize>> = None;
    let mut polys: Vec<Polynomial> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed_start = raw.trim_start();
        if trimmed_start.is_empty() || trimmed_start.starts_with('#') {
            continue;
        }
        let indent = raw.chars().count() - trimmed_start.chars().count();
        let body = trimmed_start.trim_end();
        let Some((directive, rest)) = body.split_once(':') else {
            return err(
                line,
                indent + 1,
                "expected a directive line like 'vars: ...' or 'f: ...'",
            );
        };
        // 1-based column of the first character after the colon.
        let value_col = indent + directive.chars().count() + 2;
        match directive.trim_end() {
            "vars" => {
                if vars.is_some() {
                    return err(line, indent + 1, "duplicate vars line");
                }
                let names = parse_var_names(rest, line, value_col)?;
                for (j, name) in names.iter().enumerate() {
                    index.insert(name.clone(), j);
                }
                vars = Some(names);
            }
            "mode" => {
                if mode.is_some() {
                    return err(line, indent + 1, "duplicate mode line");
                }
                let value = rest.trim();
                match value.parse::<Mode>() {
                    Ok(m) => mode = Some(m),
                    Err(_) => {
                        return err(
                            line,
                            value_col,
                            format!(
                                "unknown mode '{value}' (expected affine, toric, \
                                 projective, or multihom)"
                            ),
                        )
                    }
                }
            }
            "blocks" => {
                if blocks.is_some() {
                    return err(line, indent + 1, "duplicate blocks line");
                }
                blocks = Some(parse_block_list(rest, line, value_col)?);
            }
            "f" => {
                let Some(names) = &vars else {
                    return err(line, indent + 1, "vars must be declared before the polynomials");
                };
                let poly = parse_polynomial(rest, names.len(), &index, line, value_col)?;
                if poly.is_zero() {
                    let expr_col = value_col + rest.chars().count()
                        - rest.trim_start().chars().count();
                    return err(line, expr_col, "zero polynomial");
                }
                polys.push(poly);
            }
            other => {
                return err(
                    line,
                    indent + 1,
                    format!("unknown directive '{other}' (expected vars, mode, blocks, or f)"),
                );
            }
        }
    }
    let Some(vars) = vars else {
        return err(0, 0, "missing vars line");
    };
    if polys.len() != vars.len() {
        return err(
            0,
            0,
            format!(
                "square system required ({} polynomials for {} variables)",
                polys.len(),
                vars.len()
            ),
        );
    }
    match PolynomialSystem::new(polys) {
        Ok(system) => Ok(ParsedInput { system, vars, mode, blocks }),
        Err(e) => err(0, 0, e.to_string()),
    }
}

fn parse_var_names(rest: &str, line: usize, col: usize) -> Result<Vec<String>, ParseError> {
    let mut names = Vec::new();
    for name in rest.split_whitespace() {
        let mut chars = name.chars();
        let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if !head_ok || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return err(line, col, format!("invalid variable name '{name}'"));
        }
        if name == "i" {
            return err(
                line,
                col,
                "variable name 'i' collides with the imaginary unit",
            );
        }
        if names.contains(&name.to_string()) {
            return err(line, col, format!("duplicate variable name '{name}'"));
        }
        names.push(name.to_string());
    }
    if names.is_empty() {
        return err(line, col, "vars line declares no variables");
    }
    Ok(names)
}

fn parse_block_list(rest: &str, line: usize, col: usize) -> Result<Vec<usize>, ParseError> {
    let mut out = Vec::new();
    for part in rest.split(',') {
        let value = part.trim();
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => out.push(n),
            _ => {
                return err(
                    line,
                    col,
                    format!("invalid block size '{value}' (expected a positive integer)"),
                )
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Num(f64),
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    col: usize,
}

fn lex(text: &str, line: usize, base_col: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut p = 0;
    while p < chars.len() {
        let col = base_col + p;
        let c = chars[p];
        let simple = match c {
            '+' => Some(TokenKind::Plus),
            '-' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '^' => Some(TokenKind::Caret),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = simple {
            tokens.push(Token { kind, col });
            p += 1;
        } else if c.is_whitespace() {
            p += 1;
        } else if c.is_ascii_digit() {
            let start = p;
            while p < chars.len() && chars[p].is_ascii_digit() {
                p += 1;
            }
            if p < chars.len() && chars[p] == '.' {
                p += 1;
                while p < chars.len() && chars[p].is_ascii_digit() {
                    p += 1;
                }
            }
            if p < chars.len() && (chars[p] == 'e' || chars[p] == 'E') {
                let mut q = p + 1;
                if q < chars.len() && (chars[q] == '+' || chars[q] == '-') {
                    q += 1;
                }
                if q < chars.len() && chars[q].is_ascii_digit() {
                    p = q;
                    while p < chars.len() && chars[p].is_ascii_digit() {
                        p += 1;
                    }
                }
            }
            let literal: String = chars[start..p].iter().collect();
            let Ok(value) = literal.parse::<f64>() else {
                return err(line, col, format!("malformed number '{literal}'"));
            };
            // A trailing standalone 'i' marks an imaginary literal.
            let imaginary = p < chars.len()
                && chars[p] == 'i'
                && chars.get(p + 1).is_none_or(|&d| !d.is_ascii_alphanumeric() && d != '_');
            if imaginary {
                p += 1;
                tokens.push(Token { kind: TokenKind::Imag(value), col });
            } else {
                tokens.push(Token { kind: TokenKind::Num(value), col });
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = p;
            while p < chars.len() && (chars[p].is_ascii_alphanumeric() || chars[p] == '_') {
                p += 1;
            }
            let name: String = chars[start..p].iter().collect();
            tokens.push(Token { kind: TokenKind::Ident(name), col });
        } else {
            return err(line, col, format!("unexpected character '{c}'"));
        }
    }
    Ok(tokens)
}

struct ExprParser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
    nvars: usize,
    index: &'a HashMap<String, usize>,
}

fn parse_polynomial(
    text: &str,
    nvars: usize,
    index: &HashMap<String, usize>,
    line: usize,
    base_col: usize,
) -> Result<Polynomial, ParseError> {
    let tokens = lex(text, line, base_col)?;
    let end_col = tokens.last().map_or(base_col, |t| t.col + 1);
    let mut parser = ExprParser { tokens, pos: 0, line, end_col, nvars, index };
    let poly = parser.expr()?;
    match parser.peek() {
        None => Ok(poly),
        Some(t) => err(line, t.col, "expected an operator"),
    }
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next_col(&self) -> usize {
        self.peek().map_or(self.end_col, |t| t.col)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| t.kind == *kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&TokenKind::Plus) {
                acc = acc.add(&self.term()?);
            } else if self.eat(&TokenKind::Minus) {
                acc = acc.sub(&self.term()?);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(&TokenKind::Star) {
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        if self.eat(&TokenKind::Minus) {
            Ok(self.unary()?.neg())
        } else if self.eat(&TokenKind::Plus) {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let (base, variable) = self.atom()?;
        if !self.eat(&TokenKind::Caret) {
            return Ok(base);
        }
        let exp_col = self.next_col();
        let exponent = self.exponent_literal()?;
        if exponent >= 0 {
            match variable {
                // x^k as a single term, without k repeated multiplications.
                Some(j) => Ok(self.monomial(j, exponent as i32)),
                None => Ok(base.pow(exponent as u32)),
            }
        } else {
            match variable {
                Some(j) => Ok(self.monomial(j, exponent as i32)),
                None => err(
                    self.line,
                    exp_col,
                    "negative exponents only apply to single variables",
                ),
            }
        }
    }

    fn monomial(&self, j: usize, e: i32) -> Polynomial {
        let mut exps = vec![0; self.nvars];
        exps[j] = e;
        Polynomial::monomial(self.nvars, Complex64::ONE, exps)
    }

    fn atom(&mut self) -> Result<(Polynomial, Option<usize>), ParseError> {
        let col = self.next_col();
        let Some(token) = self.peek().cloned() else {
            return err(self.line, col, "expected a number, variable, or parenthesis");
        };
        self.pos += 1;
        match token.kind {
            TokenKind::Num(v) => Ok((Polynomial::constant(self.nvars, Complex64::new(v, 0.0)), None)),
            TokenKind::Imag(v) => Ok((Polynomial::constant(self.nvars, Complex64::new(0.0, v)), None)),
            TokenKind::Ident(name) => match self.index.get(&name) {
                Some(&j) => Ok((Polynomial::variable(self.nvars, j), Some(j))),
                None => err(self.line, col, format!("unknown variable '{name}'")),
            },
            TokenKind::LParen => {
                let inner = self.expr()?;
                if !self.eat(&TokenKind::RParen) {
                    return err(self.line, self.next_col(), "missing closing parenthesis");
                }
                Ok((inner, None))
            }
            _ => err(self.line, col, "expected a number, variable, or parenthesis"),
        }
    }

    fn exponent_literal(&mut self) -> Result<i64, ParseError> {
        let negative = self.eat(&TokenKind::Minus);
        let col = self.next_col();
        let Some(token) = self.peek().cloned() else {
            return err(self.line, col, "expected an integer exponent");
        };
        let TokenKind::Num(v) = token.kind else {
            return err(self.line, col, "expected an integer exponent");
        };
        self.pos += 1;
        if v.fract() != 0.0 || v < 0.0 || v > MAX_EXPONENT as f64 {
            return err(
                self.line,
                col,
                format!("exponent must be an integer between 0 and {MAX_EXPONENT}"),
            );
        }
        let magnitude = v as i64;
        Ok(if negative { -magnitude } else { magnitude })
    }
}

/// Shortest decimal text that parses back to exactly the same value.
fn format_f64(v: f64) -> String {
    let normalized = if v == 0.0 { 0.0 } else { v };
    format!("{normalized}")
}

/// Monomial in product form: `x1^2*x2`, or an empty string for the constant
/// monomial.
pub fn format_monomial(exps: &[i32], vars: &[String]) -> String {
    let mut parts = Vec::new();
    for (name, &e) in vars.iter().zip(exps) {
        match e {
            0 => {}
            1 => parts.push(name.clone()),
            _ => parts.push(format!("{name}^{e}")),
        }
    }
    parts.join("*")
}

/// Canonical expression text for one polynomial.
pub fn print_polynomial(p: &Polynomial, vars: &[String]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, t) in p.terms().iter().enumerate() {
        let mono = format_monomial(&t.exps, vars);
        if t.coeff.im == 0.0 {
            let negative = t.coeff.re < 0.0;
            if k == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let magnitude = t.coeff.re.abs();
            if mono.is_empty() {
                out.push_str(&format_f64(magnitude));
            } else if magnitude == 1.0 {
                out.push_str(&mono);
            } else {
                out.push_str(&format_f64(magnitude));
                out.push('*');
                out.push_str(&mono);
            }
        } else {
            if k > 0 {
                out.push_str(" + ");
            }
            let im = t.coeff.im;
            let sign = if im < 0.0 { '-' } else { '+' };
            out.push_str(&format!(
                "({}{}{}i)",
                format_f64(t.coeff.re),
                sign,
                format_f64(im.abs())
            ));
            if !mono.is_empty() {
                out.push('*');
                out.push_str(&mono);
            }
        }
    }
    out
}

/// Renders a parsed input back to canonical text; reparsing reproduces the
/// same system.
pub fn print_input(input: &ParsedInput) -> String {
    let mut out = format!("vars: {}\n", input.vars.join(" "));
    if let Some(mode) = input.mode {
        out.push_str(&format!("mode: {mode}\n"));
    }
    if let Some(blocks) = &input.blocks {
        let sizes: Vec<String> = blocks.iter().map(|b| b.to_string()).collect();
        out.push_str(&format!("blocks: {}\n", sizes.join(",")));
    }
    for p in &input.system.polys {
        out.push_str(&format!("f: {}\n", print_polynomial(p, &input.vars)));
    }
    out
}
