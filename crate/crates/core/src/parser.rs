//! Concrete syntax: lexer, recursive-descent parser and pretty-printer.
//!
//! `<` at the start of an operand opens a pair (constructor or pair type);
//! after an operand it is the less-than operator.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::ast::{
    AnnotatedSignature, Diagnostic, Expr, ExprKind, FunctionDef, Param, Pos, Program, SortSignature,
    SourceLocation,
};
use crate::sort::{Annotation, GroundSort, Sort};
use crate::value::{GroundValue, TypeExpr};

const RESERVED: &[&str] = &[
    "def", "is", "real", "bool", "fst", "snd", "not", "or", "TRUE", "FALSE", "POSINF", "NEGINF",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sensor(String),
    At,
    AtSig,
    AtStab,
    AtAnn,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Colon,
    Question,
    Bang,
    Plus,
    Minus,
    Eq,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(x) => format!("number {x}"),
        Tok::Sensor(s) => format!("sensor #{s}"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>, (String, Pos)> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '/' {
                    let mut look = self.chars.clone();
                    look.next();
                    if look.peek() == Some(&'/') {
                        while let Some(c) = self.bump() {
                            if c == '\n' {
                                break;
                            }
                        }
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
            let pos = Pos { line: self.line, column: self.column };
            let Some(&c) = self.chars.peek() else {
                out.push((Tok::Eof, pos));
                return Ok(out);
            };
            let tok = if c.is_ascii_alphabetic() || c == '_' {
                Tok::Ident(self.ident())
            } else if c.is_ascii_digit() {
                let mut s = String::new();
                while let Some(&d) = self.chars.peek() {
                    let exp_sign = (d == '+' || d == '-') && s.ends_with(['e', 'E']);
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        s.push(d);
                        self.bump();
                    } else {
                        break;
                    }
                }
                let x: f64 = s.parse().map_err(|_| (format!("malformed number `{s}`"), pos))?;
                Tok::Num(x)
            } else {
                self.bump();
                match c {
                    '#' => {
                        let name = self.ident();
                        if name.is_empty() {
                            return Err(("expected a sensor name after `#`".into(), pos));
                        }
                        Tok::Sensor(name)
                    }
                    '@' => {
                        if self.chars.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                            match self.ident().as_str() {
                                "sig" => Tok::AtSig,
                                "stab" => Tok::AtStab,
                                "ann" => Tok::AtAnn,
                                other => return Err((format!("unknown annotation `@{other}`"), pos)),
                            }
                        } else {
                            Tok::At
                        }
                    }
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '?' => Tok::Question,
                    '!' => Tok::Bang,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '=' => Tok::Eq,
                    other => return Err((format!("unexpected character `{other}`"), pos)),
                }
            };
            out.push((tok, pos));
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, (String, Pos)> {
    Lexer { chars: src.chars().peekable(), line: 1, column: 1 }.tokens()
}

type PResult<T> = Result<T, (String, Pos)>;

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            Err((format!("expected {}, found {}", describe(&t), describe(self.peek())), self.pos()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.next();
            Ok(())
        } else {
            Err((format!("expected `{kw}`, found {}", describe(self.peek())), self.pos()))
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            t => Err((format!("expected an identifier, found {}", describe(&t)), self.pos())),
        }
    }

    fn ty(&mut self) -> PResult<TypeExpr> {
        match self.next() {
            Tok::Ident(s) if s == "real" => Ok(TypeExpr::Real),
            Tok::Ident(s) if s == "bool" => Ok(TypeExpr::Bool),
            Tok::Lt => {
                let a = self.ty()?;
                self.expect(Tok::Comma)?;
                let b = self.ty()?;
                self.expect(Tok::Gt)?;
                Ok(TypeExpr::pair(a, b))
            }
            t => Err((format!("expected a type, found {}", describe(&t)), self.toks[self.i.saturating_sub(1)].1)),
        }
    }

    fn sort(&mut self) -> PResult<Sort> {
        let pos = self.pos();
        match self.next() {
            Tok::Ident(s) => s
                .parse::<GroundSort>()
                .map(Sort::Ground)
                .map_err(|_| (format!("unknown sort `{s}`"), pos)),
            Tok::Lt => {
                let a = self.sort()?;
                self.expect(Tok::Comma)?;
                let b = self.sort()?;
                self.expect(Tok::Gt)?;
                Ok(Sort::pair(a, b))
            }
            t => Err((format!("expected a sort, found {}", describe(&t)), pos)),
        }
    }

    fn signature(&mut self) -> PResult<SortSignature> {
        let result = self.sort()?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.sort()?);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(SortSignature { result, args })
    }

    fn annotated_signature(&mut self) -> PResult<AnnotatedSignature> {
        let support = self.signature()?;
        self.expect(Tok::LBracket)?;
        let ann = match self.next() {
            Tok::Bang => Annotation::Bang,
            Tok::Question => Annotation::Question,
            t => return Err((format!("expected `!` or `?`, found {}", describe(&t)), self.pos())),
        };
        self.expect(Tok::RBracket)?;
        Ok(AnnotatedSignature::new(support, ann))
    }

    fn sig_list<T>(&mut self, mut one: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = vec![one(self)?];
        while *self.peek() == Tok::Comma {
            self.next();
            out.push(one(self)?);
        }
        Ok(out)
    }

    fn def(&mut self, file: &Arc<str>) -> PResult<(FunctionDef, Vec<(String, Pos)>)> {
        let mut sorts = Vec::new();
        let mut stab = Vec::new();
        let mut ann = Vec::new();
        let mut sig_pos = Vec::new();
        loop {
            match self.peek() {
                Tok::AtSig => {
                    sig_pos.push(("@sig".to_string(), self.pos()));
                    self.next();
                    sorts.extend(self.sig_list(Self::signature)?);
                }
                Tok::AtStab => {
                    sig_pos.push(("@stab".to_string(), self.pos()));
                    self.next();
                    stab.extend(self.sig_list(Self::signature)?);
                }
                Tok::AtAnn => {
                    sig_pos.push(("@ann".to_string(), self.pos()));
                    self.next();
                    ann.extend(self.sig_list(Self::annotated_signature)?);
                }
                _ => break,
            }
        }
        let pos = self.pos();
        self.expect_kw("def")?;
        let result = self.ty()?;
        let name = self.name()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let ty = self.ty()?;
                let pname = self.name()?;
                params.push(Param { name: pname, ty });
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect_kw("is")?;
        let body = self.expr()?;
        let def = FunctionDef {
            name,
            result,
            params,
            body,
            declared_sorts: sorts,
            declared_stab: stab,
            declared_ann: ann,
            location: SourceLocation::new(file, pos),
        };
        Ok((def, sig_pos))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let c = self.disj()?;
        if *self.peek() == Tok::Question {
            self.next();
            let a = self.expr()?;
            self.expect(Tok::Colon)?;
            let b = self.expr()?;
            return Ok(Expr::at(ExprKind::Cond(Box::new(c), Box::new(a), Box::new(b)), pos));
        }
        Ok(c)
    }

    fn disj(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let mut e = self.cmp()?;
        while self.is_kw("or") {
            self.next();
            let r = self.cmp()?;
            e = Expr::at(ExprKind::Apply("or".into(), vec![e, r]), pos);
        }
        Ok(e)
    }

    fn cmp(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let mut e = self.sum()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => "<",
                Tok::Eq => "=",
                _ => break,
            };
            self.next();
            let r = self.sum()?;
            e = Expr::at(ExprKind::Apply(op.into(), vec![e, r]), pos);
        }
        Ok(e)
    }

    fn sum(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let mut e = self.unary()?;
        while *self.peek() == Tok::Plus {
            self.next();
            let r = self.unary()?;
            e = Expr::at(ExprKind::Apply("+".into(), vec![e, r]), pos);
        }
        Ok(e)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        if *self.peek() == Tok::Minus {
            self.next();
            if let Tok::Num(x) = *self.peek() {
                self.next();
                let g = GroundValue::real(-x).map_err(|e| (e.to_string(), pos))?;
                return Ok(Expr::at(ExprKind::Lit(g), pos));
            }
            let e = self.unary()?;
            return Ok(Expr::at(ExprKind::Apply("-".into(), vec![e]), pos));
        }
        if self.is_kw("not") {
            self.next();
            let e = self.unary()?;
            return Ok(Expr::at(ExprKind::Apply("not".into(), vec![e]), pos));
        }
        self.proj()
    }

    fn proj(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        if self.is_kw("fst") {
            self.next();
            let e = self.proj()?;
            return Ok(Expr::at(ExprKind::Fst(Box::new(e)), pos));
        }
        if self.is_kw("snd") {
            self.next();
            let e = self.proj()?;
            return Ok(Expr::at(ExprKind::Snd(Box::new(e)), pos));
        }
        self.atom()
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let kind = match self.next() {
            Tok::Num(x) => ExprKind::Lit(GroundValue::real(x).map_err(|e| (e.to_string(), pos))?),
            Tok::Sensor(s) => ExprKind::Sensor(s),
            Tok::Ident(s) => match s.as_str() {
                "TRUE" => ExprKind::Lit(GroundValue::TRUE),
                "FALSE" => ExprKind::Lit(GroundValue::FALSE),
                "POSINF" => ExprKind::Lit(GroundValue::POSINF),
                "NEGINF" => ExprKind::Lit(GroundValue::NEGINF),
                "or" if *self.peek() == Tok::LParen => ExprKind::Apply(s, self.args()?),
                _ if RESERVED.contains(&s.as_str()) => {
                    return Err((format!("unexpected keyword `{s}`"), pos));
                }
                _ if *self.peek() == Tok::LParen => ExprKind::Apply(s, self.args()?),
                _ => ExprKind::Var(s),
            },
            Tok::Lt => {
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                self.expect(Tok::Gt)?;
                ExprKind::Pair(Box::new(a), Box::new(b))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            Tok::LBrace => {
                let source = self.expr()?;
                self.expect(Tok::Colon)?;
                let (diffusion, args) = self.spread_body()?;
                self.expect(Tok::RBrace)?;
                ExprKind::Spread { source: Box::new(source), diffusion, args }
            }
            t => return Err((format!("expected an expression, found {}", describe(&t)), pos)),
        };
        Ok(Expr::at(kind, pos))
    }

    fn spread_body(&mut self) -> PResult<(String, Vec<Expr>)> {
        let pos = self.pos();
        if *self.peek() == Tok::At {
            self.next();
            let op = match self.next() {
                Tok::Plus => "+",
                Tok::Lt => "<",
                Tok::Eq => "=",
                Tok::Ident(s) if s == "or" => "or",
                t => {
                    return Err((
                        format!("spread body `@` must be followed by `+`, `or`, `<` or `=`, found {}", describe(&t)),
                        pos,
                    ))
                }
            };
            let e = self.expr()?;
            return Ok((op.to_string(), vec![e]));
        }
        let name = match self.next() {
            Tok::Ident(s) if s == "not" || s == "or" || !RESERVED.contains(&s.as_str()) => s,
            Tok::Minus => "-".to_string(),
            t => return Err((format!("expected a diffusion in spread body, found {}", describe(&t)), pos)),
        };
        self.expect(Tok::LParen)?;
        if *self.peek() != Tok::At {
            return Err(("the first argument of a spread diffusion must be `@`".into(), self.pos()));
        }
        self.next();
        let mut args = Vec::new();
        while *self.peek() == Tok::Comma {
            self.next();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen)?;
        Ok((name, args))
    }

    /// Skip to the next annotation or `def` keyword.
    fn recover(&mut self) {
        self.next();
        while !matches!(self.peek(), Tok::Eof | Tok::AtSig | Tok::AtStab | Tok::AtAnn) && !self.is_kw("def") {
            self.next();
        }
    }
}

fn check_signature_shapes(def: &FunctionDef, sig_pos: &[(String, Pos)], file: &Arc<str>, diags: &mut Vec<Diagnostic>) {
    let loc = sig_pos
        .first()
        .map(|(_, p)| SourceLocation::new(file, *p))
        .unwrap_or_else(|| def.location.clone());
    let types = def.param_types();
    let all = def
        .declared_sorts
        .iter()
        .map(|s| ("@sig", s))
        .chain(def.declared_stab.iter().map(|s| ("@stab", s)))
        .chain(def.declared_ann.iter().map(|a| ("@ann", &a.support)));
    for (kind, sig) in all {
        if sig.args.len() != types.len() {
            diags.push(Diagnostic::error(
                loc.clone(),
                "signature-arity",
                format!(
                    "{kind} {sig} has {} argument sorts but `{}` takes {} parameters",
                    sig.args.len(),
                    def.name,
                    types.len()
                ),
            ));
        } else if !sig.result.refines(&def.result) || sig.args.iter().zip(&types).any(|(s, t)| !s.refines(t)) {
            diags.push(Diagnostic::error(
                loc.clone(),
                "signature-refinement",
                format!("{kind} {sig} does not refine the type of `{}`", def.name),
            ));
        }
    }
}

/// Parse one source unit.
pub fn parse_program(src: &str, file: &str) -> (Program, Vec<Diagnostic>) {
    parse_sources(&[(file, src)])
}

/// Parse several source units into one program; a name defined twice,
/// within or across units, is a diagnostic and the first definition wins.
pub fn parse_sources(units: &[(&str, &str)]) -> (Program, Vec<Diagnostic>) {
    let mut defs: IndexMap<String, FunctionDef> = IndexMap::new();
    let mut diags = Vec::new();
    for (file, src) in units {
        let file: Arc<str> = Arc::from(*file);
        let toks = match lex(src) {
            Ok(t) => t,
            Err((msg, pos)) => {
                diags.push(Diagnostic::error(SourceLocation::new(&file, pos), "parse", msg));
                continue;
            }
        };
        let mut p = Parser { toks, i: 0 };
        while *p.peek() != Tok::Eof {
            let start = p.i;
            match p.def(&file) {
                Ok((def, sig_pos)) => {
                    check_signature_shapes(&def, &sig_pos, &file, &mut diags);
                    let mut seen = HashSet::new();
                    for prm in &def.params {
                        if !seen.insert(prm.name.clone()) {
                            diags.push(Diagnostic::error(
                                def.location.clone(),
                                "parse",
                                format!("parameter `{}` of `{}` declared twice", prm.name, def.name),
                            ));
                        }
                    }
                    if let Some(prev) = defs.get(&def.name) {
                        diags.push(Diagnostic::error(
                            def.location.clone(),
                            "duplicate-definition",
                            format!("`{}` is already defined at {}", def.name, prev.location),
                        ));
                    } else {
                        defs.insert(def.name.clone(), def);
                    }
                }
                Err((msg, pos)) => {
                    diags.push(Diagnostic::error(SourceLocation::new(&file, pos), "parse", msg));
                    p.i = start;
                    p.recover();
                }
            }
        }
    }
    (Program { defs }, diags)
}

pub fn parse_expr(src: &str) -> Result<Expr, Diagnostic> {
    let file: Arc<str> = Arc::from("<expr>");
    let err = |(msg, pos): (String, Pos)| Diagnostic::error(SourceLocation::new(&file, pos), "parse", msg);
    let mut p = Parser { toks: lex(src).map_err(err)?, i: 0 };
    let e = p.expr().map_err(err)?;
    if *p.peek() != Tok::Eof {
        return Err(err((format!("unexpected {} after expression", describe(p.peek())), p.pos())));
    }
    Ok(e)
}

pub fn parse_sort(src: &str) -> Option<Sort> {
    let mut p = Parser { toks: lex(src).ok()?, i: 0 };
    let s = p.sort().ok()?;
    (*p.peek() == Tok::Eof).then_some(s)
}

pub fn parse_signature(src: &str) -> Option<SortSignature> {
    let mut p = Parser { toks: lex(src).ok()?, i: 0 };
    let s = p.signature().ok()?;
    (*p.peek() == Tok::Eof).then_some(s)
}

pub fn parse_annotated_signature(src: &str) -> Option<AnnotatedSignature> {
    let mut p = Parser { toks: lex(src).ok()?, i: 0 };
    let s = p.annotated_signature().ok()?;
    (*p.peek() == Tok::Eof).then_some(s)
}

fn infix(op: &str) -> bool {
    matches!(op, "+" | "<" | "=" | "or")
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn write_expr(e: &Expr, s: &mut String) {
    match &e.kind {
        ExprKind::Var(x) => s.push_str(x),
        ExprKind::Sensor(x) => {
            s.push('#');
            s.push_str(x);
        }
        ExprKind::Lit(g) => {
            let _ = write!(s, "{g}");
        }
        ExprKind::Pair(a, b) => {
            s.push('<');
            write_expr(a, s);
            s.push_str(", ");
            write_expr(b, s);
            s.push('>');
        }
        ExprKind::Fst(a) | ExprKind::Snd(a) => {
            s.push_str(if matches!(e.kind, ExprKind::Fst(_)) { "(fst " } else { "(snd " });
            write_expr(a, s);
            s.push(')');
        }
        ExprKind::Cond(c, a, b) => {
            s.push('(');
            write_expr(c, s);
            s.push_str(" ? ");
            write_expr(a, s);
            s.push_str(" : ");
            write_expr(b, s);
            s.push(')');
        }
        ExprKind::Apply(f, args) if infix(f) && args.len() == 2 => {
            s.push('(');
            write_expr(&args[0], s);
            let _ = write!(s, " {f} ");
            write_expr(&args[1], s);
            s.push(')');
        }
        ExprKind::Apply(f, args) if (f == "-" || f == "not") && args.len() == 1 => {
            let _ = write!(s, "({}", if f == "-" { "-" } else { "not " });
            // `-1` reads back as a literal, so negated numbers keep parentheses.
            if matches!(args[0].kind, ExprKind::Lit(GroundValue::Real(_))) {
                s.push('(');
                write_expr(&args[0], s);
                s.push(')');
            } else {
                write_expr(&args[0], s);
            }
            s.push(')');
        }
        ExprKind::Apply(f, args) => {
            s.push_str(f);
            s.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_expr(a, s);
            }
            s.push(')');
        }
        ExprKind::Spread { source, diffusion, args } => {
            s.push_str("{ ");
            write_expr(source, s);
            s.push_str(" : ");
            if infix(diffusion) && args.len() == 1 {
                let _ = write!(s, "@ {diffusion} ");
                write_expr(&args[0], s);
            } else {
                let _ = write!(s, "{diffusion}(@");
                for a in args {
                    s.push_str(", ");
                    write_expr(a, s);
                }
                s.push(')');
            }
            s.push_str(" }");
        }
    }
}

pub fn print_def(d: &FunctionDef) -> String {
    let mut s = String::new();
    let join = |v: Vec<String>| v.join(", ");
    if !d.declared_sorts.is_empty() {
        let _ = writeln!(s, "@sig {}", join(d.declared_sorts.iter().map(|x| x.to_string()).collect()));
    }
    if !d.declared_stab.is_empty() {
        let _ = writeln!(s, "@stab {}", join(d.declared_stab.iter().map(|x| x.to_string()).collect()));
    }
    if !d.declared_ann.is_empty() {
        let _ = writeln!(s, "@ann {}", join(d.declared_ann.iter().map(|x| x.to_string()).collect()));
    }
    let params: Vec<String> = d.params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
    let _ = writeln!(s, "def {} {}({}) is {}", d.result, d.name, params.join(", "), print_expr(&d.body));
    s
}

pub fn print_program(p: &Program) -> String {
    p.defs.values().map(print_def).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_sugar() {
        let e = parse_expr("{#src : @ + #dist}").unwrap();
        assert_eq!(e, Expr::spread(Expr::sensor("src"), "+", vec![Expr::sensor("dist")]));
    }

    #[test]
    fn pair_versus_less_than() {
        let e = parse_expr("<1, a < b>").unwrap();
        let cmp = Expr::apply("<", vec![Expr::var("a"), Expr::var("b")]);
        assert_eq!(e, Expr::pair(Expr::real(1.0), cmp));
        let nested = parse_expr("<1, <2, 3>>").unwrap();
        assert_eq!(nested, Expr::pair(Expr::real(1.0), Expr::pair(Expr::real(2.0), Expr::real(3.0))));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a + b < c or d").unwrap();
        let sum = Expr::apply("+", vec![Expr::var("a"), Expr::var("b")]);
        let lt = Expr::apply("<", vec![sum, Expr::var("c")]);
        assert_eq!(e, Expr::apply("or", vec![lt, Expr::var("d")]));
        let p = parse_expr("snd f(x) + -y").unwrap();
        let call = Expr::apply("f", vec![Expr::var("x")]);
        assert_eq!(p, Expr::apply("+", vec![Expr::snd(call), Expr::apply("-", vec![Expr::var("y")])]));
    }

    #[test]
    fn spread_without_diffusion_is_rejected() {
        assert!(parse_expr("{ 1 : @ }").is_err());
        assert!(parse_expr("{ 1 : f(2) }").is_err());
    }

    #[test]
    fn duplicate_definition_diagnosed() {
        let (p, d) = parse_program("def real f() is 1\ndef real f() is 2", "t.scf");
        assert_eq!(p.defs.len(), 1);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].rule_name, "duplicate-definition");
        assert_eq!(d[0].location.line, 2);
    }

    #[test]
    fn annotations_attach_to_def() {
        let src = "@stab real(real,pr,bool)\n@ann real(real,pr,bool)[!]\ndef real rs(real x, real y, bool c) is x";
        let (p, d) = parse_program(src, "t.scf");
        assert!(d.is_empty(), "{d:?}");
        let f = p.get("rs").unwrap();
        assert_eq!(f.declared_stab[0].to_string(), "real(real,pr,bool)");
        assert_eq!(f.declared_ann[0].ann, Annotation::Bang);
    }

    #[test]
    fn arity_mismatch_diagnosed() {
        let (_, d) = parse_program("@stab pr(real)\ndef real f(real x, real y) is x", "t.scf");
        assert_eq!(d[0].rule_name, "signature-arity");
    }

    #[test]
    fn comments_skipped_and_recovery_continues() {
        let (p, d) = parse_program("// lib\ndef real f() is (\ndef real g() is 1 // trailing", "t.scf");
        assert_eq!(d.len(), 1);
        assert!(p.get("g").is_some());
    }
}
