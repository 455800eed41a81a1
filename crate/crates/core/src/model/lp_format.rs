//! Reader and writer for a subset of the CPLEX LP text format.
//!
//! Grammar (keywords are case-insensitive; section headers stand alone on
//! their line; `\` starts a comment that runs to the end of the line):
//!
//! ```text
//! file        := comment* objsense objective [constraints] [bounds] [integers]* "End"
//! objsense    := "Minimize" | "Minimum" | "Min" | "Maximize" | "Maximum" | "Max"
//! objective   := [name ":"] expr
//! constraints := ("Subject To" | "Such That" | "st" | "s.t.") ([name ":"] expr op [sign] number)*
//! bounds      := "Bounds" bound*            one bound per line
//! bound       := var "free" | var op value | value op var | value op var op value
//! integers    := ("General" | "Generals" | "Gen" | "Integer" | "Integers") var*
//!              | ("Binary" | "Binaries" | "Bin") var*
//! expr        := [sign] term (sign term)*
//! term        := [number] var
//! op          := "<=" | "=<" | "<" | ">=" | "=>" | ">" | "="
//! value       := [sign] number | [sign] ("inf" | "infinity")
//! ```
//!
//! Variables default to continuous with bounds `[0, +inf)`; binaries default
//! to `[0, 1]`. A variable that is first seen in a constraint or bound is
//! declared implicitly with those defaults. Variable order is order of first
//! appearance, so the writer lists every variable in the objective (with a
//! zero coefficient when needed) to keep the order across a round trip.
//!
//! Rejected with an "unsupported feature" error: objective constants,
//! ranged constraints, indicator constraints (`->`), quadratic terms, and
//! the `Semi-Continuous`, `SOS`, `Lazy Constraints`, `User Cuts`, `PWL` and
//! `General Constraints` sections.

use std::collections::HashMap;
use std::fmt::Write;

use super::{
    Constraint, ConstraintSense, MipInstance, ModelError, ObjectiveSense, VarKind, Variable,
};

const TERMS_PER_LINE: usize = 8;

const RESERVED: &[&str] = &[
    "minimize", "minimum", "min", "maximize", "maximum", "max", "subject", "to", "such", "that",
    "st", "s.t.", "bounds", "bound", "general", "generals", "gen", "integer", "integers",
    "binary", "binaries", "bin", "end", "free", "inf", "infinity", "semi", "semis",
    "semi-continuous", "sos", "sos1", "sos2",
];

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || "_!\"#$%&(),;?@'{}|~".contains(c)
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_ascii_digit() || c == '.' || c == '[' || c == ']'
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_name_start(c))
        && chars.all(is_name_char)
        && !RESERVED.contains(&name.to_ascii_lowercase().as_str())
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == 0.0 {
        "0".into()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn write_expr(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    for (k, (coef, name)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if coef.is_sign_negative() { "-" } else { "+" };
        if k == 0 && sign == "+" {
            let _ = write!(out, " {} {}", fmt_num(coef.abs()), name);
        } else {
            let _ = write!(out, " {} {} {}", sign, fmt_num(coef.abs()), name);
        }
    }
}

/// Serializes `instance` in the LP subset described in the module docs.
pub fn to_string(instance: &MipInstance) -> Result<String, ModelError> {
    for v in instance.variables() {
        if !valid_name(&v.name) {
            return Err(ModelError::Invalid(format!(
                "variable name `{}` is not a valid LP identifier",
                v.name
            )));
        }
    }
    for c in instance.constraints() {
        if !valid_name(&c.name) {
            return Err(ModelError::Invalid(format!(
                "constraint name `{}` is not a valid LP identifier",
                c.name
            )));
        }
    }
    let vars = instance.variables();
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem name: {}", instance.name());
    out.push_str(match instance.sense() {
        ObjectiveSense::Minimize => "Minimize\n",
        ObjectiveSense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    write_expr(&mut out, vars.iter().map(|v| (v.objective, v.name.clone())));
    out.push('\n');

    if !instance.constraints().is_empty() {
        out.push_str("Subject To\n");
        for c in instance.constraints() {
            let _ = write!(out, " {}:", c.name);
            if c.terms.is_empty() {
                // The grammar needs at least one term.
                if let Some(v) = vars.first() {
                    let _ = write!(out, " 0 {}", v.name);
                }
            }
            write_expr(&mut out, c.terms.iter().map(|&(j, a)| (a, vars[j].name.clone())));
            let _ = writeln!(out, " {} {}", c.sense.symbol(), fmt_num(c.rhs));
        }
    }

    let bound_lines: Vec<String> = vars.iter().filter_map(bound_line).collect();
    if !bound_lines.is_empty() {
        out.push_str("Bounds\n");
        for line in bound_lines {
            let _ = writeln!(out, " {line}");
        }
    }
    for (header, kind) in [("General", VarKind::Integer), ("Binary", VarKind::Binary)] {
        let names: Vec<&str> = vars.iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{header}");
        for chunk in names.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

fn bound_line(v: &Variable) -> Option<String> {
    let (l, u) = (v.lower, v.upper);
    let default_upper = if v.kind == VarKind::Binary { 1.0 } else { f64::INFINITY };
    if l == 0.0 && u == default_upper {
        return None;
    }
    let line = if l == u {
        format!("{} = {}", v.name, fmt_num(l))
    } else if l == f64::NEG_INFINITY && u == f64::INFINITY {
        format!("{} free", v.name)
    } else if u == f64::INFINITY {
        format!("{} >= {}", v.name, fmt_num(l))
    } else {
        format!("{} <= {} <= {}", fmt_num(l), v.name, fmt_num(u))
    };
    Some(line)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Op(ConstraintSense),
    Colon,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    General,
    Binary,
    End,
}

fn unsupported(line: usize, feature: &str) -> ModelError {
    ModelError::Unsupported {
        line,
        feature: feature.into(),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        message: message.into(),
    }
}

fn section_header(line: &str, lineno: usize) -> Result<Option<Section>, ModelError> {
    let norm = line.split_whitespace().collect::<Vec<_>>().join(" ").to_ascii_lowercase();
    let section = match norm.as_str() {
        "minimize" | "minimum" | "min" | "maximize" | "maximum" | "max" => Section::Objective,
        "subject to" | "such that" | "st" | "s.t." => Section::Constraints,
        "bounds" | "bound" => Section::Bounds,
        "general" | "generals" | "gen" | "integer" | "integers" => Section::General,
        "binary" | "binaries" | "bin" => Section::Binary,
        "end" => Section::End,
        "semi-continuous" | "semi-continuous variables" | "semis" | "semi" => {
            return Err(unsupported(lineno, "semi-continuous section"))
        }
        "sos" | "sos1" | "sos2" => return Err(unsupported(lineno, "SOS section")),
        "lazy constraints" | "user cuts" => return Err(unsupported(lineno, "lazy constraints / user cuts")),
        "pwl" | "general constraints" => return Err(unsupported(lineno, "general constraints")),
        _ => return Ok(None),
    };
    Ok(Some(section))
}

fn tokenize(text: &str, lineno: usize, out: &mut Vec<(Tok, usize)>) -> Result<(), ModelError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '<' | '>' | '=' => {
                let next = chars.get(i + 1).copied();
                let (op, width) = match (c, next) {
                    ('<', Some('=')) | ('=', Some('<')) => (ConstraintSense::Le, 2),
                    ('>', Some('=')) | ('=', Some('>')) => (ConstraintSense::Ge, 2),
                    ('<', _) => (ConstraintSense::Le, 1),
                    ('>', _) => (ConstraintSense::Ge, 1),
                    _ => (ConstraintSense::Eq, 1),
                };
                i += width;
                Tok::Op(op)
            }
            ':' => {
                i += 1;
                Tok::Colon
            }
            '+' => {
                i += 1;
                Tok::Plus
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    return Err(unsupported(lineno, "indicator constraint"));
                }
                i += 1;
                Tok::Minus
            }
            '[' | ']' | '^' => return Err(unsupported(lineno, "quadratic terms")),
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                Tok::Num(s.parse().map_err(|_| parse_err(lineno, format!("invalid number `{s}`")))?)
            }
            c if is_name_start(c) => {
                let start = i;
                while i < chars.len() && is_name_char(chars[i]) {
                    i += 1;
                }
                Tok::Name(chars[start..i].iter().collect())
            }
            other => return Err(parse_err(lineno, format!("unexpected character `{other}`"))),
        };
        out.push((tok, lineno));
    }
    Ok(())
}

struct Reader {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    explicit_lower: Vec<bool>,
    explicit_upper: Vec<bool>,
}

impl Reader {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        self.variables.push(Variable {
            name: name.to_string(),
            lower: 0.0,
            upper: f64::INFINITY,
            kind: VarKind::Continuous,
            objective: 0.0,
        });
        self.explicit_lower.push(false);
        self.explicit_upper.push(false);
        self.index.insert(name.to_string(), self.variables.len() - 1);
        self.variables.len() - 1
    }
}

struct Cursor<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }
    fn peek2(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.0)
    }
    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |t| t.1)
    }
    fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.0);
        self.pos += 1;
        t
    }
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
    fn label(&mut self) -> Option<String> {
        if let (Some(Tok::Name(n)), Some(Tok::Colon)) = (self.peek(), self.peek2()) {
            self.pos += 2;
            return Some(n.clone());
        }
        None
    }
}

/// Parses a linear expression up to (not including) a sense operator or the
/// end of the token stream. Returns `(name, coefficient)` terms.
fn parse_expr(cur: &mut Cursor, context: &str) -> Result<Vec<(String, f64)>, ModelError> {
    let mut terms = Vec::new();
    loop {
        match cur.peek() {
            None | Some(Tok::Op(_)) => break,
            _ => {}
        }
        let line = cur.line();
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = cur.peek() {
            if *t == Tok::Minus {
                sign = -sign;
            }
            saw_sign = true;
            cur.bump();
        }
        if !terms.is_empty() && !saw_sign {
            return Err(parse_err(line, format!("expected `+` or `-` between terms in {context}")));
        }
        match cur.bump() {
            Some(Tok::Num(v)) => match cur.peek() {
                Some(Tok::Name(n)) => {
                    terms.push((n.clone(), sign * v));
                    cur.bump();
                }
                _ => {
                    let what = if context == "objective" {
                        "objective constant"
                    } else {
                        "constant term on the left-hand side"
                    };
                    return Err(unsupported(line, what));
                }
            },
            Some(Tok::Name(n)) => terms.push((n.clone(), sign)),
            Some(other) => return Err(parse_err(line, format!("unexpected {other:?} in {context}"))),
            None => return Err(parse_err(line, format!("dangling sign in {context}"))),
        }
    }
    Ok(terms)
}

fn parse_signed_value(cur: &mut Cursor) -> Result<f64, ModelError> {
    let line = cur.line();
    let mut sign = 1.0;
    while let Some(t @ (Tok::Plus | Tok::Minus)) = cur.peek() {
        if *t == Tok::Minus {
            sign = -sign;
        }
        cur.bump();
    }
    match cur.bump() {
        Some(Tok::Num(v)) => Ok(sign * v),
        Some(Tok::Name(n)) if is_infinity(n) => Ok(sign * f64::INFINITY),
        other => Err(parse_err(line, format!("expected a number, found {other:?}"))),
    }
}

fn is_infinity(name: &str) -> bool {
    matches!(name.to_ascii_lowercase().as_str(), "inf" | "infinity")
}

fn is_value_start(tok: Option<&Tok>) -> bool {
    match tok {
        Some(Tok::Num(_) | Tok::Plus | Tok::Minus) => true,
        Some(Tok::Name(n)) => is_infinity(n),
        _ => false,
    }
}

/// Parses LP text. `default_name` is used when the file carries no
/// `\ Problem name:` comment.
pub fn from_str(text: &str, default_name: &str) -> Result<MipInstance, ModelError> {
    let mut name = default_name.to_string();
    let mut sense = None;
    let mut section: Option<Section> = None;
    let mut objective_toks = Vec::new();
    let mut constraint_toks = Vec::new();
    let mut bound_lines: Vec<(Vec<(Tok, usize)>, usize)> = Vec::new();
    let mut general_toks = Vec::new();
    let mut binary_toks = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let (content, comment) = match raw.find('\\') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if let (None, Some(c)) = (section, comment) {
            if let Some(rest) = c.trim().strip_prefix("Problem name:") {
                name = rest.trim().to_string();
            }
        }
        if content.trim().is_empty() {
            continue;
        }
        if let Some(next) = section_header(content, lineno)? {
            if next == Section::Objective {
                if sense.is_some() {
                    return Err(parse_err(lineno, "second objective section"));
                }
                let lower = content.trim().to_ascii_lowercase();
                sense = Some(if lower.starts_with("min") {
                    ObjectiveSense::Minimize
                } else {
                    ObjectiveSense::Maximize
                });
            } else if sense.is_none() {
                return Err(parse_err(lineno, "expected an objective section first"));
            }
            section = Some(next);
            continue;
        }
        let target = match section {
            None => return Err(parse_err(lineno, "expected `Minimize` or `Maximize`")),
            Some(Section::End) => return Err(parse_err(lineno, "content after `End`")),
            Some(Section::Objective) => &mut objective_toks,
            Some(Section::Constraints) => &mut constraint_toks,
            Some(Section::General) => &mut general_toks,
            Some(Section::Binary) => &mut binary_toks,
            Some(Section::Bounds) => {
                let mut toks = Vec::new();
                tokenize(content, lineno, &mut toks)?;
                bound_lines.push((toks, lineno));
                continue;
            }
        };
        tokenize(content, lineno, target)?;
    }
    let Some(sense) = sense else {
        return Err(parse_err(last_line.max(1), "missing objective section"));
    };
    if section != Some(Section::End) {
        return Err(parse_err(last_line.max(1), "missing `End`"));
    }

    let mut reader = Reader {
        variables: Vec::new(),
        index: HashMap::new(),
        explicit_lower: Vec::new(),
        explicit_upper: Vec::new(),
    };

    let mut cur = Cursor {
        toks: &objective_toks,
        pos: 0,
        last_line,
    };
    cur.label();
    for (n, c) in parse_expr(&mut cur, "objective")? {
        let j = reader.var(&n);
        reader.variables[j].objective += c;
    }
    if !cur.at_end() {
        return Err(parse_err(cur.line(), "unexpected operator in objective"));
    }

    let mut constraints: Vec<Constraint> = Vec::new();
    let mut cur = Cursor {
        toks: &constraint_toks,
        pos: 0,
        last_line,
    };
    while !cur.at_end() {
        let line = cur.line();
        let cname = cur.label().unwrap_or_else(|| format!("R{}", constraints.len() + 1));
        let terms = parse_expr(&mut cur, "constraint")?;
        if terms.is_empty() {
            return Err(parse_err(line, "constraint without terms"));
        }
        let op = match cur.bump() {
            Some(Tok::Op(op)) => *op,
            _ => return Err(parse_err(line, "constraint without a sense operator")),
        };
        let rhs = parse_signed_value(&mut cur)?;
        if !rhs.is_finite() {
            return Err(parse_err(line, "infinite right-hand side"));
        }
        if let Some(Tok::Op(_)) = cur.peek() {
            return Err(unsupported(line, "ranged constraint"));
        }
        let terms = terms.into_iter().map(|(n, c)| (reader.var(&n), c)).collect();
        constraints.push(Constraint {
            name: cname,
            terms,
            sense: op,
            rhs,
        });
    }

    for (toks, lineno) in &bound_lines {
        parse_bound(&mut reader, toks, *lineno)?;
    }

    for (toks, kind) in [(&general_toks, VarKind::Integer), (&binary_toks, VarKind::Binary)] {
        for (tok, line) in toks {
            let Tok::Name(n) = tok else {
                return Err(parse_err(*line, format!("expected a variable name, found {tok:?}")));
            };
            let j = reader.var(n);
            reader.variables[j].kind = kind;
        }
    }
    for j in 0..reader.variables.len() {
        if reader.variables[j].kind == VarKind::Binary {
            if !reader.explicit_upper[j] {
                reader.variables[j].upper = 1.0;
            }
            if !reader.explicit_lower[j] {
                reader.variables[j].lower = 0.0;
            }
        }
    }

    MipInstance::new(name, sense, reader.variables, constraints)
}

fn parse_bound(reader: &mut Reader, toks: &[(Tok, usize)], line: usize) -> Result<(), ModelError> {
    let mut cur = Cursor {
        toks,
        pos: 0,
        last_line: line,
    };
    let set = |reader: &mut Reader, name: &str, op: ConstraintSense, value: f64, var_on_left: bool| {
        let j = reader.var(name);
        // `v <= x` bounds x from below.
        let op = match (op, var_on_left) {
            (ConstraintSense::Le, false) => ConstraintSense::Ge,
            (ConstraintSense::Ge, false) => ConstraintSense::Le,
            (op, _) => op,
        };
        match op {
            ConstraintSense::Ge => {
                reader.variables[j].lower = value;
                reader.explicit_lower[j] = true;
            }
            ConstraintSense::Le => {
                reader.variables[j].upper = value;
                reader.explicit_upper[j] = true;
            }
            ConstraintSense::Eq => {
                reader.variables[j].lower = value;
                reader.variables[j].upper = value;
                reader.explicit_lower[j] = true;
                reader.explicit_upper[j] = true;
            }
        }
    };

    if is_value_start(cur.peek()) {
        let value = parse_signed_value(&mut cur)?;
        let Some(Tok::Op(op)) = cur.bump() else {
            return Err(parse_err(line, "expected an operator in bound"));
        };
        let Some(Tok::Name(name)) = cur.bump() else {
            return Err(parse_err(line, "expected a variable in bound"));
        };
        set(reader, name, *op, value, false);
        if let Some(Tok::Op(op2)) = cur.peek() {
            cur.bump();
            let v2 = parse_signed_value(&mut cur)?;
            set(reader, name, *op2, v2, true);
        }
    } else {
        let Some(Tok::Name(name)) = cur.bump() else {
            return Err(parse_err(line, "expected a variable in bound"));
        };
        match cur.bump() {
            Some(Tok::Name(kw)) if kw.eq_ignore_ascii_case("free") => {
                let j = reader.var(name);
                reader.variables[j].lower = f64::NEG_INFINITY;
                reader.variables[j].upper = f64::INFINITY;
                reader.explicit_lower[j] = true;
                reader.explicit_upper[j] = true;
            }
            Some(Tok::Op(op)) => {
                let value = parse_signed_value(&mut cur)?;
                set(reader, name, *op, value, true);
            }
            _ => return Err(parse_err(line, "malformed bound")),
        }
    }
    if !cur.at_end() {
        return Err(parse_err(line, "trailing tokens in bound"));
    }
    Ok(())
}
