//! Line-oriented `key = value` system files.
//!
//! ```text
//! n = 2
//! h = x1
//! f = [2*lam^2 - 1, -lam]      # or fplus / fminus / g
//! x0 = [0.5, 0]
//! t_span = [0, 10]
//! ```

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use switchlayer::expr::{Bindings, ExprError, Var};
use switchlayer::{parse, Expr, FieldForm, ModelError, SwitchedSystem};

const KEYS: [&str; 8] = ["n", "h", "f", "fplus", "fminus", "g", "x0", "t_span"];

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub system: SwitchedSystem,
    pub x0: Vec<f64>,
    pub t_span: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {reason}")]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

struct Entry<'a> {
    line: usize,
    key_col: usize,
    value: &'a str,
    value_col: usize,
}

struct Item<'a> {
    text: &'a str,
    col: usize,
}

fn err(line: usize, column: usize, reason: impl Into<String>) -> ConfigError {
    ConfigError { line, column, reason: reason.into() }
}

fn col_of(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

fn expr_reason(e: &ExprError) -> String {
    match e {
        ExprError::Syntax { msg, .. } => msg.clone(),
        ExprError::UnknownIdentifier { name, .. } => format!("unknown identifier `{name}`"),
        ExprError::Arity { name, got, .. } => format!("function `{name}` takes 1 argument, got {got}"),
        ExprError::Domain { kind, .. } => kind.to_string(),
    }
}

impl<'a> Entry<'a> {
    fn items(&self) -> Result<Vec<Item<'a>>, ConfigError> {
        let v = self.value;
        if !v.starts_with('[') {
            return Err(err(self.line, self.value_col, "expected `[`"));
        }
        if !v.ends_with(']') {
            return Err(err(self.line, self.value_col + v.chars().count() - 1, "expected `]` at end of vector"));
        }
        let inner = &v[1..v.len() - 1];
        let base = self.value_col + 1;
        if inner.trim().is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let (mut depth, mut start) = (0i32, 0usize);
        let push = |s: usize, e: usize, out: &mut Vec<Item<'a>>| {
            let raw = &inner[s..e];
            let lead = raw.len() - raw.trim_start().len();
            let col = base + inner[..s + lead].chars().count();
            if raw.trim().is_empty() {
                return Err(err(self.line, col, "empty vector element"));
            }
            out.push(Item { text: raw.trim(), col });
            Ok(())
        };
        for (i, c) in inner.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    push(start, i, &mut out)?;
                    start = i + 1;
                }
                _ => {}
            }
        }
        push(start, inner.len(), &mut out)?;
        Ok(out)
    }
}

fn parse_expr(line: usize, item: &Item, n: usize) -> Result<Expr, ConfigError> {
    parse(item.text, n).map_err(|e| {
        let byte = e.pos().min(item.text.len());
        err(line, item.col + item.text[..byte].chars().count(), expr_reason(&e))
    })
}

fn constant(line: usize, item: &Item, n: usize) -> Result<f64, ConfigError> {
    let e = parse_expr(line, item, n)?;
    if e.max_state_index() > 0 || e.depends_on(Var::T) || e.depends_on(Var::Lam) {
        return Err(err(line, item.col, "expected a constant"));
    }
    let zeros = vec![0.0; n];
    e.eval(&Bindings::new(&zeros, 0.0, 0.0)).map_err(|e| err(line, item.col, expr_reason(&e)))
}

/// Parses and validates a system file.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    let mut last_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let c = col_of(raw, content.len() - content.trim_start().len());
            return Err(err(line, c, "expected `key = value`"));
        };
        let key_raw = &content[..eq];
        let key = key_raw.trim();
        let key_col = col_of(raw, key_raw.len() - key_raw.trim_start().len());
        if !KEYS.contains(&key) {
            return Err(err(line, key_col, format!("unknown key `{key}`")));
        }
        if let Some(prev) = entries.get(key) {
            return Err(err(line, key_col, format!("duplicate key `{key}` (first set on line {})", prev.line)));
        }
        let val_raw = &content[eq + 1..];
        let lead = val_raw.len() - val_raw.trim_start().len();
        let value = val_raw.trim();
        if value.is_empty() {
            return Err(err(line, col_of(raw, eq + 1), format!("missing value for `{key}`")));
        }
        entries.insert(key, Entry { line, key_col, value, value_col: col_of(raw, eq + 1 + lead) });
    }
    let end = last_line;
    let need = |k: &str| entries.get(k).ok_or_else(|| err(end, 1, format!("missing key `{k}`")));

    let ne = need("n")?;
    let n: usize = ne
        .value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| err(ne.line, ne.value_col, "`n` must be a positive integer"))?;

    let he = need("h")?;
    let h = parse_expr(he.line, &Item { text: he.value, col: he.value_col }, n)?;

    let has = |k: &str| entries.contains_key(k);
    let split_keys = ["fplus", "fminus", "g"];
    let mut field_items: HashMap<&str, (usize, Vec<usize>)> = HashMap::new();
    let mut vector = |k: &'static str| -> Result<Vec<Expr>, ConfigError> {
        let e = &entries[k];
        let items = e.items()?;
        let exprs = items.iter().map(|it| parse_expr(e.line, it, n)).collect::<Result<Vec<_>, _>>()?;
        field_items.insert(k, (e.line, items.iter().map(|it| it.col).collect()));
        Ok(exprs)
    };
    let form = if has("f") {
        if let Some(k) = split_keys.iter().find(|k| has(k)) {
            let e = &entries[*k];
            return Err(err(e.line, e.key_col, format!("`{k}` cannot be combined with `f`")));
        }
        FieldForm::Combined { f: vector("f")? }
    } else if split_keys.iter().any(|k| has(k)) {
        if let Some(k) = split_keys.iter().find(|k| !has(k)) {
            let present = split_keys.iter().find(|k| has(k)).unwrap();
            let e = &entries[*present];
            return Err(err(e.line, e.key_col, format!("split form needs `{k}` alongside `{present}`")));
        }
        FieldForm::Split { fplus: vector("fplus")?, fminus: vector("fminus")?, g: vector("g")? }
    } else {
        return Err(err(end, 1, "missing key `f` (or `fplus`, `fminus`, `g`)"));
    };

    let system = SwitchedSystem::new(n, h, form).map_err(|e| {
        let at = |field: &str, index: Option<usize>| -> (usize, usize) {
            if field == "h" {
                return (he.line, he.value_col);
            }
            match field_items.get(field) {
                Some((line, cols)) => (*line, index.and_then(|i| cols.get(i).copied()).unwrap_or(entries[field].value_col)),
                None => (end, 1),
            }
        };
        let (line, column) = match &e {
            ModelError::SwitchDependsOn(_) => (he.line, he.value_col),
            ModelError::Dimension { field, .. } => at(field, None),
            ModelError::OneSidedDependsOnLam { field, index }
            | ModelError::NonsmoothInLam { field, index }
            | ModelError::StateOutOfRange { field, index, .. } => at(field, Some(*index)),
            _ => (ne.line, ne.value_col),
        };
        err(line, column, e.to_string())
    })?;

    let xe = need("x0")?;
    let x0 = xe.items()?.iter().map(|it| constant(xe.line, it, n)).collect::<Result<Vec<_>, _>>()?;
    if x0.len() != n {
        return Err(err(xe.line, xe.value_col, format!("`x0` has {} components, expected {n}", x0.len())));
    }

    let te = need("t_span")?;
    let ts = te.items()?.iter().map(|it| constant(te.line, it, n)).collect::<Result<Vec<_>, _>>()?;
    let t_span = match ts[..] {
        [a, b] if b > a && a.is_finite() && b.is_finite() => (a, b),
        [_, _] => return Err(err(te.line, te.value_col, "`t_span` must be increasing")),
        _ => return Err(err(te.line, te.value_col, "`t_span` needs two entries")),
    };
    Ok(Config { system, x0, t_span })
}

fn write_vec<T: fmt::Display>(out: &mut String, key: &str, v: &[T]) {
    let items: Vec<String> = v.iter().map(|e| e.to_string()).collect();
    let _ = writeln!(out, "{key} = [{}]", items.join(", "));
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

/// Inverse of [`parse_config`]: parsing the output gives an equal system.
pub fn serialize_config(c: &Config) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n = {}", c.system.dim());
    let _ = writeln!(out, "h = {}", c.system.h());
    match c.system.form() {
        FieldForm::Combined { f } => write_vec(&mut out, "f", f),
        FieldForm::Split { fplus, fminus, g } => {
            write_vec(&mut out, "fplus", fplus);
            write_vec(&mut out, "fminus", fminus);
            write_vec(&mut out, "g", g);
        }
    }
    let x0: Vec<String> = c.x0.iter().map(|&v| fmt_f64(v)).collect();
    write_vec(&mut out, "x0", &x0);
    write_vec(&mut out, "t_span", &[fmt_f64(c.t_span.0), fmt_f64(c.t_span.1)]);
    out
}
