//! TOML model files.
//!
//! ```toml
//! d = 1
//! a_dagger = 1.0
//! breakpoints = [0.0, 0.5, 1.0]     # optional, defaults to [0, a_dagger]
//! beta = "exp(-2*a)*(1 - alpha)"    # d = 1: one string; d > 1: d×d array of strings
//! b = "0"
//! delta = "-1"
//!
//! [splitting]                       # optional, defaults to R0
//! name = "TypeReproduction"         # R0 | TypeReproduction | Custom
//! route = "horizontal"              # TypeReproduction: horizontal | vertical
//! # Custom: plus = ["beta"], minus = ["b"]
//! ```
//!
//! Omitted coefficients are zero. `b` and `delta` may only use `a`.

use std::path::Path;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::expr::{parse_coefficient, EvalContext, Expr};
use crate::model::{check_breakpoints, Kernel, Model, Rate, Route, SplittingSpec, Term};

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub model: Model,
    pub splitting: SplittingSpec,
}

pub fn load_config(path: &Path) -> Result<ModelConfig> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::ConfigNotFound(path.to_path_buf()))
        }
        Err(e) => return Err(e.into()),
    };
    parse_config(&text)
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    /// 1-based line of the first `key =` in the source.
    fn line_of(&self, key: &str) -> Option<usize> {
        self.src.lines().position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
    }

    fn err(&self, field: &str, message: impl Into<String>) -> Error {
        let key = field.rsplit('.').next().unwrap_or(field);
        Error::Config {
            field: field.to_string(),
            line: self.line_of(key),
            message: message.into(),
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

pub fn parse_config(text: &str) -> Result<ModelConfig> {
    let ctx = Ctx { src: text };
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        Error::Config {
            field: "<document>".into(),
            line,
            message: e.message().to_string(),
        }
    })?;

    for key in table.keys() {
        if !["d", "a_dagger", "breakpoints", "beta", "b", "delta", "splitting"].contains(&key.as_str()) {
            return Err(ctx.err(key, "unknown field"));
        }
    }

    let d = match table.get("d") {
        Some(Value::Integer(d)) if *d >= 1 => *d as usize,
        Some(_) => return Err(ctx.err("d", "must be a positive integer")),
        None => return Err(ctx.err("d", "missing")),
    };
    let a_dagger = match table.get("a_dagger").map(as_f64) {
        Some(Some(v)) if v.is_finite() && v > 0.0 => v,
        Some(_) => return Err(ctx.err("a_dagger", "must be a positive number")),
        None => return Err(ctx.err("a_dagger", "missing")),
    };
    let breakpoints = match table.get("breakpoints") {
        None => vec![0.0, a_dagger],
        Some(Value::Array(items)) => {
            let bp: Option<Vec<f64>> = items.iter().map(as_f64).collect();
            let bp = bp.ok_or_else(|| ctx.err("breakpoints", "must be an array of numbers"))?;
            check_breakpoints(&bp, a_dagger).map_err(|e| ctx.err("breakpoints", e.to_string()))?;
            bp
        }
        Some(_) => return Err(ctx.err("breakpoints", "must be an array of numbers")),
    };

    let beta = expr_matrix(&ctx, &table, "beta", d, true)?;
    let b = expr_matrix(&ctx, &table, "b", d, false)?;
    let delta = expr_matrix(&ctx, &table, "delta", d, false)?;

    let splitting = match table.get("splitting") {
        None => SplittingSpec::R0,
        Some(Value::Table(t)) => parse_splitting(&ctx, t)?,
        Some(_) => return Err(ctx.err("splitting", "must be a table")),
    };

    Ok(ModelConfig {
        model: Model {
            d,
            a_dagger,
            beta: kernel_from(beta, d, a_dagger),
            b: rate_from(b, d, a_dagger),
            delta: rate_from(delta, d, a_dagger),
            breakpoints,
        },
        splitting,
    })
}

/// Row-major entries; `None` marks literal zeros.
type ExprMatrix = Vec<Option<Expr>>;

fn expr_matrix(ctx: &Ctx, table: &Table, field: &str, d: usize, kernel: bool) -> Result<ExprMatrix> {
    let parse = |s: &str| -> Result<Option<Expr>> {
        let e = parse_coefficient(s).map_err(|e| ctx.err(field, format!("`{s}`: {e}")))?;
        if !kernel && e.uses_source_age() {
            return Err(ctx.err(field, format!("`{s}`: alpha is only available in beta")));
        }
        Ok((!e.is_zero_literal()).then_some(e))
    };
    match table.get(field) {
        None => Ok(vec![None; d * d]),
        Some(Value::String(s)) if d == 1 => Ok(vec![parse(s)?]),
        Some(Value::Array(rows)) if rows.len() == d => {
            let mut out = Vec::with_capacity(d * d);
            for row in rows {
                match row {
                    Value::Array(cells) if cells.len() == d => {
                        for c in cells {
                            match c {
                                Value::String(s) => out.push(parse(s)?),
                                _ => return Err(ctx.err(field, "entries must be expression strings")),
                            }
                        }
                    }
                    _ => return Err(ctx.err(field, format!("must be a {d}×{d} array of strings"))),
                }
            }
            Ok(out)
        }
        Some(_) if d == 1 => Err(ctx.err(field, "must be an expression string")),
        Some(_) => Err(ctx.err(field, format!("must be a {d}×{d} array of strings"))),
    }
}

fn kernel_from(m: ExprMatrix, d: usize, a_dagger: f64) -> Kernel {
    if m.iter().all(Option::is_none) {
        return Kernel::zero(d);
    }
    Kernel::new(d, move |a, alpha, out| {
        let ctx = EvalContext { a, alpha, a_dagger };
        for (o, e) in out.iter_mut().zip(&m) {
            *o = e.as_ref().map_or(0.0, |e| e.eval(&ctx));
        }
    })
}

fn rate_from(m: ExprMatrix, d: usize, a_dagger: f64) -> Rate {
    if m.iter().all(Option::is_none) {
        return Rate::zero(d);
    }
    Rate::new(d, move |a, out| {
        let ctx = EvalContext { a, alpha: 0.0, a_dagger };
        for (o, e) in out.iter_mut().zip(&m) {
            *o = e.as_ref().map_or(0.0, |e| e.eval(&ctx));
        }
    })
}

fn parse_splitting(ctx: &Ctx, t: &Table) -> Result<SplittingSpec> {
    let name = match t.get("name") {
        Some(Value::String(s)) => s.as_str(),
        _ => return Err(ctx.err("splitting.name", "missing or not a string")),
    };
    let terms = |key: &str| -> Result<Vec<Term>> {
        match t.get(key) {
            None => Ok(vec![]),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v.as_str() {
                    Some("beta") => Ok(Term::Beta),
                    Some("b") => Ok(Term::B),
                    _ => Err(ctx.err(&format!("splitting.{key}"), "terms are \"beta\" or \"b\"")),
                })
                .collect(),
            Some(_) => Err(ctx.err(&format!("splitting.{key}"), "must be an array")),
        }
    };
    match name {
        "R0" => Ok(SplittingSpec::R0),
        "TypeReproduction" => match t.get("route").and_then(Value::as_str) {
            Some("horizontal") => Ok(SplittingSpec::TypeReproduction(Route::Horizontal)),
            Some("vertical") => Ok(SplittingSpec::TypeReproduction(Route::Vertical)),
            _ => Err(ctx.err("splitting.route", "must be \"horizontal\" or \"vertical\"")),
        },
        "Custom" => {
            let spec = SplittingSpec::Custom {
                plus: terms("plus")?,
                minus: terms("minus")?,
            };
            Ok(spec)
        }
        other => Err(ctx.err("splitting.name", format!("unknown splitting `{other}`"))),
    }
}
