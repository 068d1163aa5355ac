//! SDPA sparse format (`.dat-s`).
//!
//! The file describes `max tr(F₀Y)` subject to `tr(F_k Y) = c_k`, `Y ⪰ 0`
//! block-diagonal. PSD blocks map one-to-one; a final diagonal block holds
//! each free scalar as a difference `x⁺ − x⁻` followed by one slack per
//! inequality.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{ConicError, ConicProblem, LinExpr};

/// One `k b i j v` line (all indices 1-based, `i ≤ j`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpaEntry {
    pub constraint: usize,
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpaData {
    pub comment: Option<String>,
    /// Negative sizes are diagonal blocks.
    pub block_sizes: Vec<i64>,
    pub rhs: Vec<f64>,
    /// Sorted by (constraint, block, row, col).
    pub entries: Vec<SdpaEntry>,
}

impl SdpaData {
    pub fn constraint_count(&self) -> usize {
        self.rhs.len()
    }
}

/// Translates a problem; entry order is canonical so output is byte-stable.
pub fn to_sdpa(p: &ConicProblem) -> SdpaData {
    let ns = p.scalar_vars;
    let nineq = p.ineq_constraints.len();
    let diag_size = 2 * ns + nineq;
    let diag_block = p.psd_blocks.len() + 1;
    let mut block_sizes: Vec<i64> = p.psd_blocks.iter().map(|&n| n as i64).collect();
    if diag_size > 0 {
        block_sizes.push(-(diag_size as i64));
    }

    let mut entries = Vec::new();
    let push_expr = |k: usize, e: &LinExpr, entries: &mut Vec<SdpaEntry>| {
        let start = entries.len();
        for b in e.entries() {
            entries.push(SdpaEntry { constraint: k, block: b.block + 1, row: b.row + 1, col: b.col + 1, value: b.value });
        }
        for (s, c) in e.scalars() {
            entries.push(SdpaEntry { constraint: k, block: diag_block, row: 2 * s + 1, col: 2 * s + 1, value: c });
            entries.push(SdpaEntry { constraint: k, block: diag_block, row: 2 * s + 2, col: 2 * s + 2, value: -c });
        }
        entries[start..].sort_by_key(|e| (e.block, e.row, e.col));
    };

    push_expr(0, &p.objective, &mut entries);
    let mut rhs = Vec::with_capacity(p.constraint_count());
    let mut k = 0;
    for c in &p.eq_constraints {
        k += 1;
        push_expr(k, &c.expr, &mut entries);
        rhs.push(c.rhs);
    }
    for (t, c) in p.ineq_constraints.iter().enumerate() {
        k += 1;
        push_expr(k, &c.expr, &mut entries);
        // expr − slack = rhs; the slack sorts last within its constraint.
        let slot = 2 * ns + t + 1;
        entries.push(SdpaEntry { constraint: k, block: diag_block, row: slot, col: slot, value: -1.0 });
        rhs.push(c.rhs);
    }

    let comment = Some(if p.provenance.is_empty() { p.name.clone() } else { format!("{}: {}", p.name, p.provenance) });
    SdpaData { comment, block_sizes, rhs, entries }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_sdpa(data: &SdpaData) -> String {
    let mut s = String::new();
    if let Some(c) = &data.comment {
        writeln!(s, "\"{}", c.replace('\n', " ")).unwrap();
    }
    writeln!(s, "{}", data.constraint_count()).unwrap();
    writeln!(s, "{}", data.block_sizes.len()).unwrap();
    let sizes: Vec<String> = data.block_sizes.iter().map(|b| b.to_string()).collect();
    writeln!(s, "{}", sizes.join(" ")).unwrap();
    let rhs: Vec<String> = data.rhs.iter().map(|&v| num(v)).collect();
    writeln!(s, "{}", rhs.join(" ")).unwrap();
    for e in &data.entries {
        writeln!(s, "{} {} {} {} {}", e.constraint, e.block, e.row, e.col, num(e.value)).unwrap();
    }
    s
}

/// Writes the problem to `path` in `.dat-s` form.
pub fn export_sdpa(p: &ConicProblem, path: impl AsRef<Path>) -> Result<(), ConicError> {
    p.validate()?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(write_sdpa(&to_sdpa(p)).as_bytes())?;
    Ok(())
}

pub fn read_sdpa(path: impl AsRef<Path>) -> Result<SdpaData, ConicError> {
    parse_sdpa(&std::fs::read_to_string(path)?)
}

fn perr(line: usize, message: impl Into<String>) -> ConicError {
    ConicError::Parse { line, message: message.into() }
}

/// Parses `.dat-s` text. Comment lines start with `"` or `*`; separators
/// may be whitespace, commas or braces.
pub fn parse_sdpa(text: &str) -> Result<SdpaData, ConicError> {
    let mut comment = None;
    let eof = text.lines().count() + 1;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| {
            if let Some(c) = l.strip_prefix('"') {
                comment.get_or_insert_with(|| c.to_string());
                false
            } else {
                !l.is_empty() && !l.starts_with('*')
            }
        });
    let tokens = |l: &str| -> Vec<String> {
        l.split(|c: char| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '(' | ')'))
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    };
    let mut header = |what: &str| -> Result<(usize, Vec<String>), ConicError> {
        let (n, l) = lines.next().ok_or_else(|| perr(eof, format!("unexpected end of file, missing {what}")))?;
        Ok((n, tokens(l)))
    };

    let (n, t) = header("constraint count")?;
    let m: usize = t.first().and_then(|s| s.parse().ok()).ok_or_else(|| perr(n, "bad constraint count"))?;
    let (n, t) = header("block count")?;
    let nb: usize = t.first().and_then(|s| s.parse().ok()).ok_or_else(|| perr(n, "bad block count"))?;
    let (n, t) = header("block sizes")?;
    if t.len() < nb {
        return Err(perr(n, format!("expected {nb} block sizes")));
    }
    let block_sizes = t[..nb]
        .iter()
        .map(|s| s.parse::<i64>().ok().filter(|&v| v != 0).ok_or_else(|| perr(n, format!("bad block size '{s}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    let (n, t) = header("right-hand side")?;
    if t.len() < m {
        return Err(perr(n, format!("expected {m} right-hand-side values")));
    }
    let rhs = t[..m]
        .iter()
        .map(|s| s.parse::<f64>().map_err(|_| perr(n, format!("bad number '{s}'"))))
        .collect::<Result<Vec<_>, _>>()?;

    let mut entries = Vec::new();
    for (n, l) in lines {
        let t = tokens(l);
        if t.len() != 5 {
            return Err(perr(n, "expected `k b i j v`"));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| perr(n, format!("bad index '{s}'")));
        let (k, b, i, j) = (idx(&t[0])?, idx(&t[1])?, idx(&t[2])?, idx(&t[3])?);
        let value: f64 = t[4].parse().map_err(|_| perr(n, format!("bad number '{}'", t[4])))?;
        if k > m || b == 0 || b > nb {
            return Err(perr(n, "constraint or block index out of range"));
        }
        let size = block_sizes[b - 1].unsigned_abs() as usize;
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if i == 0 || j > size || (block_sizes[b - 1] < 0 && i != j) {
            return Err(perr(n, "entry outside its block"));
        }
        entries.push(SdpaEntry { constraint: k, block: b, row: i, col: j, value });
    }
    entries.sort_by_key(|e| (e.constraint, e.block, e.row, e.col));
    Ok(SdpaData { comment, block_sizes, rhs, entries })
}

/// Rebuilds a problem: positive blocks become PSD blocks, every diagonal
/// entry of a diagonal block a nonnegative scalar; all constraints are
/// equalities.
pub fn from_sdpa(data: &SdpaData) -> ConicProblem {
    let mut p = ConicProblem::new("sdpa", data.comment.clone().unwrap_or_default());
    // (psd index or scalar offset) per SDPA block
    let mut map = Vec::with_capacity(data.block_sizes.len());
    for &s in &data.block_sizes {
        if s > 0 {
            map.push(Ok(p.add_block(s as usize)));
        } else {
            let first = p.scalar_vars;
            for _ in 0..s.unsigned_abs() {
                let v = p.add_scalar();
                let mut e = LinExpr::new();
                e.add_scalar(v, 1.0);
                p.add_ineq(e, 0.0);
            }
            map.push(Err(first));
        }
    }
    let mut exprs = vec![LinExpr::new(); data.constraint_count() + 1];
    for e in &data.entries {
        let expr = &mut exprs[e.constraint];
        match map[e.block - 1] {
            Ok(b) => {
                expr.add_symmetric(b, e.row - 1, e.col - 1, e.value);
            }
            Err(first) => {
                expr.add_scalar(first + e.row - 1, e.value);
            }
        }
    }
    let mut exprs = exprs.into_iter();
    p.objective = exprs.next().unwrap();
    for (e, &c) in exprs.zip(&data.rhs) {
        p.add_eq(e, c);
    }
    p
}
