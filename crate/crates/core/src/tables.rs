//! Reference grids and their generators.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::analytic::{degree2_bound, degree3_bound, mub_degree4_bound, sr_bound, sr_from_eta, transfer_to_g};
use crate::conic::DEFAULT_TOL;
use crate::hierarchy;
use crate::measurements::mub_set;
use crate::robustness::{solve_robustness, RobustnessMeasure};

macro_rules! data {
    ($name:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/", $name))
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableId {
    /// Analytic steering-robustness bounds.
    Ia,
    /// Steering-robustness bounds from the level-3 hierarchy.
    Ib,
    /// Degree-four MUB bounds on the depolarising robustness.
    II,
    /// All bounds for five four-dimensional measurements.
    Summary,
}

impl FromStr for TableId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ia" => Ok(TableId::Ia),
            "ib" => Ok(TableId::Ib),
            "ii" => Ok(TableId::II),
            "summary" => Ok(TableId::Summary),
            _ => Err(format!("unknown table '{s}' (expected Ia, Ib, II or summary)")),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableId::Ia => "Ia",
            TableId::Ib => "Ib",
            TableId::II => "II",
            TableId::Summary => "summary",
        })
    }
}

impl TableId {
    /// Tolerance on the deviation from the printed values.
    pub fn tolerance(&self) -> f64 {
        match self {
            TableId::Ia => 5e-5,
            TableId::II => 1e-4,
            TableId::Ib | TableId::Summary => 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedCell {
    pub k: u32,
    pub d: u32,
    pub value: f64,
    pub construction: String,
}

fn default_construction(id: TableId) -> &'static str {
    match id {
        TableId::Ia => "deg3",
        TableId::Ib => "hierarchy_t3",
        TableId::II => "deg4_mub",
        TableId::Summary => "",
    }
}

/// Printed values, in the order of the grid.
pub fn expected(id: TableId) -> Vec<ExpectedCell> {
    let text = match id {
        TableId::Ia => data!("table_ia.csv"),
        TableId::Ib => data!("table_ib.csv"),
        TableId::II => data!("table_ii.csv"),
        TableId::Summary => data!("summary.csv"),
    };
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("k,"))
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            ExpectedCell {
                k: f[0].parse().unwrap(),
                d: f[1].parse().unwrap(),
                value: f[2].parse().unwrap(),
                construction: f.get(3).map_or(default_construction(id), |s| s.trim()).to_string(),
            }
        })
        .collect()
}

/// One computed cell; `value` is `None` when its computation failed.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub k: u32,
    pub d: u32,
    pub construction: String,
    pub value: Option<f64>,
    pub expected: f64,
    pub error: Option<String>,
    pub skipped: bool,
}

impl TableRow {
    pub fn deviation(&self) -> Option<f64> {
        self.value.map(|v| (v - self.expected).abs())
    }
}

#[derive(Clone, Debug)]
pub struct TableOptions {
    pub include_slow: bool,
    pub tol: f64,
    /// Worker threads; 0 means the available parallelism.
    pub workers: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { include_slow: false, tol: DEFAULT_TOL, workers: 0 }
    }
}

/// Cells taking more than a few seconds.
pub fn is_slow(id: TableId, cell: &ExpectedCell) -> bool {
    match id {
        TableId::Ib => cell.k >= 4,
        TableId::Summary => matches!(cell.construction.as_str(), "hierarchy_t3" | "mub_exact"),
        _ => false,
    }
}

fn compute(id: TableId, cell: &ExpectedCell, tol: f64) -> Result<f64, String> {
    let (k, d) = (cell.k, cell.d);
    let e = |e: &dyn fmt::Display| e.to_string();
    match (id, cell.construction.as_str()) {
        (TableId::Ia, _) => sr_bound::<f64>(k, d).map_err(|x| e(&x)),
        (TableId::Ib, _) => {
            let b = hierarchy::solve_level(k as usize, d, 3, tol).map_err(|x| e(&x))?;
            sr_from_eta(b.value).map_err(|x| e(&x))
        }
        (TableId::II, _) => mub_degree4_bound(k, d).map(|b| b.bound.value).map_err(|x| e(&x)),
        (TableId::Summary, "deg2") => {
            let v = degree2_bound::<f64>(k, d).map_err(|x| e(&x))?.value;
            transfer_to_g(v, d).map_err(|x| e(&x))
        }
        (TableId::Summary, "deg3") => degree3_bound::<f64>(k, d).map(|b| b.value).map_err(|x| e(&x)),
        (TableId::Summary, "deg4_mub") => {
            let v = mub_degree4_bound(k, d).map_err(|x| e(&x))?.bound.value;
            transfer_to_g(v, d).map_err(|x| e(&x))
        }
        (TableId::Summary, "mub_exact") => {
            let set = mub_set(d as usize, k as usize).map_err(|x| e(&x))?;
            solve_robustness(&set, RobustnessMeasure::G, tol).map(|r| r.eta).map_err(|x| e(&x))
        }
        (TableId::Summary, c) if c.starts_with("hierarchy_t") => {
            let t: usize = c["hierarchy_t".len()..].parse().map_err(|_| format!("bad level in '{c}'"))?;
            hierarchy::solve_level(k as usize, d, t, tol).map(|b| b.value).map_err(|x| e(&x))
        }
        (_, c) => Err(format!("unknown construction '{c}'")),
    }
}

/// Computes every cell, in parallel, returning rows in grid order.
/// `progress` sees each row as it finishes.
pub fn generate(id: TableId, opts: &TableOptions, progress: &(dyn Fn(&TableRow) + Sync)) -> Vec<TableRow> {
    let cells = expected(id);
    let workers = match opts.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(cells.len().max(1));
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<TableRow>>> = Mutex::new(vec![None; cells.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = cells.get(i) else { break };
                let skipped = is_slow(id, cell) && !opts.include_slow;
                let (value, error) = if skipped {
                    (None, None)
                } else {
                    match compute(id, cell, opts.tol) {
                        Ok(v) => (Some(v), None),
                        Err(msg) => (None, Some(msg)),
                    }
                };
                let row = TableRow {
                    k: cell.k,
                    d: cell.d,
                    construction: cell.construction.clone(),
                    value,
                    expected: cell.value,
                    error,
                    skipped,
                };
                progress(&row);
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });
    rows.into_inner().unwrap().into_iter().map(Option::unwrap).collect()
}

/// `k,d,value,construction` with values rounded to 4 decimals; failed
/// cells read `failed`, skipped ones `skipped`.
pub fn to_csv(rows: &[TableRow]) -> String {
    let mut s = String::from("k,d,value,construction\n");
    for r in rows {
        let v = match (&r.value, r.skipped) {
            (Some(v), _) => format!("{v:.4}"),
            (None, true) => "skipped".into(),
            (None, false) => "failed".into(),
        };
        s.push_str(&format!("{},{},{},{}\n", r.k, r.d, v, r.construction));
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckSummary {
    pub compared: usize,
    pub skipped: usize,
    pub failed: usize,
    pub max_deviation: f64,
    /// Cells outside the tolerance: (k, d, construction, deviation).
    pub outside: Vec<(u32, u32, String, f64)>,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.failed == 0 && self.outside.is_empty()
    }
}

pub fn check(id: TableId, rows: &[TableRow]) -> CheckSummary {
    let tol = id.tolerance();
    let mut out = CheckSummary { compared: 0, skipped: 0, failed: 0, max_deviation: 0.0, outside: Vec::new() };
    for r in rows {
        match r.deviation() {
            Some(dev) => {
                out.compared += 1;
                out.max_deviation = out.max_deviation.max(dev);
                if dev > tol {
                    out.outside.push((r.k, r.d, r.construction.clone(), dev));
                }
            }
            None if r.skipped => out.skipped += 1,
            None => out.failed += 1,
        }
    }
    out
}
