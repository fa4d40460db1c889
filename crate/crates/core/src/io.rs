//! State specifications and grid export (CSV / JSON).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CMatrix, GridFn};
use crate::quasiprob::{coherent_state, DensityOperator};
use crate::schwinger::{OrderParam, PhaseSpace};
use crate::teleport::{bell_state, BellLabel, Grid4};
use crate::tomography::MarginalDistribution;

/// Input state named on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Fock(usize),
    Coherent(i64, i64),
    Bell(i64, i64),
    MaximallyMixed,
    File(PathBuf),
}

fn parse_pair(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once(',').ok_or_else(|| Error::Parse(format!("expected two labels 'a,b', got '{s}'")))?;
    let p = |x: &str| x.trim().parse::<i64>().map_err(|e| Error::Parse(format!("bad label '{x}': {e}")));
    Ok((p(a)?, p(b)?))
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "maximally-mixed" {
            return Ok(StateSpec::MaximallyMixed);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("unknown state '{s}'")))?;
        match kind {
            "fock" => rest
                .trim()
                .parse()
                .map(StateSpec::Fock)
                .map_err(|e| Error::Parse(format!("bad number-state index '{rest}': {e}"))),
            "coherent" => parse_pair(rest).map(|(a, b)| StateSpec::Coherent(a, b)),
            "bell" => parse_pair(rest).map(|(a, b)| StateSpec::Bell(a, b)),
            "file" if !rest.is_empty() => Ok(StateSpec::File(PathBuf::from(rest))),
            _ => Err(Error::Parse(format!("unknown state '{s}'"))),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Fock(n) => write!(f, "fock:{n}"),
            StateSpec::Coherent(a, b) => write!(f, "coherent:{a},{b}"),
            StateSpec::Bell(a, b) => write!(f, "bell:{a},{b}"),
            StateSpec::MaximallyMixed => write!(f, "maximally-mixed"),
            StateSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl StateSpec {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, StateSpec::Bell(..))
    }

    /// Single-system density operator on `ps`.
    pub fn density(&self, ps: &PhaseSpace) -> Result<DensityOperator> {
        let dim = ps.dim();
        match self {
            StateSpec::Fock(n) => DensityOperator::fock(ps, *n),
            StateSpec::Coherent(a, b) => DensityOperator::pure(&coherent_state(ps, *a, *b)?),
            StateSpec::MaximallyMixed => Ok(DensityOperator::maximally_mixed(dim)),
            StateSpec::File(path) => {
                let rho = read_density_matrix(path)?;
                if rho.n() != dim.n() {
                    return Err(Error::DimensionMismatch(format!("file holds a {}-dimensional state, expected {}", rho.n(), dim.n())));
                }
                Ok(rho)
            }
            StateSpec::Bell(..) => Err(Error::DimensionMismatch("a Bell state lives on two subsystems".into())),
        }
    }

    /// Two-system density matrix (`N^2` dimensions); single-system specs are
    /// rejected.
    pub fn bipartite(&self, ps: &PhaseSpace) -> Result<CMatrix> {
        match self {
            StateSpec::Bell(a, b) => Ok(CMatrix::projector(&bell_state(BellLabel::new(*a, *b, ps.dim()), ps.dim()))),
            _ => Err(Error::DimensionMismatch(format!("'{self}' is a single-system state"))),
        }
    }
}

/// Density matrix from a JSON array of rows of `[re, im]` pairs.
pub fn read_density_matrix(path: &Path) -> Result<DensityOperator> {
    let text = std::fs::read_to_string(path)?;
    parse_density_matrix(&text)
}

pub fn parse_density_matrix(text: &str) -> Result<DensityOperator> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)?;
    let rows = rows.into_iter().map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect()).collect();
    DensityOperator::new(CMatrix::from_rows(rows)?)
}

pub fn density_matrix_json(rho: &CMatrix) -> String {
    let rows: Vec<Vec<[f64; 2]>> = rho.rows().iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
    serde_json::to_string(&rows).expect("plain numbers serialize")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    PhaseFn,
    CharFn,
    Kernel,
    Marginal,
    BipartitePhaseFn,
}

impl GridKind {
    fn arity(self) -> usize {
        match self {
            GridKind::Marginal => 1,
            GridKind::BipartitePhaseFn => 4,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label1: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label2: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label3: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label4: Option<i64>,
    pub re: f64,
    pub im: f64,
}

/// Printed precision of exported numbers.
pub const SIGNIFICANT_DIGITS: usize = 15;

fn fmt_num(x: f64) -> String {
    // -0 prints as 0 so identical grids give identical bytes
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
}

fn round_sig(x: f64) -> f64 {
    fmt_num(x).parse().expect("formatted float parses")
}

/// Exported table, rows in row-major centered-label order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridExport {
    pub dim: usize,
    /// Ordering parameter as `"re,im"`.
    pub s: String,
    pub kind: GridKind,
    pub data: Vec<Row>,
}

impl GridExport {
    fn build(dim: usize, s: OrderParam, kind: GridKind, rows: impl Iterator<Item = (Vec<i64>, C64)>) -> Self {
        let data = rows
            .map(|(l, v)| Row {
                label1: l[0],
                label2: l.get(1).copied(),
                label3: l.get(2).copied(),
                label4: l.get(3).copied(),
                re: round_sig(v.re),
                im: round_sig(v.im),
            })
            .collect();
        Self { dim, s: s.to_string(), kind, data }
    }

    pub fn from_grid(kind: GridKind, s: OrderParam, grid: &GridFn) -> Self {
        Self::build(grid.dim().n(), s, kind, grid.iter().map(|(a, b, v)| (vec![a, b], v)))
    }

    pub fn from_marginal(m: &MarginalDistribution) -> Self {
        let d = m.dim();
        Self::build(d.n(), m.s, GridKind::Marginal, d.labels().map(|l| (vec![l], m.get(l))))
    }

    pub fn from_grid4(s: OrderParam, grid: &Grid4) -> Self {
        Self::build(grid.dim().n(), s, GridKind::BipartitePhaseFn, grid.iter().map(|(a, b, c, d, v)| (vec![a, b, c, d], v)))
    }

    pub fn order_param(&self) -> Result<OrderParam> {
        self.s.parse()
    }

    pub fn values(&self) -> Vec<C64> {
        self.data.iter().map(|r| C64::new(r.re, r.im)).collect()
    }

    fn header(kind: GridKind) -> &'static str {
        if kind == GridKind::BipartitePhaseFn {
            "label1,label2,label3,label4,re,im"
        } else {
            "label1,label2,re,im"
        }
    }

    /// CSV with the grid metadata kept in the JSON form only; marginal rows
    /// leave `label2` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::header(self.kind));
        out.push('\n');
        for r in &self.data {
            let opt = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&r.label1.to_string());
            out.push(',');
            out.push_str(&opt(r.label2));
            if self.kind == GridKind::BipartitePhaseFn {
                out.push_str(&format!(",{},{}", opt(r.label3), opt(r.label4)));
            }
            out.push_str(&format!(",{},{}\n", fmt_num(r.re), fmt_num(r.im)));
        }
        out
    }

    /// Parse CSV written by [`GridExport::to_csv`]; `dim`, `s` and `kind`
    /// are not stored in CSV and must be supplied.
    pub fn from_csv(text: &str, dim: usize, s: OrderParam, kind: GridKind) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        if header.trim() != Self::header(kind) {
            return Err(Error::Parse(format!("unexpected CSV header '{header}'")));
        }
        let arity = kind.arity();
        let ncols = if kind == GridKind::BipartitePhaseFn { 6 } else { 4 };
        let mut data = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != ncols {
                return Err(Error::Parse(format!("line {}: expected {ncols} columns", i + 2)));
            }
            let label = |k: usize| -> Result<Option<i64>> {
                if k >= arity {
                    if !cols[k].is_empty() {
                        return Err(Error::Parse(format!("line {}: unexpected label", i + 2)));
                    }
                    return Ok(None);
                }
                cols[k].parse().map(Some).map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))
            };
            let num = |k: usize| -> Result<f64> { cols[k].parse().map_err(|e| Error::Parse(format!("line {}: {e}", i + 2))) };
            let (label3, label4) = if ncols == 6 { (label(2)?, label(3)?) } else { (None, None) };
            data.push(Row {
                label1: label(0)?.expect("arity >= 1"),
                label2: label(1)?,
                label3,
                label4,
                re: num(ncols - 2)?,
                im: num(ncols - 1)?,
            });
        }
        let out = Self { dim, s: s.to_string(), kind, data };
        out.validate()?;
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let out: Self = serde_json::from_str(text)?;
        out.order_param()?;
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let expected = self.dim.pow(self.kind.arity() as u32);
        if self.data.len() != expected {
            return Err(Error::Parse(format!("expected {expected} rows, found {}", self.data.len())));
        }
        Ok(())
    }
}
