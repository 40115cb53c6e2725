//! Rectangular `(a, d)` scans combining the analytic criteria with lattice
//! simulation, and their CSV form.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{classify_with_gamma, gamma_fn, CriterionReport, Verdict};
use crate::cubic::Params;
use crate::error::{Error, Result};
use crate::lattice::{build_ic, estimate_speed, integrate, IcKind, SimConfig, SpeedClass};
use crate::numeric::fmt_float;
use crate::standing::csv_error;

pub const MAX_RESOLUTION: usize = 512;
pub const MAX_D: f64 = 0.07;
pub const CSV_HEADER: [&str; 7] = [
    "a",
    "d",
    "root_count",
    "criterion",
    "gamma",
    "sim_speed",
    "sim_class",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SimulatePolicy {
    Never,
    OnUndetermined,
    Always,
}

impl std::str::FromStr for SimulatePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "never" => Ok(SimulatePolicy::Never),
            "undetermined" => Ok(SimulatePolicy::OnUndetermined),
            "always" => Ok(SimulatePolicy::Always),
            other => Err(format!(
                "unknown policy {other:?}, expected never|undetermined|always"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub simulate: SimulatePolicy,
    /// Cap on the cells simulated under the policy, drawn at random.
    pub sim_budget: Option<usize>,
    /// Extra randomly drawn cells with a proven verdict that are simulated
    /// as a cross-check of the criteria.
    pub audit_budget: usize,
    pub seed: u64,
    pub sim_n: usize,
    pub sim_t_end: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            simulate: SimulatePolicy::Never,
            sim_budget: None,
            audit_budget: 0,
            seed: 0,
            sim_n: 512,
            sim_t_end: 2000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellRecord {
    pub root_count: Option<usize>,
    pub criterion: Verdict,
    pub gamma: Option<f64>,
    pub sim_speed: Option<f64>,
    pub sim_class: Option<SpeedClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionGrid {
    pub a_axis: Vec<f64>,
    pub d_axis: Vec<f64>,
    /// Row-major: all `d` for the first `a`, then the next `a`.
    pub cells: Vec<CellRecord>,
}

impl RegionGrid {
    pub fn cell(&self, i: usize, j: usize) -> &CellRecord {
        &self.cells[i * self.d_axis.len() + j]
    }

    /// Cells where a proven verdict is contradicted by the simulation.
    pub fn contradictions(&self) -> Vec<(f64, f64, CellRecord)> {
        let mut out = Vec::new();
        for (i, &a) in self.a_axis.iter().enumerate() {
            for (j, &d) in self.d_axis.iter().enumerate() {
                let c = *self.cell(i, j);
                if is_contradiction(&c) {
                    out.push((a, d, c));
                }
            }
        }
        out
    }

    pub fn write_csv_to<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        for (i, a) in self.a_axis.iter().enumerate() {
            for (j, d) in self.d_axis.iter().enumerate() {
                let c = self.cell(i, j);
                w.write_record([
                    fmt_float(*a),
                    fmt_float(*d),
                    c.root_count.map(|n| n.to_string()).unwrap_or_default(),
                    c.criterion.as_str().to_string(),
                    opt(c.gamma),
                    opt(c.sim_speed),
                    c.sim_class
                        .map(|s| s.as_str().to_string())
                        .unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv_from<R: Read>(input: R) -> std::result::Result<Self, String> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| e.to_string())?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(format!("unexpected header {header:?}"));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let float = |k: usize| {
                rec[k]
                    .parse::<f64>()
                    .map_err(|e| format!("column {}: {e}", CSV_HEADER[k]))
            };
            let opt_float = |k: usize| {
                if rec[k].is_empty() {
                    Ok(None)
                } else {
                    float(k).map(Some)
                }
            };
            let root_count = if rec[2].is_empty() {
                None
            } else {
                Some(
                    rec[2]
                        .parse::<usize>()
                        .map_err(|e| format!("root_count: {e}"))?,
                )
            };
            let sim_class = if rec[6].is_empty() {
                None
            } else {
                Some(rec[6].parse::<SpeedClass>()?)
            };
            rows.push((
                float(0)?,
                float(1)?,
                CellRecord {
                    root_count,
                    criterion: rec[3].parse()?,
                    gamma: opt_float(4)?,
                    sim_speed: opt_float(5)?,
                    sim_class,
                },
            ));
        }
        let mut a_axis: Vec<f64> = Vec::new();
        let mut d_axis: Vec<f64> = Vec::new();
        for (a, d, _) in &rows {
            if a_axis.last() != Some(a) {
                a_axis.push(*a);
            }
            if a_axis.len() == 1 {
                d_axis.push(*d);
            }
        }
        if a_axis.len() * d_axis.len() != rows.len() {
            return Err(format!(
                "{} rows do not form a {}x{} grid",
                rows.len(),
                a_axis.len(),
                d_axis.len()
            ));
        }
        for (k, (a, d, _)) in rows.iter().enumerate() {
            if *a != a_axis[k / d_axis.len()] || *d != d_axis[k % d_axis.len()] {
                return Err(format!("row {} is out of row-major order", k + 1));
            }
        }
        Ok(RegionGrid {
            a_axis,
            d_axis,
            cells: rows.into_iter().map(|r| r.2).collect(),
        })
    }
}

pub fn write_csv(grid: &RegionGrid, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    grid.write_csv_to(std::io::BufWriter::new(file))
        .map_err(|e| csv_error(path, e))
}

pub fn read_csv(path: &Path) -> Result<RegionGrid> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RegionGrid::read_csv_from(std::io::BufReader::new(file)).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

pub fn is_contradiction(c: &CellRecord) -> bool {
    matches!(
        (c.criterion, c.sim_class),
        (Verdict::ProvenPinned, Some(SpeedClass::Travelling))
            | (Verdict::ProvenTravelling, Some(SpeedClass::Pinned))
    )
}

/// Cell centres in `a` (the range is open at both ends).
pub fn a_axis(lo: f64, hi: f64, res: usize) -> Vec<f64> {
    let h = (hi - lo) / res as f64;
    (0..res).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

/// Right cell edges in `d` (the range is open at `lo`, closed at `hi`).
pub fn d_axis(lo: f64, hi: f64, res: usize) -> Vec<f64> {
    let h = (hi - lo) / res as f64;
    (0..res)
        .map(|j| {
            if j + 1 == res {
                hi
            } else {
                lo + (j as f64 + 1.0) * h
            }
        })
        .collect()
}

/// Simulates the lower bichromatic front at `params`.
pub fn simulate_cell(params: Params, n: usize, t_end: f64) -> (Option<f64>, SpeedClass) {
    let config = SimConfig::new(n, params.d, t_end);
    let run = build_ic(
        IcKind::BichromaticFront,
        params,
        &config,
        n as f64 / 4.0,
        2.0,
    )
    .and_then(|ic| integrate(&ic, params, &config))
    .and_then(|traj| estimate_speed(&traj, params));
    match run {
        Ok(est) => (Some(est.c), est.classification),
        Err(_) => (None, SpeedClass::Inconclusive),
    }
}

fn wants_simulation(r: &CriterionReport, policy: SimulatePolicy) -> bool {
    match policy {
        SimulatePolicy::Never => false,
        SimulatePolicy::Always => r.in_omega_minus,
        SimulatePolicy::OnUndetermined => {
            r.in_omega_minus
                && (r.verdict == Verdict::Undetermined
                    || (r.pinning_bound_holds && r.travelling_test == Some(true)))
        }
    }
}

pub fn scan(
    a_range: (f64, f64),
    d_range: (f64, f64),
    resolution: usize,
    options: &ScanOptions,
) -> Result<RegionGrid> {
    let (a_lo, a_hi) = a_range;
    let (d_lo, d_hi) = d_range;
    if !(0.0 <= a_lo && a_lo < a_hi && a_hi <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "a range ({a_lo}, {a_hi}) must lie in (0, 1)"
        )));
    }
    if !(0.0 <= d_lo && d_lo < d_hi && d_hi <= MAX_D) {
        return Err(Error::InvalidParams(format!(
            "d range ({d_lo}, {d_hi}] must lie in (0, {MAX_D}]"
        )));
    }
    if resolution == 0 || resolution > MAX_RESOLUTION {
        return Err(Error::InvalidParams(format!(
            "resolution must be in 1..={MAX_RESOLUTION}, got {resolution}"
        )));
    }
    let a_axis = a_axis(a_lo, a_hi, resolution);
    let d_axis = d_axis(d_lo, d_hi, resolution);

    let gammas: Vec<Option<f64>> = a_axis.par_iter().map(|&a| gamma_fn(a).ok()).collect();
    let reports: Vec<CriterionReport> = (0..a_axis.len() * d_axis.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / d_axis.len(), k % d_axis.len());
            let params = Params {
                a: a_axis[i],
                d: d_axis[j],
            };
            classify_with_gamma(params, gammas[i])
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut pick = |candidates: Vec<usize>, budget: Option<usize>| -> Vec<usize> {
        match budget {
            Some(b) if b < candidates.len() => {
                let mut chosen: Vec<usize> = sample(&mut rng, candidates.len(), b)
                    .into_iter()
                    .map(|k| candidates[k])
                    .collect();
                chosen.sort_unstable();
                chosen
            }
            _ => candidates,
        }
    };
    let policy_cells: Vec<usize> = (0..reports.len())
        .filter(|&k| wants_simulation(&reports[k], options.simulate))
        .collect();
    let mut to_simulate = pick(policy_cells, options.sim_budget);
    if options.audit_budget > 0 {
        let proven: Vec<usize> = (0..reports.len())
            .filter(|&k| {
                matches!(
                    reports[k].verdict,
                    Verdict::ProvenPinned | Verdict::ProvenTravelling
                ) && to_simulate.binary_search(&k).is_err()
            })
            .collect();
        to_simulate.extend(pick(proven, Some(options.audit_budget)));
        to_simulate.sort_unstable();
    }

    let sims: Vec<(usize, (Option<f64>, SpeedClass))> = to_simulate
        .par_iter()
        .map(|&k| {
            (
                k,
                simulate_cell(reports[k].params, options.sim_n, options.sim_t_end),
            )
        })
        .collect();

    let mut cells: Vec<CellRecord> = reports
        .iter()
        .map(|r| CellRecord {
            root_count: r.root_count,
            criterion: r.verdict,
            gamma: r.gamma_at_dminus,
            sim_speed: None,
            sim_class: None,
        })
        .collect();
    for (k, (speed, class)) in sims {
        cells[k].sim_speed = speed;
        cells[k].sim_class = Some(class);
    }
    Ok(RegionGrid {
        a_axis,
        d_axis,
        cells,
    })
}

/// Human-readable listing of contradicting cells.
pub fn describe_contradictions(grid: &RegionGrid) -> String {
    let mut s = String::new();
    for (a, d, c) in grid.contradictions() {
        let _ = writeln!(
            s,
            "a={a} d={d} criterion={} sim={:?} speed={:?}",
            c.criterion.as_str(),
            c.sim_class,
            c.sim_speed
        );
    }
    s
}
