//! Catalogue of the reference experiment tables and the sweep runner.

use std::fs;
use std::path::Path;

use helmholtz_dd::coefficients::{FieldKind, Profile, Shape};
use helmholtz_dd::krylov::Side;
use helmholtz_dd::preconditioner::Variant;
use serde::Serialize;

use crate::config::{CoarseRule, EpsRule, OverlapRule, ProfileConfig, RunConfig};
use crate::run::{run_capped, RunOutcome};
use crate::RunError;

/// What a cell reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// GMRES iterations; a second config gives the bracketed ORAS count.
    Iterations,
    /// `(e0, e1)`.
    Errors,
    /// `(fov lower bound, energy norm)`.
    Bounds,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub row: String,
    pub column: String,
    /// One config, or a SORAS/ORAS pair.
    pub configs: Vec<RunConfig>,
    pub reference: String,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub id: &'static str,
    pub title: &'static str,
    pub measure: Measure,
    pub cells: Vec<Cell>,
}

pub const TABLE_IDS: [&str; 16] = [
    "table1", "table2", "table3", "table4", "table5", "table6", "table7", "table8", "table9",
    "table10", "table11", "table12", "table13", "table14", "table15", "table16",
];

const KS: [f64; 4] = [40.0, 80.0, 120.0, 160.0];

/// Profiles in column order: linear decrease, linear increase, oscillating;
/// disk first, then square.
const PROFILES: [FieldKind; 6] = [
    FieldKind::Obstacle(Shape::Disk, Profile::LinearDecrease),
    FieldKind::Obstacle(Shape::Disk, Profile::LinearIncrease),
    FieldKind::Obstacle(Shape::Disk, Profile::Oscillating),
    FieldKind::Obstacle(Shape::Square, Profile::LinearDecrease),
    FieldKind::Obstacle(Shape::Square, Profile::LinearIncrease),
    FieldKind::Obstacle(Shape::Square, Profile::Oscillating),
];

fn base(k: f64, p: usize, eps: EpsRule) -> RunConfig {
    RunConfig {
        k,
        p,
        eps,
        ..RunConfig::default()
    }
}

fn with_oras(cfg: RunConfig) -> Vec<RunConfig> {
    let oras = RunConfig {
        precond: Variant::Oras,
        ..cfg.clone()
    };
    vec![cfg, oras]
}

fn k_label(k: f64) -> String {
    format!("k={k}")
}

/// k by p grid with Strategy 1, `H = k^{-alpha}`.
fn degree_grid(eps: EpsRule, alpha: f64, bounds: bool, values: [[&str; 4]; 4]) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (k, row) in KS.iter().zip(values) {
        for (p, reference) in (1..=4).zip(row) {
            let cfg = RunConfig {
                coarse: CoarseRule::Pow(alpha),
                bounds,
                ..base(*k, p, eps)
            };
            cells.push(Cell {
                row: k_label(*k),
                column: format!("p={p}"),
                configs: vec![cfg],
                reference: reference.to_string(),
            });
        }
    }
    cells
}

/// k by profile grid at p = 3, Strategy 2, `delta = H/4`.
fn profile_grid(
    eps: EpsRule,
    coarse: CoarseRule,
    varying_a: bool,
    bounds: (f64, f64),
    oras: bool,
    values: [[&str; 6]; 4],
) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (k, row) in KS.iter().zip(values) {
        for (profile, reference) in PROFILES.iter().zip(row) {
            let field = ProfileConfig::new(*profile, bounds.0, bounds.1);
            let mut cfg = RunConfig {
                strategy: 2,
                coarse,
                overlap: OverlapRule::HFrac(4.0),
                ..base(*k, 3, eps)
            };
            if varying_a {
                cfg.a = field;
            } else {
                cfg.n = field;
            }
            cells.push(Cell {
                row: k_label(*k),
                column: profile.name().to_string(),
                configs: if oras { with_oras(cfg) } else { vec![cfg] },
                reference: reference.to_string(),
            });
        }
    }
    cells
}

fn table7() -> Vec<Cell> {
    let values = [
        [
            "12 (6)", "14 (9)", "20 (15)", "16 (10)", "24 (18)", "40 (28)",
        ],
        [
            "12 (7)", "15 (10)", "20 (16)", "20 (14)", "30 (23)", "45 (39)",
        ],
        [
            "12 (6)", "14 (11)", "20 (18)", "22 (16)", "32 (25)", "55 (41)",
        ],
        [
            "12 (6)", "13 (10)", "21 (19)", "21 (15)", "31 (26)", "65 (55)",
        ],
    ];
    let columns = [
        (EpsRule::Pow(1.5), 0.4),
        (EpsRule::Pow(1.5), 0.5),
        (EpsRule::Pow(1.5), 0.6),
        (EpsRule::Zero, 0.4),
        (EpsRule::Zero, 0.5),
        (EpsRule::Zero, 0.6),
    ];
    let mut cells = Vec::new();
    for (k, row) in KS.iter().zip(values) {
        for ((eps, alpha), reference) in columns.iter().zip(row) {
            let cfg = RunConfig {
                coarse: CoarseRule::Pow(*alpha),
                ..base(*k, 3, *eps)
            };
            cells.push(Cell {
                row: k_label(*k),
                column: format!("eps={eps} H=pow:{alpha}"),
                configs: with_oras(cfg),
                reference: reference.to_string(),
            });
        }
    }
    cells
}

fn table8() -> Vec<Cell> {
    let values = [
        [
            "13 (7)", "17 (10)", "17 (10)", "23 (12)", "18 (13)", "19 (13)", "29 (17)", "29 (17)",
            "40 (19)",
        ],
        [
            "12 (7)", "16 (10)", "19 (11)", "25 (13)", "20 (15)", "22 (17)", "30 (21)", "40 (23)",
            "61 (26)",
        ],
        [
            "12 (7)", "17 (11)", "20 (12)", "26 (14)", "22 (18)", "27 (23)", "38 (27)", "53 (29)",
            "77 (31)",
        ],
        [
            "12 (7)", "18 (12)", "21 (13)", "28 (15)", "24 (19)", "35 (29)", "47 (31)", "64 (34)",
            "97 (35)",
        ],
    ];
    let pow = EpsRule::Pow(1.5);
    let columns = [
        (pow, OverlapRule::HFrac(4.0)),
        (pow, OverlapRule::Wavelengths(1.0)),
        (pow, OverlapRule::Cells(2.0)),
        (pow, OverlapRule::Cells(1.0)),
        (EpsRule::Zero, OverlapRule::HFrac(4.0)),
        (EpsRule::Zero, OverlapRule::Wavelengths(2.0)),
        (EpsRule::Zero, OverlapRule::Wavelengths(1.0)),
        (EpsRule::Zero, OverlapRule::Cells(2.0)),
        (EpsRule::Zero, OverlapRule::Cells(1.0)),
    ];
    let mut cells = Vec::new();
    for (k, row) in KS.iter().zip(values) {
        for ((eps, overlap), reference) in columns.iter().zip(row) {
            let cfg = RunConfig {
                strategy: 2,
                coarse: CoarseRule::Pow(0.4),
                overlap: *overlap,
                ..base(*k, 3, *eps)
            };
            cells.push(Cell {
                row: k_label(*k),
                column: format!("eps={eps} overlap={overlap}"),
                configs: with_oras(cfg),
                reference: reference.to_string(),
            });
        }
    }
    cells
}

fn table3() -> Vec<Cell> {
    let values = [
        [
            "5.73e-2, 9.09e-2",
            "1.33e-3, 1.04e-2",
            "6.76e-5, 6.49e-4",
            "2.79e-6, 6.51e-5",
        ],
        [
            "5.73e-2, 8.11e-2",
            "1.30e-3, 8.58e-3",
            "5.04e-5, 5.19e-4",
            "2.31e-6, 5.20e-5",
        ],
        [
            "5.72e-2, 7.59e-2",
            "1.25e-3, 7.39e-3",
            "4.10e-5, 4.42e-4",
            "2.33e-6, 4.52e-5",
        ],
        [
            "5.72e-2, 7.25e-2",
            "1.25e-3, 6.63e-3",
            "3.60e-5, 3.97e-4",
            "2.52e-6, 4.10e-5",
        ],
    ];
    let mut cells = Vec::new();
    for (k, row) in [40.0, 60.0, 80.0, 100.0].iter().zip(values) {
        for (p, reference) in (1..=4).zip(row) {
            cells.push(Cell {
                row: k_label(*k),
                column: format!("p={p}"),
                configs: vec![base(*k, p, EpsRule::Zero)],
                reference: format!("({reference})"),
            });
        }
    }
    cells
}

/// The table with the given id.
pub fn table(id: &str) -> Result<Table, RunError> {
    let pow = EpsRule::Pow(1.5);
    let zero = EpsRule::Zero;
    let s2 = CoarseRule::Pow(0.4);
    let (title, measure, cells) = match id {
        "table1" => (
            "iterations vs degree, eps = k^1.5, SORAS, Strategy 1, H = k^-0.3",
            Measure::Iterations,
            degree_grid(
                pow,
                0.3,
                false,
                [
                    ["12", "12", "12", "12"],
                    ["12", "12", "12", "12"],
                    ["12", "12", "12", "12"],
                    ["--", "12", "12", "12"],
                ],
            ),
        ),
        "table2" => (
            "iterations vs degree, eps = 0, SORAS, Strategy 1, H = k^-0.3",
            Measure::Iterations,
            degree_grid(
                zero,
                0.3,
                false,
                [
                    ["13", "14", "13", "13"],
                    ["12", "13", "12", "12"],
                    ["13", "14", "14", "13"],
                    ["--", "17", "16", "15"],
                ],
            ),
        ),
        "table3" => (
            "relative errors (e0, e1) against the plane wave",
            Measure::Errors,
            table3(),
        ),
        "table4" => (
            "(FoV lower bound, energy norm), eps = k^1.5, SORAS, Strategy 1, H = k^-0.3",
            Measure::Bounds,
            degree_grid(
                pow,
                0.3,
                true,
                [
                    [
                        "(0.175, 1.030)",
                        "(0.176, 1.029)",
                        "(0.176, 1.028)",
                        "(0.176, 1.040)",
                    ],
                    [
                        "(0.203, 1.020)",
                        "(0.203, 1.020)",
                        "(0.203, 1.020)",
                        "(0.203, 1.021)",
                    ],
                    [
                        "(0.193, 1.022)",
                        "(0.193, 1.022)",
                        "(0.193, 1.021)",
                        "(0.193, 1.022)",
                    ],
                    [
                        "(--, --)",
                        "(0.203, 1.019)",
                        "(0.203, 1.019)",
                        "(0.203, 1.019)",
                    ],
                ],
            ),
        ),
        "table5" => (
            "(FoV lower bound, energy norm), eps = k^1.5, SORAS, Strategy 1, H = k^-0.4",
            Measure::Bounds,
            degree_grid(
                pow,
                0.4,
                true,
                [
                    [
                        "(0.147, 1.043)",
                        "(0.148, 1.041)",
                        "(0.148, 1.041)",
                        "(0.148, 1.054)",
                    ],
                    [
                        "(0.154, 1.037)",
                        "(0.154, 1.037)",
                        "(0.154, 1.036)",
                        "(0.154, 1.038)",
                    ],
                    [
                        "(0.155, 1.035)",
                        "(0.155, 1.035)",
                        "(0.155, 1.035)",
                        "(0.155, 1.035)",
                    ],
                    [
                        "(--, --)",
                        "(0.150, 1.037)",
                        "(0.150, 1.037)",
                        "(0.150, 1.037)",
                    ],
                ],
            ),
        ),
        "table6" => (
            "(FoV lower bound, energy norm), eps = k^1.5, SORAS, Strategy 1, H = k^-0.5",
            Measure::Bounds,
            degree_grid(
                pow,
                0.5,
                true,
                [
                    [
                        "(0.100, 1.071)",
                        "(0.101, 1.070)",
                        "(0.101, 1.069)",
                        "(0.101, 1.082)",
                    ],
                    [
                        "(0.104, 1.060)",
                        "(0.104, 1.060)",
                        "(0.104, 1.059)",
                        "(0.104, 1.061)",
                    ],
                    [
                        "(0.100, 1.046)",
                        "(0.100, 1.046)",
                        "(0.100, 1.046)",
                        "(0.100, 1.048)",
                    ],
                    [
                        "(--, --)",
                        "(0.093, 1.064)",
                        "(0.093, 1.064)",
                        "(0.093, 1.064)",
                    ],
                ],
            ),
        ),
        "table7" => (
            "SORAS (ORAS) iterations, p = 3, Strategy 1, H = k^-alpha",
            Measure::Iterations,
            table7(),
        ),
        "table8" => (
            "SORAS (ORAS) iterations, p = 3, Strategy 2, H = k^-0.4, varying overlap",
            Measure::Iterations,
            table8(),
        ),
        "table9" => (
            "SORAS iterations, eps = k^1.5, A = 1, n in [0.02, 50]",
            Measure::Iterations,
            profile_grid(
                pow,
                s2,
                false,
                (0.02, 50.0),
                false,
                [
                    ["13", "13", "13", "13", "13", "13"],
                    ["12", "12", "12", "12", "12", "12"],
                    ["12", "12", "12", "12", "12", "12"],
                    ["12", "12", "12", "12", "12", "12"],
                ],
            ),
        ),
        "table10" => (
            "SORAS iterations, eps = k^1.5, n = 1, A in [0.02, 50]",
            Measure::Iterations,
            profile_grid(
                pow,
                s2,
                true,
                (0.02, 50.0),
                false,
                [
                    ["20", "27", "47", "20", "29", "41"],
                    ["17", "30", "51", "18", "27", "46"],
                    ["21", "30", "54", "21", "30", "50"],
                    ["17", "26", "38", "19", "28", "46"],
                ],
            ),
        ),
        "table11" => (
            "SORAS iterations, eps = 0, A = 1, n in [0.5, 2]",
            Measure::Iterations,
            profile_grid(
                zero,
                s2,
                false,
                (0.5, 2.0),
                false,
                [
                    ["18", "21", "24", "18", "19", "28"],
                    ["22", "26", "39", "20", "21", "30"],
                    ["27", "34", "50", "24", "24", "26"],
                    ["29", "37", "64", "25", "25", "38"],
                ],
            ),
        ),
        "table12" => (
            "SORAS iterations, eps = 0, n = 1, A in [0.5, 2]",
            Measure::Iterations,
            profile_grid(
                zero,
                s2,
                true,
                (0.5, 2.0),
                false,
                [
                    ["18", "18", "20", "18", "18", "21"],
                    ["21", "18", "38", "18", "18", "28"],
                    ["31", "21", "35", "21", "20", "29"],
                    ["32", "22", "47", "23", "21", "33"],
                ],
            ),
        ),
        "table13" => (
            "SORAS iterations, eps = 0, A = 1, n in [0.25, 4]",
            Measure::Iterations,
            profile_grid(
                zero,
                s2,
                false,
                (0.25, 4.0),
                false,
                [
                    ["22", "26", "38", "21", "25", "32"],
                    ["35", "47", "44", "31", "28", "61"],
                    ["54", "56", "61", "41", "39", "67"],
                    ["61", "58", "55", "40", "39", "59"],
                ],
            ),
        ),
        "table14" => (
            "SORAS iterations, eps = 0, n = 1, A in [0.25, 4]",
            Measure::Iterations,
            profile_grid(
                zero,
                s2,
                true,
                (0.25, 4.0),
                false,
                [
                    ["19", "20", "23", "19", "19", "27"],
                    ["24", "21", "48", "19", "21", "40"],
                    ["29", "26", "49", "25", "21", "56"],
                    ["28", "24", "57", "25", "20", "57"],
                ],
            ),
        ),
        "table15" => (
            "SORAS (ORAS) iterations, fixed H = 1/8, eps = 0, n = 1, A in [0.25, 4]",
            Measure::Iterations,
            profile_grid(
                zero,
                CoarseRule::Fixed(8),
                true,
                (0.25, 4.0),
                true,
                [
                    [
                        "40 (28)", "41 (30)", "52 (33)", "42 (28)", "40 (30)", "64 (43)",
                    ],
                    [
                        "46 (38)", "39 (29)", "103 (88)", "38 (27)", "36 (28)", "66 (59)",
                    ],
                    [
                        "42 (37)", "32 (27)", "59 (61)", "31 (25)", "26 (23)", "68 (73)",
                    ],
                    [
                        "35 (34)", "31 (25)", "73 (96)", "27 (23)", "24 (27)", "85 (103)",
                    ],
                ],
            ),
        ),
        "table16" => (
            "SORAS (ORAS) iterations, fixed H = 1/8, eps = 0, A = 1, n in [0.25, 4]",
            Measure::Iterations,
            profile_grid(
                zero,
                CoarseRule::Fixed(8),
                false,
                (0.25, 4.0),
                true,
                [
                    [
                        "48 (32)", "63 (54)", "73 (72)", "49 (38)", "57 (43)", "75 (56)",
                    ],
                    [
                        "58 (51)",
                        "75 (70)",
                        "79 (84)",
                        "52 (44)",
                        "50 (40)",
                        "103 (102)",
                    ],
                    [
                        "73 (66)",
                        "74 (90)",
                        "90 (132)",
                        "52 (44)",
                        "45 (39)",
                        "102 (124)",
                    ],
                    [
                        "75 (82)",
                        "69 (87)",
                        "100 (124)",
                        "48 (44)",
                        "41 (36)",
                        "59 (73)",
                    ],
                ],
            ),
        ),
        _ => {
            return Err(RunError::Config(format!(
                "unknown table '{id}', valid ids: {}",
                TABLE_IDS.join(", ")
            )))
        }
    };
    let id = TABLE_IDS
        .iter()
        .find(|t| **t == id)
        .copied()
        .expect("id is listed");
    Ok(Table {
        id,
        title,
        measure,
        cells,
    })
}

/// One row of the summary CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub table: String,
    pub row: String,
    pub column: String,
    pub reference: String,
    pub measured: String,
    /// `ok`, `maxit`, `skipped:size` or `error:<message>`.
    pub status: String,
    pub ndofs: Option<usize>,
    pub subdomains: Option<usize>,
    pub records: String,
}

fn measured(measure: Measure, outcomes: &[RunOutcome]) -> String {
    let first = &outcomes[0].record;
    match measure {
        Measure::Iterations => {
            let counts: Vec<String> = outcomes
                .iter()
                .map(|o| o.record.iterations.to_string())
                .collect();
            match counts.as_slice() {
                [s, o] => format!("{s} ({o})"),
                _ => counts.join(" "),
            }
        }
        Measure::Errors => match (first.e0, first.e1) {
            (Some(e0), Some(e1)) => format!("({e0:.2e}, {e1:.2e})"),
            _ => "--".into(),
        },
        Measure::Bounds => match &first.bounds {
            Some(b) => format!("({:.3}, {:.3})", b.fov_lower_bound, b.dk_norm),
            None => "--".into(),
        },
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Runs every cell of a table, writing one JSON record per run and
/// `<table>.csv` into `out_dir`. Cells run one after another.
pub fn sweep(
    table: &Table,
    out_dir: &Path,
    side: Side,
    seed: u64,
    max_dofs: usize,
    mut progress: impl FnMut(&SummaryRow),
) -> Result<Vec<SummaryRow>, RunError> {
    fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    for cell in &table.cells {
        let mut outcomes = Vec::new();
        let mut files = Vec::new();
        let mut status = "ok".to_string();
        let mut skipped_ndofs = None;
        for cfg in &cell.configs {
            let cfg = RunConfig {
                side,
                seed,
                ..cfg.clone()
            };
            match run_capped(&cfg, max_dofs) {
                Ok(o) => {
                    let name = format!(
                        "{}_{}_{}_{}.json",
                        table.id,
                        slug(&cell.row),
                        slug(&cell.column),
                        cfg.precond
                    );
                    fs::write(out_dir.join(&name), o.record.to_json())?;
                    if !o.record.converged && status == "ok" {
                        status = "maxit".into();
                    }
                    files.push(name);
                    outcomes.push(o);
                }
                Err(RunError::SizeCap { ndofs, .. }) => {
                    status = "skipped:size".into();
                    skipped_ndofs = Some(ndofs);
                    break;
                }
                Err(e) => {
                    status = format!("error:{e}");
                    break;
                }
            }
        }
        let complete = outcomes.len() == cell.configs.len();
        let row = SummaryRow {
            table: table.id.to_string(),
            row: cell.row.clone(),
            column: cell.column.clone(),
            reference: cell.reference.clone(),
            measured: if complete {
                measured(table.measure, &outcomes)
            } else {
                String::new()
            },
            status,
            ndofs: outcomes.first().map(|o| o.record.ndofs).or(skipped_ndofs),
            subdomains: outcomes.first().map(|o| o.record.subdomains),
            records: files.join(";"),
        };
        progress(&row);
        rows.push(row);
    }
    let mut w = csv::Writer::from_path(out_dir.join(format!("{}.csv", table.id)))
        .map_err(|e| RunError::Io(e.into()))?;
    for row in &rows {
        w.serialize(row).map_err(|e| RunError::Io(e.into()))?;
    }
    w.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_builds() {
        for id in TABLE_IDS {
            let t = table(id).unwrap();
            assert!(!t.cells.is_empty(), "{id}");
            for c in &t.cells {
                for cfg in &c.configs {
                    cfg.validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn unknown_id_lists_valid_ones() {
        let err = table("table99").unwrap_err().to_string();
        assert!(err.contains("table1") && err.contains("table16"));
    }
}
