//! Executes an [`ExperimentConfig`] and writes its output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{EnvelopeRule, ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::function_space::{GridSpec, RegionMask};
use crate::group::GroupElement;
use crate::io::{
    read_manifest, save_symbol_field, write_convergence_csv, write_singular_values_csv,
    FieldManifest, MANIFEST_FILE,
};
use crate::localization::{invariance_scores, local_equiv, symbol_field};
use crate::operator::{
    largest_singular_value, local_type_score, proxy_of, singular_values, OperatorMatrix,
};
use crate::synthesis::{envelope_refine, inverse_covariant, OperatorField};
use crate::verify::run_suite;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Contents of `manifest.json`: enough to re-run the experiment. Symbol
/// field runs also carry the field description, so the output directory
/// loads as a symbol field.
#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    localis_version: &'static str,
    seed: u64,
    config: &'a ExperimentConfig,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    field: Option<FieldManifest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub output: PathBuf,
    /// `false` when the experiment contradicted its stated expectation.
    pub verdict: bool,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Runs `cfg`, writing into `output` (or the configured directory).
pub fn run_experiment(cfg: &ExperimentConfig, output: Option<&Path>) -> Result<RunOutcome> {
    let out = output.map_or_else(|| cfg.output.clone(), Path::to_path_buf);
    fs::create_dir_all(&out)?;
    let grid = cfg.build_grid()?;
    let mut field = None;

    let verdict = match &cfg.experiment {
        ExperimentKind::SymbolField { operator } => {
            let a = cfg.operator(operator, &grid)?;
            let window = cfg.build_window(&grid)?;
            let lattice = cfg.build_lattice(&grid)?;
            let sf = symbol_field(&a, &window, &cfg.t_levels, &lattice, cfg.p)?;
            save_symbol_field(&out, &sf)?;
            field = Some(read_manifest(&out)?);
            let mut w = csv::Writer::from_path(out.join("decay.csv"))?;
            let mut header = vec!["level".to_string(), "t".into(), "g_index".into()];
            header.extend((1..=grid.dim()).map(|c| format!("g{c}")));
            header.extend(["norm".to_string(), "proxy".into()]);
            w.write_record(&header)?;
            for (level, row) in sf.blocks.iter().enumerate() {
                for (k, block) in row.iter().enumerate() {
                    let mut rec = vec![level.to_string(), sf.t_levels[level].to_string(), k.to_string()];
                    rec.extend(sf.lattice[k].0.iter().map(|v| v.to_string()));
                    rec.push(largest_singular_value(block).to_string());
                    rec.push(proxy_of(block, cfg.rank).to_string());
                    w.write_record(&rec)?;
                }
            }
            w.flush()?;
            true
        }
        ExperimentKind::LocalEquiv { a, b, point, expect } => {
            let window = cfg.build_window(&grid)?;
            let g = grid.group.element(point.clone())?;
            let report = local_equiv(
                &cfg.operator(a, &grid)?,
                &cfg.operator(b, &grid)?,
                &g,
                &window,
                &cfg.t_levels,
                cfg.rank,
                cfg.tolerance,
                cfg.p,
            )?;
            write_json(&out.join("report.json"), &report)?;
            let mut w = csv::Writer::from_path(out.join("decay.csv"))?;
            w.write_record(["t", "proxy"])?;
            for (t, d) in report.t_levels.iter().zip(&report.decay) {
                w.write_record([t.to_string(), d.to_string()])?;
            }
            w.flush()?;
            report.verdict == *expect
        }
        ExperimentKind::Envelope { operator, rule, lo, hi, depths, expect_ratio } => {
            let a = cfg.operator(operator, &grid)?;
            let local = |x: &GroupElement| -> Result<OperatorMatrix> {
                match rule {
                    EnvelopeRule::Constant => Ok(a.clone()),
                    EnvelopeRule::Frozen => {
                        let i = anchor_index(&grid, x)?;
                        Ok(OperatorMatrix::identity(&grid).scaled(a.entries[(i, i)]))
                    }
                }
            };
            let rows = envelope_refine(&a, local, lo, hi, depths, cfg.rank)?;
            write_convergence_csv(&out.join("convergence.csv"), &rows)?;
            let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].norm / w[0].norm).collect();
            let pass = expect_ratio
                .map_or(true, |[lo, hi]| ratios.iter().all(|q| (lo..=hi).contains(q)));
            write_json(
                &out.join("results.json"),
                &serde_json::json!({ "rows": rows, "ratios": ratios, "pass": pass }),
            )?;
            pass
        }
        ExperimentKind::Invariance { operator, t_samples, shifts, interior, expect } => {
            let a = cfg.operator(operator, &grid)?;
            let shifts = shifts
                .iter()
                .map(|s| grid.group.element(s.clone()))
                .collect::<Result<Vec<_>>>()?;
            let lo = vec![-interior; grid.dim()];
            let hi = vec![*interior; grid.dim()];
            let mask = RegionMask::closed_box(&grid, &lo, &hi);
            let scores = invariance_scores(&a, t_samples, &shifts, &mask, cfg.p)?;
            write_json(&out.join("results.json"), &scores)?;
            let invariant = scores.homogeneity.max(scores.shift) < cfg.tolerance;
            expect.map_or(true, |e| e == invariant)
        }
        ExperimentKind::LocalType { operator, separation, trials, expect } => {
            let a = cfg.operator(operator, &grid)?;
            let score = local_type_score(&a, *separation, cfg.rank, *trials, cfg.seed)?;
            let local = score < cfg.tolerance;
            write_json(
                &out.join("results.json"),
                &serde_json::json!({ "score": score, "separation": separation, "local_type": local }),
            )?;
            expect.map_or(true, |e| e == local)
        }
        ExperimentKind::SingularValues { operator } => {
            let a = cfg.operator(operator, &grid)?;
            write_singular_values_csv(&out.join("singular_values.csv"), &singular_values(&a.entries))?;
            true
        }
        ExperimentKind::Reconstruction { operator, embedding, pairing, extrapolate } => {
            let a = cfg.operator(operator, &grid)?;
            let window = cfg.build_window(&grid)?;
            let lattice = cfg.build_lattice(&grid)?;
            let sf = symbol_field(&a, &window, &cfg.t_levels, &lattice, cfg.p)?;
            let of = OperatorField::from_symbol_field(&sf, *embedding)?;
            let rec = inverse_covariant(&of, *pairing, *extrapolate)?;
            let idx = rec.covered.indices();
            let error = largest_singular_value(&(rec.operator.block(&idx, &idx) - a.block(&idx, &idx)));
            write_json(
                &out.join("results.json"),
                &serde_json::json!({
                    "error": error,
                    "covered_points": idx.len(),
                    "multiplicity": rec.multiplicity,
                }),
            )?;
            true
        }
        ExperimentKind::Verify { suite } => {
            let report = run_suite(suite)?;
            write_json(&out.join("report.json"), &report)?;
            report.pass
        }
    };

    let manifest = RunManifest {
        localis_version: VERSION,
        seed: cfg.seed,
        config: cfg,
        field,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(RunOutcome { output: out, verdict })
}

fn anchor_index(grid: &GridSpec, x: &GroupElement) -> Result<usize> {
    match grid.locate(&x.0) {
        crate::function_space::Locate::Inside(i) => Ok(i),
        _ => Err(crate::Error::InvalidArgument(format!("anchor {:?} is not a grid point", x.0))),
    }
}
