use std::path::PathBuf;

use fermiweak_core::fock::{build_basis, FockBasis, Sector, Species};
use fermiweak_core::model::{assemble_h0, assemble_hi, Channel, Kernel, PhysicalParams, ReducedForm, ReducedKernel};
use fermiweak_core::random::seeded;
use fermiweak_core::spectral::{admissible_beta, thresholds, SolverOptions};
use fermiweak_core::verify::{self, CheckResult};
use fermiweak_core::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{write_csv, write_jsonl, write_meta, Meta};
use crate::{Common, Failure};

pub const CHECKS: [&str; 13] = [
    "algebra",
    "cubic-norm",
    "channel-bound",
    "reduced-bound",
    "relative-bound",
    "number-identity",
    "pull-through",
    "number-scaling",
    "overlap",
    "cutoff-convergence",
    "mourre",
    "double-commutator",
    "compression",
];

pub struct Problem {
    pub command: &'static str,
    pub cfg: RunConfig,
    pub hash: String,
    pub basis: FockBasis,
    pub params: PhysicalParams,
    pub kernel: Kernel,
    pub opts: SolverOptions,
    pub out: Option<PathBuf>,
}

impl Problem {
    pub fn setup(common: &Common, command: &'static str) -> Result<Self, Failure> {
        let (mut cfg, base) = RunConfig::load(&common.config)?;
        if let Some(s) = common.seed {
            cfg.seed = s;
        }
        if let Some(t) = common.tol {
            cfg.tol = t;
        }
        cfg.validate()?;
        let out = common.out.clone().or_else(|| cfg.output.as_ref().map(|p| base.join(p)));
        let params = cfg.physical_params()?;
        let table = cfg.mode_table()?;
        let kernel = cfg.kernel(&table, &base)?;
        let basis = build_basis(table, cfg.n_max)?;
        let hash = cfg.hash(&base)?;
        let opts = SolverOptions { tol: cfg.tol, seed: cfg.seed, ..SolverOptions::default() };
        Ok(Problem { command, cfg, hash, basis, params, kernel, opts, out })
    }

    fn out(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    fn meta(&self) -> Meta<'_> {
        Meta {
            command: self.command,
            config_hash: &self.hash,
            grid_id: self.basis.table().fingerprint(),
            n_modes: self.basis.n_modes(),
            n_max: self.basis.n_max(),
            n_states: self.basis.len(),
            seed: self.cfg.seed,
            tol: self.cfg.tol,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    fn finish_rows<T: Serialize>(&self, default: &str, rows: &[T], failed: usize) -> Result<(), Failure> {
        let out = self.out(default);
        write_csv(&out, rows)?;
        write_meta(&out, &self.meta())?;
        println!("wrote {} rows to {}", rows.len(), out.display());
        if failed > 0 {
            return Err(Failure::SolverRows(failed));
        }
        Ok(())
    }
}

pub fn build(p: &Problem) -> Result<(), Failure> {
    let b = &p.basis;
    let t = b.table();
    println!("config hash     {}", p.hash);
    println!("grid id         {}", t.fingerprint());
    println!("modes           {}", t.len());
    for s in Sector::ALL {
        println!("  sector {s:<7} {}", t.sector_len(s));
    }
    println!("n_max           {}", b.n_max());
    println!("states          {}{}", b.len(), if b.is_full() { " (untruncated)" } else { "" });
    let h0 = assemble_h0(b, &p.params);
    let hi = assemble_hi(b, &p.kernel)?;
    println!("H0 nonzeros     {}", h0.nnz());
    println!("H_I nonzeros    {}", hi.nnz());
    for ch in Channel::ALL {
        println!("kernel norm {ch} {:.6e}", p.kernel.norm(ch));
    }
    println!("infrared sum    {:.6e}", p.kernel.infrared_diagnostic());
    if p.kernel.is_zero() {
        println!("warning: the kernel vanishes on this grid (is the cutoff below every grid momentum?)");
    }
    Ok(())
}

#[derive(Serialize)]
struct GsRow {
    config_hash: String,
    g: f64,
    sigma: f64,
    lambda: f64,
    energy: f64,
    residual: f64,
    overlap: f64,
    deficiency: f64,
    massive_part: f64,
    neutrino_part: f64,
    neutrino_number: f64,
    h0_norm: f64,
    status: String,
}

pub fn gs_scan(p: &Problem) -> Result<(), Failure> {
    let gs = p.cfg.require_g()?;
    let (sigma, lambda) = (p.cfg.first_sigma(), p.cfg.lambda_cut());
    let rows: Vec<Result<GsRow, Failure>> = gs
        .par_iter()
        .map(|&g| {
            let base = |status: String| GsRow {
                config_hash: p.hash.clone(),
                g,
                sigma,
                lambda,
                energy: f64::NAN,
                residual: f64::NAN,
                overlap: f64::NAN,
                deficiency: f64::NAN,
                massive_part: f64::NAN,
                neutrino_part: f64::NAN,
                neutrino_number: f64::NAN,
                h0_norm: f64::NAN,
                status,
            };
            match verify::overlap_point(&p.basis, &p.params, &p.kernel, g, sigma, lambda, &p.opts) {
                Ok(o) => Ok(GsRow {
                    energy: o.energy,
                    residual: o.residual,
                    overlap: o.overlap,
                    deficiency: o.deficiency,
                    massive_part: o.massive_part,
                    neutrino_part: o.neutrino_part,
                    neutrino_number: o.neutrino_number,
                    h0_norm: o.h0_norm,
                    ..base("ok".into())
                }),
                Err(Error::Solver { best_residual, .. }) => {
                    Ok(GsRow { residual: best_residual, ..base("solver-failure".into()) })
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    p.finish_rows("gs-scan.csv", &rows, failed)
}

#[derive(Serialize)]
struct IrRow {
    config_hash: String,
    g: f64,
    sigma: f64,
    energy: f64,
    residual: f64,
    energy_uncut: f64,
    kernel_distance: f64,
    shift_bound: f64,
    overlap: f64,
    ratio_2: f64,
    ratio_3: f64,
    status: String,
}

pub fn ir_scan(p: &Problem) -> Result<(), Failure> {
    let g = p.cfg.require_g()?[0];
    let sigmas = p.cfg.require_sigma()?;
    let lambda = p.cfg.lambda_cut();
    let eta = p.params.eta;
    let ir = [p.kernel.infrared_integral(Species::TWO)?, p.kernel.infrared_integral(Species::THREE)?];
    let uncut = verify::overlap_point(&p.basis, &p.params, &p.kernel, g, 0.0, lambda, &p.opts)?;
    let rows: Vec<Result<IrRow, Failure>> = sigmas
        .par_iter()
        .map(|&sigma| {
            let dist = p.kernel.distance(&p.kernel.infrared_cutoff(sigma)?)?;
            let row = |status: &str| IrRow {
                config_hash: p.hash.clone(),
                g,
                sigma,
                energy: f64::NAN,
                residual: f64::NAN,
                energy_uncut: uncut.energy,
                kernel_distance: dist,
                shift_bound: f64::NAN,
                overlap: f64::NAN,
                ratio_2: f64::NAN,
                ratio_3: f64::NAN,
                status: status.into(),
            };
            // |E_σ − E| is bounded by ‖(H − H_σ)ψ‖ at both ground states
            let bound = |h0: f64| 2.0 * g.abs() * dist * (eta.sqrt() * h0 + 1.0 / eta.sqrt());
            match verify::overlap_point(&p.basis, &p.params, &p.kernel, g, sigma, lambda, &p.opts) {
                Ok(o) => {
                    let h0sq = o.h0_norm * o.h0_norm;
                    Ok(IrRow {
                        energy: o.energy,
                        residual: o.residual,
                        shift_bound: bound(o.h0_norm).max(bound(uncut.h0_norm)),
                        overlap: o.overlap,
                        ratio_2: o.number[0] / (g * g * ir[0] * h0sq),
                        ratio_3: o.number[1] / (g * g * ir[1] * h0sq),
                        ..row("ok")
                    })
                }
                Err(Error::Solver { best_residual, .. }) => Ok(IrRow { residual: best_residual, ..row("solver-failure") }),
                Err(e) => Err(e.into()),
            }
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    p.finish_rows("ir-scan.csv", &rows, failed)
}

#[derive(Serialize)]
struct MourreRow {
    config_hash: String,
    g: f64,
    low: f64,
    high: f64,
    beta: f64,
    bottom: f64,
    dim_window: usize,
}

pub fn mourre(p: &Problem) -> Result<(), Failure> {
    let windows = p.cfg.windows();
    if windows.is_empty() {
        return Err(Failure::Config("scan.windows must list at least one window".into()));
    }
    let gs: Vec<f64> = if p.cfg.scan.g.is_empty() { vec![0.0] } else { p.cfg.scan.g.clone() };
    let e_max = windows.iter().map(|w| w.1).fold(0.0, f64::max) + p.params.m1;
    let s = thresholds(&p.params, e_max)?;
    let mut kept = Vec::new();
    for w in windows {
        match admissible_beta(w, &s) {
            Ok(_) => kept.push(w),
            Err(Error::ThresholdCollision { threshold, .. }) => {
                eprintln!("skipping window [{}, {}]: contains the threshold {threshold}", w.0, w.1)
            }
            Err(e) => return Err(e.into()),
        }
    }
    let scan = verify::check_mourre(&p.basis, &p.params, &p.kernel, &gs, &kept)?;
    let rows: Vec<MourreRow> = scan
        .points
        .iter()
        .filter(|pt| gs.contains(&pt.g))
        .map(|pt| MourreRow {
            config_hash: p.hash.clone(),
            g: pt.g,
            low: pt.record.interval.0,
            high: pt.record.interval.1,
            beta: pt.record.beta,
            bottom: pt.record.bottom,
            dim_window: pt.record.dim_window,
        })
        .collect();
    println!("fitted c = {:.6e}", scan.fitted_c);
    p.finish_rows("mourre.csv", &rows, 0)
}

pub fn verify(p: &Problem) -> Result<(), Failure> {
    let names: Vec<&str> = if p.cfg.checks.is_empty() {
        CHECKS.to_vec()
    } else {
        p.cfg.checks.iter().map(String::as_str).collect()
    };
    if let Some(bad) = names.iter().find(|n| !CHECKS.contains(n)) {
        return Err(Failure::Config(format!("checks: unknown check '{bad}' (known: {})", CHECKS.join(", "))));
    }
    let outcomes: Vec<Result<Vec<CheckResult>, Failure>> = names.par_iter().map(|n| run_check(p, n)).collect();
    let mut results = Vec::new();
    for o in outcomes {
        results.extend(o?);
    }
    for r in &results {
        println!("{}", r.summary());
    }
    let out = p.out("verify.jsonl");
    let records: Vec<Record> = results.iter().map(|result| Record { config_hash: &p.hash, result }).collect();
    write_jsonl(&out, &records)?;
    write_meta(&out, &p.meta())?;
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed; report in {}", results.len(), out.display());
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

#[derive(Serialize)]
struct Record<'a> {
    config_hash: &'a str,
    #[serde(flatten)]
    result: &'a CheckResult,
}

fn run_check(p: &Problem, name: &str) -> Result<Vec<CheckResult>, Failure> {
    let (b, cfg, seed) = (&p.basis, &p.cfg, p.cfg.seed);
    let trials = cfg.verify.trials;
    let table = b.table();
    Ok(match name {
        "algebra" => verify::check_algebra(b)?,
        "cubic-norm" => {
            let h3 = ReducedKernel::random(table, ReducedForm::Leptons123, &mut seeded(seed));
            verify::check_cubic_norm(b, &h3, trials, seed)?
        }
        "channel-bound" => verify::check_channel_bound(b, &p.kernel, trials, seed)?,
        "reduced-bound" => {
            let mut rng = seeded(seed);
            let g2 = ReducedKernel::random(table, ReducedForm::Without2, &mut rng);
            let g3 = ReducedKernel::random(table, ReducedForm::Without3, &mut rng);
            verify::check_reduced_bound(b, &g2, &g3, trials, seed)?
        }
        "relative-bound" => verify::check_relative_bound(b, &p.params, &p.kernel, trials, seed, &cfg.verify.etas)?,
        "number-identity" => vec![verify::check_number_identity(b, trials, seed)?],
        "pull-through" => {
            verify::check_pull_through(b, &p.params, &p.kernel, cfg.require_g()?[0], cfg.require_sigma()?, &p.opts)?.0
        }
        "number-scaling" => vec![verify::check_number_scaling(
            b,
            &p.params,
            &p.kernel,
            cfg.require_g()?,
            cfg.first_sigma(),
            cfg.verify.scaling_tol,
            &p.opts,
        )?],
        "overlap" => {
            verify::check_overlap(b, &p.params, &p.kernel, cfg.require_g()?, cfg.first_sigma(), cfg.lambda_cut(), &p.opts)?
                .0
        }
        "cutoff-convergence" => verify::check_cutoff_convergence(
            b,
            &p.params,
            &p.kernel,
            cfg.require_g()?[0],
            cfg.require_sigma()?,
            trials,
            seed,
            p.params.eta,
        )?,
        "mourre" => {
            let windows = cfg.windows();
            if windows.is_empty() {
                return Err(Failure::Config("scan.windows must list at least one window".into()));
            }
            verify::check_mourre(b, &p.params, &p.kernel, &cfg.scan.g, &windows)?.results
        }
        "double-commutator" => verify::check_double_commutator_bounded(b, &p.params, &p.kernel)?,
        "compression" => vec![verify::check_compression(table, b.n_max(), trials.min(10), seed)?],
        _ => unreachable!("names are validated"),
    })
}
