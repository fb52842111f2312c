//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Tolerances are pinned below. The process fails when a criterion outside
//! [`KNOWN_RED`] fails; known-red criteria are still measured and reported.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fermiweak_core::error::Error;
use fermiweak_core::fock::{
    annihilator, build_basis, build_mode_table, smeared_annihilator, smeared_creator, FockBasis, Grading, GridNode,
    GridSpec, ModeTable, OccupationState, Sector, SpeciesGrid,
};
use fermiweak_core::model::{
    assemble_h, assemble_h0, random_kernel, reduced_operator, sharp_cutoff_kernel, smooth_gaussian_kernel, Channel,
    PhysicalParams, ReducedForm, ReducedKernel,
};
use fermiweak_core::random::{complex_gaussian_vec, seeded};
use fermiweak_core::spectral::{commutator_a_h0, ground_state, mourre_bottom, thresholds, SolverOptions};
use fermiweak_core::verify::{self, CheckResult};
use fermiweak_core::Complex64;
use nalgebra::SymmetricEigen;
use rand::Rng;

const ALGEBRA_TOL: f64 = 1e-12;
const ALGEBRA_BUDGET: Duration = Duration::from_secs(5);
const SMEARED_TOL: f64 = 1e-10;
const RANK_ONE_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-12;
const DENSE_TOL: f64 = 1e-8;
const DENSE_MAX_DIM: usize = 2000;
const SCALING_SPREAD: f64 = 0.1;
const FREE_SLACK: f64 = 1e-10;
const FREE_BUDGET: Duration = Duration::from_secs(60);
const FREE_MAX_DIM: usize = 4096;
const TRIALS: usize = 100;

/// Criteria that cannot pass on this model; see the README.
const KNOWN_RED: &[&str] = &["coupling-scaling"];

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn params() -> PhysicalParams {
    PhysicalParams::new(1.0, 2.0).unwrap()
}

/// Radial nodes along z, one spin per species, common weight.
fn radial_table(radii: [&[f64]; 4], w: f64) -> ModeTable {
    let species = radii
        .iter()
        .enumerate()
        .map(|(i, rs)| SpeciesGrid {
            nodes: rs.iter().map(|&r| GridNode { momentum: [0.0, 0.0, r], weight: w }).collect(),
            spins: vec![if i == 1 || i == 2 { -1.0 } else { 0.5 }],
        })
        .collect();
    build_mode_table(&GridSpec { species }).unwrap()
}

fn eight_modes() -> ModeTable {
    radial_table([&[0.5], &[0.3], &[0.4], &[0.6]], 0.5)
}

fn sixteen_modes() -> ModeTable {
    radial_table([&[0.4, 0.8], &[0.2, 0.5], &[0.3, 0.6], &[0.5, 0.9]], 0.3)
}

fn basis(table: ModeTable, n_max: usize) -> FockBasis {
    build_basis(table, n_max).unwrap()
}

/// Every record passed; the detail names the first failure or counts trials.
fn all_passed(results: &[CheckResult]) -> Verdict {
    match results.iter().find(|r| !r.passed) {
        Some(r) => verdict(false, r.summary()),
        None => verdict(
            true,
            format!("{} records, {} trials, 0 violations", results.len(), results.iter().map(|r| r.trials).sum::<usize>()),
        ),
    }
}

fn algebra() -> Verdict {
    let start = Instant::now();
    let b = basis(eight_modes(), 8);
    let results = verify::check_algebra(&b).unwrap();
    let elapsed = start.elapsed();
    let worst = results.iter().map(|r| (r.lhs - r.rhs).abs()).fold(0.0, f64::max);
    let ok = results.iter().all(|r| r.passed && r.tolerance <= ALGEBRA_TOL) && elapsed < ALGEBRA_BUDGET;
    verdict(ok, format!("dim {}, worst deviation {worst:.1e}, {elapsed:.2?}", b.len()))
}

fn sign_fixtures() -> Verdict {
    // one mode per sector: mode k is sector k
    let b = basis(eight_modes(), 8);
    let element = |k: usize, to: &[usize], from: &[usize]| {
        let r = b.index_of(OccupationState::from_modes(to).bits()).unwrap();
        let c = b.index_of(OccupationState::from_modes(from).bits()).unwrap();
        annihilator(&b, k).get(r, c)
    };
    let cases = [
        ("(1,-) past (1,+)", element(1, &[0], &[0, 1]), -1.0),
        ("(3,+) past (2,+)(2,-)", element(4, &[2, 3], &[2, 3, 4]), 1.0),
        ("(2,+) beside (4,+)", element(2, &[6], &[2, 6]), 1.0),
    ];
    let ok = cases.iter().all(|(_, z, want)| *z == Complex64::new(*want, 0.0));
    let detail = cases.iter().map(|(n, z, _)| format!("{n}: {}", z.re)).collect::<Vec<_>>().join(", ");
    verdict(ok, detail)
}

fn smeared_norm() -> Verdict {
    // three nodes in every sector of species 2, untruncated
    let w = 0.7;
    let table = radial_table([&[0.5], &[0.2, 0.4, 0.7], &[0.3], &[0.6]], w);
    let b = build_basis(table.clone(), table.len()).unwrap();
    let mut rng = seeded(11);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let sector = Sector::ALL[i % 8];
        let phi = complex_gaussian_vec(&mut rng, table.sector_len(sector));
        let expected = (w * phi.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        for op in [smeared_annihilator(&b, sector, &phi).unwrap(), smeared_creator(&b, sector, &phi).unwrap()] {
            worst = worst.max((verify::operator_norm(&op).unwrap() - expected).abs());
        }
    }
    verdict(worst <= SMEARED_TOL, format!("50 test functions, worst |norm difference| {worst:.1e}"))
}

fn norm_suites() -> Verdict {
    let full = basis(eight_modes(), 8);
    let h3 = ReducedKernel::random(full.table(), ReducedForm::Leptons123, &mut seeded(1));
    let mut results = verify::check_cubic_norm(&full, &h3, TRIALS, 7).unwrap();
    let b = basis(sixteen_modes(), 4);
    let g = random_kernel(b.table(), &mut seeded(3));
    results.extend(verify::check_channel_bound(&b, &g, TRIALS, 9).unwrap());
    let g2 = ReducedKernel::random(b.table(), ReducedForm::Without2, &mut seeded(4));
    let g3 = ReducedKernel::random(b.table(), ReducedForm::Without3, &mut seeded(5));
    results.extend(verify::check_reduced_bound(&b, &g2, &g3, TRIALS, 9).unwrap());
    let suites = all_passed(&results);

    // rank one: a single entry of unit quadrature norm
    let table = sixteen_modes();
    let wide = basis(table.clone(), 16);
    let h = ReducedKernel::from_fn(&table, ReducedForm::Leptons123, |ch, m| {
        let hit = ch == Channel::PlusMinus && m.iter().all(|x| x.node == 1);
        Complex64::new(if hit { 1.0 / 0.3f64.powf(1.5) } else { 0.0 }, 0.0)
    });
    let a = verify::operator_norm(&reduced_operator(&wide, &h, Channel::PlusMinus).unwrap()).unwrap();
    let gap = (a - h.norm(Channel::PlusMinus)).abs();
    verdict(suites.passed && gap <= RANK_ONE_TOL, format!("{}; rank-one |‖A‖-‖H‖| {gap:.1e}", suites.detail))
}

fn relative_chain() -> Verdict {
    let b = basis(sixteen_modes(), 4);
    let g = random_kernel(b.table(), &mut seeded(8));
    let results = verify::check_relative_bound(&b, &params(), &g, TRIALS, 12, &[0.1, 1.0, 10.0]).unwrap();
    let every_state = results[0].trials == b.len();
    let v = all_passed(&results);
    verdict(v.passed && every_state, v.detail)
}

fn number_identity() -> Verdict {
    let b = basis(sixteen_modes(), 3);
    let r = verify::check_number_identity(&b, 50, 3).unwrap();
    let dev = (r.lhs - r.rhs).abs();
    verdict(r.passed && r.tolerance <= IDENTITY_TOL, format!("{} trials on dim {}, worst deviation {dev:.1e}", r.trials, b.len()))
}

fn ground_limits() -> Verdict {
    let opts = SolverOptions::default();
    let b = basis(sixteen_modes(), 3);
    let free = ground_state(&assemble_h0(&b, &params()), &opts).unwrap();
    let vacuum = free.energy == 0.0
        && free.vector[0] == Complex64::new(1.0, 0.0)
        && free.vector[1..].iter().all(|z| *z == Complex64::new(0.0, 0.0));

    let wide = basis(sixteen_modes(), 4);
    let strong = smooth_gaussian_kernel(wide.table(), 30.0, 1.0).unwrap();
    let mut highest = f64::NEG_INFINITY;
    for &g in &[0.05, 0.5, 1.0, 2.0] {
        for &sigma in &[1.0, 0.55, 0.25, 0.1, 0.0] {
            highest = highest.max(verify::cutoff_ground_state(&wide, &params(), &strong, g, sigma, &opts).unwrap().energy);
        }
    }

    let mut worst = 0.0f64;
    for (table, n_max, amp) in [(eight_modes(), 8, 40.0), (sixteen_modes(), 3, 60.0), (sixteen_modes(), 2, 5.0)] {
        let b = basis(table, n_max);
        assert!(b.len() <= DENSE_MAX_DIM);
        let h = assemble_h(&b, &params().with_g(1.0), &smooth_gaussian_kernel(b.table(), amp, 1.0).unwrap()).unwrap();
        let dense = SymmetricEigen::new(h.to_dense()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.max((ground_state(&h, &opts).unwrap().energy - dense).abs());
    }
    verdict(
        vacuum && highest <= 0.0 && worst <= DENSE_TOL,
        format!("free vacuum exact: {vacuum}, max cut energy {highest:.3e}, solver vs dense {worst:.1e}"),
    )
}

fn cutoff_convergence() -> Verdict {
    let b = basis(sixteen_modes(), 4);
    let g = random_kernel(b.table(), &mut seeded(6));
    let results = verify::check_cutoff_convergence(&b, &params(), &g, 0.3, &[0.7, 0.55, 0.35, 0.25, 0.1], 50, 2, 1.0)
        .unwrap();
    all_passed(&results)
}

fn overlap_trend() -> Verdict {
    let b = basis(sixteen_modes(), 3);
    let g = smooth_gaussian_kernel(b.table(), 1.0, 1.0).unwrap();
    let (results, points) =
        verify::check_overlap(&b, &params(), &g, &[0.2, 0.1, 0.05, 0.025], 0.1, 0.5, &SolverOptions::default()).unwrap();
    let v = all_passed(&results);
    let c = results.iter().find_map(|r| r.fitted).unwrap_or(f64::NAN);
    let worst = points.iter().map(|p| p.deficiency).fold(0.0, f64::max);
    verdict(v.passed, format!("{}; fitted c {c:.3e}, largest deficiency {worst:.1e}", v.detail))
}

fn coupling_scaling() -> Verdict {
    let b = basis(sixteen_modes(), 3);
    let g = smooth_gaussian_kernel(b.table(), 1.0, 1.0).unwrap();
    let r = verify::check_number_scaling(
        &b,
        &params(),
        &g,
        &[0.1, 0.05, 0.02, 0.01],
        0.1,
        SCALING_SPREAD,
        &SolverOptions::default(),
    )
    .unwrap();
    verdict(r.passed, r.summary())
}

fn free_windows() -> Verdict {
    let start = Instant::now();
    let b = basis(sixteen_modes(), 4);
    let p = params();
    let (h0, c0) = (assemble_h0(&b, &p), commutator_a_h0(&b, &p));
    let s = thresholds(&p, 8.0).unwrap();
    let mut rng = seeded(17);
    let (mut done, mut worst) = (0, f64::INFINITY);
    while done < 20 {
        let a: f64 = rng.random_range(0.05..5.0);
        let w: f64 = rng.random_range(0.02..0.6);
        if s.collision(a, a + w).is_some() {
            continue;
        }
        let rec = mourre_bottom(&h0, &c0, (a, a + w), &s).unwrap();
        worst = worst.min(rec.bottom - rec.beta);
        done += 1;
    }
    let elapsed = start.elapsed();
    verdict(
        worst >= -FREE_SLACK && elapsed < FREE_BUDGET && b.len() <= FREE_MAX_DIM,
        format!("20 windows on dim {}, min(bottom - beta) {worst:.3e}, {elapsed:.2?}", b.len()),
    )
}

fn interacting_commutator() -> Verdict {
    let b = basis(sixteen_modes(), 3);
    let g = smooth_gaussian_kernel(b.table(), 3.0, 1.0).unwrap();
    let windows = [(1.2, 1.4), (0.3, 0.7), (2.2, 2.4), (5.1, 5.2)];
    let scan = verify::check_mourre(&b, &params(), &g, &[0.2, 0.1, 0.05], &windows).unwrap();
    let v = all_passed(&scan.results);
    let sharp = sharp_cutoff_kernel(b.table(), 2.0).unwrap();
    let rejected = matches!(verify::check_mourre(&b, &params(), &sharp, &[0.1], &windows), Err(Error::NotDifferentiable(_)));
    verdict(v.passed && rejected, format!("{}; fitted c {:.3e}; sharp kernel rejected: {rejected}", v.detail, scan.fitted_c))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fermiweak")).args(args).output().expect("binary runs")
}

fn determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("fermiweak-acceptance-{}", std::process::id()));
    let cfg = configs().join("default.toml");
    let mut same = true;
    let mut names = Vec::new();
    for cmd in ["gs-scan", "ir-scan", "mourre"] {
        let outputs: Vec<Vec<u8>> = ["a", "b"]
            .iter()
            .map(|run| {
                let out = dir.join(format!("{cmd}-{run}.csv"));
                let o = cli(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
                assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
                std::fs::read(out).unwrap()
            })
            .collect();
        same &= !outputs[0].is_empty() && outputs[0] == outputs[1];
        names.push(format!("{cmd} {} bytes", outputs[0].len()));
    }
    let _ = std::fs::remove_dir_all(&dir);
    verdict(same, format!("byte-identical: {}", names.join(", ")))
}

fn negative_control() -> Verdict {
    let b = basis(eight_modes().with_grading(Grading::commuting_neutrinos()), 8);
    let failed: Vec<String> =
        verify::check_algebra(&b).unwrap().into_iter().filter(|r| !r.passed).map(|r| r.name).collect();
    let cfg = configs().join("negative-control.toml");
    let out = std::env::temp_dir().join(format!("fermiweak-negative-{}.jsonl", std::process::id()));
    let o = cli(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let _ = std::fs::remove_file(&out);
    let _ = std::fs::remove_file(out.with_extension("jsonl.meta.json"));
    let code = o.status.code();
    verdict(!failed.is_empty() && code == Some(1), format!("failing relations {failed:?}, cli exit {code:?}"))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("algebra-relations", algebra),
        ("sign-fixtures", sign_fixtures),
        ("smeared-norm", smeared_norm),
        ("norm-bound-suites", norm_suites),
        ("relative-bound-chain", relative_chain),
        ("number-identity", number_identity),
        ("ground-state-limits", ground_limits),
        ("cutoff-convergence", cutoff_convergence),
        ("overlap-trend", overlap_trend),
        ("coupling-scaling", coupling_scaling),
        ("free-commutator-windows", free_windows),
        ("interacting-commutator", interacting_commutator),
        ("determinism", determinism),
        ("negative-control", negative_control),
    ];
    let mut unexpected = Vec::new();
    for (name, run) in criteria {
        let v = run();
        let status = if v.passed { "PASS" } else { "FAIL" };
        let tag = if !v.passed && KNOWN_RED.contains(&name) { " (known red)" } else { "" };
        println!("{status} {name}{tag} | {}", v.detail);
        if !v.passed && !KNOWN_RED.contains(&name) {
            unexpected.push(name);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
