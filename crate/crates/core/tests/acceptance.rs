//! Acceptance criteria. Runs as a plain binary and prints one PASS/FAIL
//! line per criterion; the process fails if any criterion fails.

use nalgebra::DMatrix;
use qsieve::decomposition::{self, ClassifyOptions};
use qsieve::linalg::{CVector, C64};
use qsieve::liouvillian::{eis_check, Dissipator, LindbladGenerator};
use qsieve::models::davies::{self, exact_moment, DiscQuadrature};
use qsieve::models::oscillator::{position_variance, qbm_model, squeezed_vacuum, truncation_ok, QbmParams};
use qsieve::models::{davies_default, grw_lambda_formula, grw_model, nearest_su11_coherent, pointer_model, su11_coherent_state, toy_model};
use qsieve::operator::{self, PureState};
use qsieve::sieve::{self, lambda_gradient, lambda_pure, minimize_lambda, PurityLossAverager, SieveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn low_lying_state(dim: usize, support: usize, rng: &mut ChaCha8Rng) -> PureState {
    let inner = PureState::random(support, rng);
    let mut v = CVector::zeros(dim);
    v.rows_mut(0, support).copy_from(inner.amplitudes());
    PureState::new(v).unwrap()
}

fn toy_flatness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let gen = toy_model(operator::random_hermitian(2, &mut rng)).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        worst = worst.max((lambda_pure(&gen, &PureState::random(2, &mut rng)) - 1.0).abs());
    }
    check(worst <= 1e-10, format!("max |λ - 1| = {worst:e}"))?;
    let report = minimize_lambda(&gen, &SieveOptions::default()).map_err(|e| e.to_string())?;
    check((report.a0 - 1.0).abs() <= 1e-10, format!("a0 = {}", report.a0))?;
    check(report.flat_landscape, "landscape not flagged flat")?;
    check(report.quasi_classical().is_empty(), format!("{} quasi-classical states", report.quasi_classical().len()))?;
    Ok(format!("max |λ - 1| = {worst:.1e}, S_qc empty, {} minimizers in band", report.minimizers.len()))
}

fn pointer_classification() -> Outcome {
    let mut notes = Vec::new();
    for (d, energies) in [(2, vec![0.0, 1.0]), (3, vec![0.0, 1.0, 2.5]), (5, vec![0.0, 0.7, 1.3, 2.9, 4.2])] {
        let gen = pointer_model(&energies).map_err(|e| e.to_string())?;
        let sup = gen.superoperator();
        let split = decomposition::spectral_split(&sup, None).map_err(|e| e.to_string())?;
        check(split.iso_dim() == d && split.sweep_dim() == d * d - d, format!("d = {d}: split ({}, {})", split.iso_dim(), split.sweep_dim()))?;
        let set = decomposition::classical_states(&gen, &split, &ClassifyOptions::default()).map_err(|e| e.to_string())?;
        check(set.len() == d, format!("d = {d}: {} classical states", set.len()))?;
        let mut hit = vec![false; d];
        for s in &set.states {
            let k = (0..d).find(|&k| s.fidelity(&PureState::basis(d, k)) > 1.0 - 1e-12);
            match k {
                Some(k) if !hit[k] => hit[k] = true,
                _ => return Err(format!("d = {d}: state {s:?} is not a new basis state")),
            }
        }
        let overlap = set.max_off_diagonal_overlap();
        let residual = set.fixed_point_residuals.iter().copied().fold(0.0, f64::max);
        check(overlap <= 1e-8 && residual <= 1e-8, format!("d = {d}: overlap {overlap:e}, residual {residual:e}"))?;
        notes.push(format!("d={d} ok"));
    }
    Ok(notes.join(", "))
}

fn qbm() -> Outcome {
    let params = QbmParams { cutoff: 30, diffusion: 0.01, omega: 1.0 };
    let gen = qbm_model(params).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let psi = low_lying_state(30, 10, &mut rng);
        check(truncation_ok(&psi), "sample reaches the cutoff")?;
        let want = 2.0 * params.diffusion * position_variance(&psi);
        worst = worst.max((lambda_pure(&gen, &psi) - want).abs() / want);
    }
    check(worst <= 1e-8, format!("max relative error {worst:e}"))?;
    let period = 2.0 * std::f64::consts::PI / params.omega;
    let avg = PurityLossAverager::new(&gen, period, 64).map_err(|e| e.to_string())?;
    let family: Vec<f64> = (-10..=10).map(|k| 0.05 * k as f64).collect();
    let losses: Vec<f64> = family.iter().map(|&s| avg.average(&squeezed_vacuum(30, s))).collect();
    let (best, _) = losses.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    check(family[best].abs() <= 0.05 + 1e-12, format!("period-averaged minimum at s = {}", family[best]))?;
    Ok(format!("max rel err {worst:.1e}, period-averaged minimum at s = {:.2}", family[best]))
}

fn grw() -> Outcome {
    let d = 128;
    let grid: Vec<f64> = (0..d).map(|k| -6.0 + 12.0 * k as f64 / (d - 1) as f64).collect();
    let (kappa, alpha) = (1.0, 2.0);
    let gen = grw_model(&grid, kappa, alpha, None).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    let mut max_lambda = 0.0f64;
    for _ in 0..100 {
        let psi = PureState::random(d, &mut rng);
        let p: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm_sqr()).collect();
        let want = grw_lambda_formula(&grid, kappa, alpha, &p);
        let got = lambda_pure(&gen, &psi);
        worst = worst.max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
        max_lambda = max_lambda.max(got);
    }
    check(worst <= 1e-10, format!("formula mismatch {worst:e}"))?;
    let widths: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
    let mut last = -1.0;
    for &w in &widths {
        let v = CVector::from_iterator(d, grid.iter().map(|x| C64::new((-x * x / (4.0 * w * w)).exp(), 0.0)));
        let l = lambda_pure(&gen, &PureState::new(v).unwrap());
        check(l > last, format!("λ not increasing at width {w}: {l} <= {last}"))?;
        check(l < kappa, format!("λ = {l} reaches κ"))?;
        last = l;
        max_lambda = max_lambda.max(l);
    }
    check(max_lambda < kappa, format!("λ = {max_lambda} reaches κ"))?;
    Ok(format!("formula rel err {worst:.1e}, monotone over {} widths, max λ = {max_lambda:.4}", widths.len()))
}

fn quadrature_part(gen: &LindbladGenerator) -> Result<&qsieve::liouvillian::QuadratureDissipator, String> {
    match gen.dissipator() {
        Dissipator::Quadrature(q) => Ok(q),
        _ => Err("not a quadrature dissipator".into()),
    }
}

/// `tr J(e_ψ)`: the rank-one terms contribute `w |⟨v|ψ⟩|² ‖v‖²`, the
/// level transfer `Σ T_mn |ψ_n|²`.
fn jump_trace(q: &qsieve::liouvillian::QuadratureDissipator, psi: &PureState) -> f64 {
    let a = psi.amplitudes();
    let mut total: f64 = q.rank_one_terms().iter().map(|(w, v)| w * v.dotc(a).norm_sqr() * v.norm_squared()).sum();
    if let Some(t) = q.transfer() {
        let p: Vec<f64> = a.iter().map(|z| z.norm_sqr()).collect();
        let tp: DMatrix<f64> = t * DMatrix::from_column_slice(p.len(), 1, &p);
        total += tp.sum();
    }
    total
}

fn davies_quadrature() -> Outcome {
    let n = 40;
    let kappa = 1.0;
    let quad = DiscQuadrature::for_cutoff(n);
    let mut worst_moment = 0.0f64;
    for k in 0..=5 {
        let err = (quad.moment(k) - exact_moment(k)).abs();
        worst_moment = worst_moment.max(err);
    }
    let table = [1.0 / 3.0, 2.0 / 15.0, 3.0 / 35.0, 4.0 / 63.0, 5.0 / 99.0, 6.0 / 143.0];
    for (k, want) in table.iter().enumerate() {
        check((exact_moment(k) - want).abs() < 1e-15, format!("moment table entry {k}"))?;
    }
    check(worst_moment <= 1e-6, format!("moment error {worst_moment:e}"))?;
    let model = davies::davies_model(n, kappa, &(0..n).map(|k| k as f64).collect::<Vec<_>>(), &quad).map_err(|e| e.to_string())?;
    let q = quadrature_part(&model.generator)?;
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let psi = PureState::random(n, &mut rng);
        worst = worst.max((jump_trace(q, &psi) - kappa).abs());
    }
    for z in [C64::new(0.3, 0.2), C64::new(-0.5, 0.1), C64::new(0.0, -0.6)] {
        let psi = su11_coherent_state(n, z).map_err(|e| e.to_string())?;
        worst = worst.max((jump_trace(q, &psi) - kappa).abs());
    }
    check(worst <= 1e-4, format!("tr J - κ = {worst:e}"))?;
    Ok(format!("moment err {worst_moment:.1e}, |tr J - κ| <= {worst:.1e}"))
}

fn davies_coherent_sieve() -> Outcome {
    let n = 40;
    let kappa = 1.0;
    let two_thirds = 2.0 * kappa / 3.0;
    let model = davies_default(n, kappa).map_err(|e| e.to_string())?;
    let gen = &model.generator;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut coherent = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let r = 0.6 * rng.random::<f64>().sqrt();
        let z = C64::from_polar(r, 2.0 * std::f64::consts::PI * rng.random::<f64>());
        let psi = su11_coherent_state(n, z).map_err(|e| e.to_string())?;
        worst = worst.max((lambda_pure(gen, &psi) - two_thirds).abs());
        coherent.push(psi);
    }
    check(worst <= 1e-3, format!("|λ(e_ζ) - 2κ/3| = {worst:e}"))?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..200 {
        let l = lambda_pure(gen, &PureState::random(n, &mut rng));
        lo = lo.min(l);
        hi = hi.max(l);
    }
    check(lo >= two_thirds - 1e-3 && hi < kappa, format!("random λ range [{lo}, {hi}]"))?;

    let report = minimize_lambda(gen, &SieveOptions { seed: 7, ..Default::default() }).map_err(|e| e.to_string())?;
    check((report.a0 - two_thirds).abs() <= 1e-3, format!("a0 = {}", report.a0))?;
    let mut min_fid = 1.0f64;
    for m in &report.minimizers {
        min_fid = min_fid.min(nearest_su11_coherent(&m.state).1);
    }
    check(min_fid >= 0.999, format!("minimizer fidelity to nearest coherent state {min_fid}"))?;
    check(report.quasi_classical_flags.iter().all(|&f| f), "a minimizer failed the exclusion test")?;

    // Pairs of sampled coherent states that are distinct in the sense of
    // the sieve's partner filter.
    let threshold = report.a0 + report.epsilon;
    let mut pairs = 0;
    let mut margin = f64::INFINITY;
    for i in 0..coherent.len() {
        for j in (i + 1)..coherent.len() {
            if coherent[i].fidelity(&coherent[j]) >= SieveOptions::default().pair_max_fidelity {
                continue;
            }
            pairs += 1;
            let grid = sieve::superposition_grid_states(&coherent[i], &coherent[j], 24, 16).map_err(|e| e.to_string())?;
            for g in &grid {
                margin = margin.min(lambda_pure(gen, g) - threshold);
            }
        }
    }
    check(pairs > 0 && margin > 0.0, format!("{pairs} pairs, smallest margin {margin:e}"))?;
    Ok(format!(
        "a0 = {:.6}, {} minimizers (min coherent fidelity {min_fid:.6}), {pairs} coherent pairs clear a0 + ε by >= {margin:.1e}",
        report.a0,
        report.minimizers.len()
    ))
}

fn robustness_equivalence() -> Outcome {
    let d = 5;
    let gen = pointer_model(&[0.0, 0.7, 1.3, 2.9, 4.2]).map_err(|e| e.to_string())?;
    let split = decomposition::spectral_split(&gen.superoperator(), None).map_err(|e| e.to_string())?;
    let times = [0.5, 1.0, 2.0, 5.0, 10.0];
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut states: Vec<PureState> = (0..d).map(|k| PureState::basis(d, k)).collect();
    for k in 0..d {
        for &size in &[1e-1, 1e-2] {
            let mut v = PureState::basis(d, k).amplitudes().clone();
            v += PureState::random(d, &mut rng).amplitudes() * C64::new(size, 0.0);
            states.push(PureState::new(v).unwrap());
        }
    }
    while states.len() < 50 {
        states.push(PureState::random(d, &mut rng));
    }
    let (mut robust, mut members) = (0, 0);
    for s in &states {
        let e = s.projector();
        let r = decomposition::robustness_probe(&gen, &e, &times, Some(&split)).map_err(|e| e.to_string())?;
        let membership = decomposition::iso_membership(&split, &e);
        let a = r.forward <= 1e-8;
        let b = membership <= 1e-6;
        check(a == b, format!("counterexample: purity loss {:e}, membership {membership:e}", r.forward))?;
        robust += a as usize;
        members += b as usize;
    }
    Ok(format!("{} states, {robust} robust, {members} in the isometric part, no counterexamples", states.len()))
}

fn finite_difference(gen: &LindbladGenerator, psi: &PureState, rng: &mut ChaCha8Rng) -> f64 {
    let a = psi.amplitudes();
    let mut delta = PureState::random(psi.dim(), rng).amplitudes().clone();
    let along = a.dotc(&delta);
    delta -= a * along;
    delta.unscale_mut(delta.norm());
    let h = 1e-5;
    let at = |t: f64| {
        let v = a + &delta * C64::new(t, 0.0);
        lambda_pure(gen, &PureState::new(v).unwrap())
    };
    let fd = (at(h) - at(-h)) / (2.0 * h);
    let analytic = lambda_gradient(gen, psi).dotc(&delta).re;
    (fd - analytic).abs() / analytic.abs().max(1e-3)
}

fn property_suite() -> Outcome {
    let models: Vec<(&str, LindbladGenerator)> = vec![
        ("pointer", pointer_model(&[0.0, 0.4, 1.1, 2.0]).map_err(|e| e.to_string())?),
        ("qbm", qbm_model(QbmParams { cutoff: 10, diffusion: 0.2, omega: 1.0 }).map_err(|e| e.to_string())?),
        (
            "grw",
            grw_model(&(0..12).map(|k| -2.0 + 4.0 * k as f64 / 11.0).collect::<Vec<_>>(), 1.0, 1.5, Some(2.0)).map_err(|e| e.to_string())?,
        ),
        ("davies", davies_default(8, 1.0).map_err(|e| e.to_string())?.generator),
    ];
    let mut notes = Vec::new();
    for (name, gen) in &models {
        let eis = eis_check(gen, 6, &[0.1, 1.0, 10.0], 808);
        check(
            eis.passed,
            format!("{name}: choi {:e}, trace {:e}, contraction {:e}/{:e}", eis.min_choi_eigenvalue, eis.max_trace_error, eis.max_trace_norm_excess, eis.max_operator_norm_excess),
        )?;
        let sup = gen.superoperator();
        let split = decomposition::spectral_split(&sup, None).map_err(|e| e.to_string())?;
        let rate = split.diagnostics.spectral_gap;
        let long = if rate > 0.0 { 30.0 / rate } else { 10.0 };
        let report = decomposition::verify_split_properties(&sup, &split, &[0.5, 1.0, long], 6, 809);
        let structural = report.max_structural_residual();
        check(structural <= 1e-7, format!("{name}: structural residual {structural:e} ({report:?})"))?;
        if let Some(decay) = report.sweep_decay {
            check(decay <= 1e-7, format!("{name}: swept part {decay:e} at t = {long}"))?;
        }
        notes.push(format!("{name} {structural:.0e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(810);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let (_, gen) = &models[k % models.len()];
        let psi = PureState::random(gen.dim(), &mut rng);
        worst = worst.max(finite_difference(gen, &psi, &mut rng));
    }
    check(worst <= 1e-5, format!("gradient mismatch {worst:e}"))?;
    Ok(format!("eis + residuals ok ({}), gradient rel err {worst:.1e}", notes.join(", ")))
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("1 toy flatness", Duration::from_secs(1), toy_flatness),
        ("2 pointer classification", Duration::from_secs(5), pointer_classification),
        ("3 QBM variance and averaged purity loss", Duration::from_secs(30), qbm),
        ("4 GRW localization", Duration::from_secs(30), grw),
        ("5 Davies quadrature", Duration::from_secs(10), davies_quadrature),
        ("6 Davies coherent-state sieve", Duration::from_secs(300), davies_coherent_sieve),
        ("7 robustness equivalence", Duration::from_secs(60), robustness_equivalence),
        ("8 property suite", Duration::from_secs(120), property_suite),
    ];
    let only: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, budget, f) in criteria {
        if let Some(filter) = &only {
            if !name.contains(filter.as_str()) {
                continue;
            }
        }
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > budget => Err(format!("{msg}; runtime {elapsed:.2?} over budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {name} [{elapsed:.2?}]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} [{elapsed:.2?}]: {msg}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
