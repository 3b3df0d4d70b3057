//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs as a plain binary (`harness = false`) so the report is always printed.

mod common;

use std::fs;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use mri_lk::forward::{
    cone_pair, cone_probe, estimate_norm, JointCone, JointForward, LinearCone, LinearForward,
    ProductModel, DEFAULT_NORM_ITERATIONS,
};
use mri_lk::io::write_instance;
use mri_lk::phantom::{synthesize, Instance, InstanceSpec, MaskFamily, MaskSize, NoiseSpec};
use mri_lk::solver::{
    run_joint, run_linear, Kaczmarz, LinearProblem, MeasurementSet, Method, SolveResult,
    SolverConfig, Termination,
};
use mri_lk::transform::{embed, project, DftAlgorithm, DftPlan};
use mri_lk::{Complex64, ComplexImage, Error, GridShape, JointParameter, KSpaceMask, SensitivityModel, Vector};

const METHODS: [Method; 2] = [Method::Landweber, Method::SteepestDescent];

struct Outcome {
    pass: bool,
    detail: String,
    /// Bit patterns of every number the criterion computed, for the determinism check.
    bits: Vec<u64>,
}

impl Outcome {
    fn new(pass: bool, detail: String, bits: Vec<u64>) -> Self {
        Self { pass, detail, bits }
    }
}

fn push_image(bits: &mut Vec<u64>, v: &[Complex64]) {
    bits.extend(v.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]));
}

fn push_result<P>(bits: &mut Vec<u64>, r: &SolveResult<P>, values: &[Complex64]) {
    for rec in &r.trace.records {
        bits.extend([rec.k as u64, rec.omega as u64, rec.alpha.to_bits(), rec.residual.to_bits()]);
        bits.push(rec.error.map_or(u64::MAX, f64::to_bits));
    }
    bits.push(r.trace.stopping_index.map_or(u64::MAX, |k| k as u64));
    push_image(bits, values);
}

fn spec(p: usize, seed: u64) -> InstanceSpec {
    InstanceSpec {
        p_hor: p,
        p_ver: p,
        seed,
        ..InstanceSpec::default()
    }
}

fn linear_problem(inst: &Instance, data: MeasurementSet, method: Method) -> LinearProblem {
    let mut problem = inst.linear_problem_with(data).unwrap();
    if method == Method::Landweber {
        problem.rescale_to_unit().unwrap();
    }
    problem
}

/// Max over receivers of the oracle residual, in the problem's (possibly scaled) units.
fn oracle_residuals(inst: &Instance, problem: &LinearProblem, image: &ComplexImage) -> Vec<f64> {
    let basis = inst.model.basis();
    problem
        .ops()
        .iter()
        .zip(problem.data().data())
        .enumerate()
        .map(|(i, (op, m))| {
            residual_oracle(op.scale(), &inst.mask, basis, &inst.model.coefficients()[i], image.values(), m.values())
        })
        .collect()
}

// 1. fast DFT against the direct sum
fn transform_oracle() -> Outcome {
    let mut bits = Vec::new();
    let mut worst: f64 = 0.0;
    let mut rng = rng(1);
    for p in [4usize, 64, 1024, 4096] {
        let fast = DftPlan::new(p, DftAlgorithm::Fast).unwrap();
        for _ in 0..50 {
            let x = random_values(p, &mut rng);
            let mut y = x.clone();
            fast.forward_in_place(&mut y).unwrap();
            let want = naive_dft(&x);
            let err = y.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst = worst.max(err);
            bits.push(err.to_bits());
        }
    }
    Outcome::new(worst <= 1e-9, format!("max |fast - naive| = {worst:.2e} (<= 1e-9)"), bits)
}

fn dot_gap(ax: &[Complex64], y: &[Complex64], x: &[Complex64], aty: &[Complex64]) -> f64 {
    (dot(ax, y) - dot(x, aty)).norm() / (norm(x) * norm(y) + 1.0)
}

// 2. adjoint dot-product tests on the default 32×32 instance
fn adjoint_suite() -> Outcome {
    let inst = synthesize(&spec(32, 0)).unwrap();
    let shape = inst.shape();
    let r = inst.r_num();
    let b = inst.model.b_num();
    let ops = inst.linear_ops().unwrap();
    let jops = inst.joint_ops().unwrap();
    let mut rng = rng(2);
    let mut bits = Vec::new();
    let mut worst = [0.0f64; 4];
    for t in 0..100 {
        let x = random_image(shape, &mut rng);
        let g = random_values(inst.mask.p_proj(), &mut rng);
        let gm = mri_lk::MeasurementVector::new(inst.mask.clone(), g.clone()).unwrap();
        let y = random_image(shape, &mut rng);

        let px = project(&inst.mask, &x).unwrap();
        let pg = embed(&inst.mask, &gm).unwrap();
        let gaps = [
            dot_gap(px.values(), &g, x.values(), pg.values()),
            dot_gap(
                inst.plan.forward(&x).unwrap().values(),
                y.values(),
                x.values(),
                inst.plan.adjoint(&y).unwrap().values(),
            ),
            {
                let op = &ops[t % r];
                dot_gap(op.apply(&x).unwrap().values(), &g, x.values(), op.adjoint(&gm).unwrap().values())
            },
            {
                let op = &jops[t % r];
                let at = random_joint(shape, r, b, &mut rng);
                let dx = random_joint(shape, r, b, &mut rng);
                let lhs = op.derivative(&at, &dx).unwrap();
                let rhs = op.adjoint_derivative(&at, &gm).unwrap();
                dot_gap(lhs.values(), &g, &dx.to_flat(), &rhs.to_flat())
            },
        ];
        for (w, gap) in worst.iter_mut().zip(gaps) {
            *w = w.max(gap);
            bits.push(gap.to_bits());
        }
    }
    let pass = worst.iter().all(|&w| w <= 1e-10);
    Outcome::new(
        pass,
        format!(
            "100 trials each; max normalized gap P {:.1e}, DFT {:.1e}, F~ {:.1e}, F' {:.1e} (<= 1e-10)",
            worst[0], worst[1], worst[2], worst[3]
        ),
        bits,
    )
}

fn joint_add(x: &JointParameter, t: f64, dx: &JointParameter) -> JointParameter {
    let mut y = x.clone();
    y.axpy(Complex64::new(t, 0.0), dx).unwrap();
    y
}

// 3. derivative check
fn derivative_check() -> Outcome {
    let inst = synthesize(&spec(16, 3)).unwrap();
    let shape = inst.shape();
    let (r, b) = (inst.r_num(), inst.model.b_num());
    let jops = inst.joint_ops().unwrap();
    let mut rng = rng(3);
    let mut bits = Vec::new();
    let (mut worst_fd, mut ratio_lo, mut ratio_hi) = (0.0f64, f64::INFINITY, 0.0f64);
    for trial in 0..10 {
        let op = &jops[trial % r];
        let x = random_joint(shape, r, b, &mut rng);
        let dx = random_joint(shape, r, b, &mut rng);
        let fx = op.apply(&x).unwrap();
        let lin = op.derivative(&x, &dx).unwrap();

        // Central differences: exact for a bilinear map up to rounding.
        let t = 1e-3;
        let fp = op.apply(&joint_add(&x, t, &dx)).unwrap();
        let fm = op.apply(&joint_add(&x, -t, &dx)).unwrap();
        let cd: Vec<Complex64> = fp.values().iter().zip(fm.values()).map(|(a, c)| (a - c) / (2.0 * t)).collect();
        let fd_err = diff_norm(&cd, lin.values()) / norm(lin.values());
        worst_fd = worst_fd.max(fd_err);
        bits.push(fd_err.to_bits());

        // Taylor remainder ‖F(x+t·dx) − F(x) − t·F'(x)dx‖ over three halvings.
        let remainder = |t: f64| {
            let f = op.apply(&joint_add(&x, t, &dx)).unwrap();
            let v: Vec<Complex64> = f
                .values()
                .iter()
                .zip(fx.values())
                .zip(lin.values())
                .map(|((a, c), l)| a - c - l * t)
                .collect();
            norm(&v)
        };
        let errs: Vec<f64> = (0..4).map(|h| remainder(0.1 / 2f64.powi(h))).collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
            bits.push(ratio.to_bits());
        }
    }
    let pass = worst_fd <= 1e-8 && ratio_lo >= 3.5 && ratio_hi <= 4.5;
    Outcome::new(
        pass,
        format!(
            "10 points; central-difference rel. error {worst_fd:.1e}; remainder ratios per halving in [{ratio_lo:.4}, {ratio_hi:.4}] (need [3.5, 4.5])"
        ),
        bits,
    )
}

struct NoisyRun {
    method: Method,
    monotone: bool,
    stopped: bool,
    aligned: bool,
    discrepancy: bool,
    cycles: usize,
}

fn noisy_runs(bits: &mut Vec<u64>) -> Vec<NoisyRun> {
    let mut out = Vec::new();
    for seed in 0..20 {
        let inst = synthesize(&spec(32, 100 + seed)).unwrap();
        for frac in [0.01, 0.05] {
            let data = inst.with_noise_levels(&inst.relative_levels(frac)).unwrap();
            for method in METHODS {
                let problem = linear_problem(&inst, data.clone(), method);
                let cfg = SolverConfig::new(method);
                let res = run_linear(&problem, &cfg, inst.truth.initial_image.clone(), Some(&inst.truth.image)).unwrap();
                push_result(bits, &res, res.solution.values());

                let mut errors: Vec<f64> = res.trace.records.iter().map(|r| r.error.unwrap()).collect();
                errors.push(res.trace.final_error.unwrap());
                let e0 = errors[0];
                let kstar = res.trace.stopping_index.unwrap_or(errors.len() - 1);
                let monotone = errors[..=kstar.min(errors.len() - 1)]
                    .windows(2)
                    .all(|w| w[1] <= w[0] + 1e-12 * e0);

                let r = problem.r_num();
                let residuals = oracle_residuals(&inst, &problem, &res.solution);
                let tau = cfg.tau;
                let discrepancy = residuals
                    .iter()
                    .zip(problem.data().noise_levels())
                    .all(|(res, d)| *res <= tau * d);
                out.push(NoisyRun {
                    method,
                    monotone,
                    stopped: res.termination == Termination::StoppingRule,
                    aligned: res.trace.stopping_index.is_some_and(|k| k % r == 0 && k / r < cfg.max_cycles),
                    discrepancy,
                    cycles: res.trace.stopping_index.map_or(usize::MAX, |k| k / r),
                });
            }
        }
    }
    out
}

// 4 and 5 share the same 80 runs.
fn monotonicity_and_stopping() -> (Outcome, Outcome) {
    let mut bits = Vec::new();
    let runs = noisy_runs(&mut bits);
    let count = |m: Method| runs.iter().filter(|r| r.method == m).count();
    let bad_mono: Vec<_> = runs.iter().filter(|r| !r.monotone).collect();
    let c4 = Outcome::new(
        bad_mono.is_empty(),
        format!(
            "{} lLK + {} lSDK runs on 20 instances; {} with an error increase beyond 1e-12 slack",
            count(Method::Landweber),
            count(Method::SteepestDescent),
            bad_mono.len()
        ),
        bits.clone(),
    );
    let max_cycles = |m: Method| runs.iter().filter(|r| r.method == m).map(|r| r.cycles).max().unwrap();
    let pass = runs.iter().all(|r| r.stopped && r.aligned && r.discrepancy);
    let c5 = Outcome::new(
        pass,
        format!(
            "stopping rule in {}/{} runs, k* multiple of r_num in {}, oracle residuals <= tau*delta in {}; max cycles lLK {} lSDK {}",
            runs.iter().filter(|r| r.stopped).count(),
            runs.len(),
            runs.iter().filter(|r| r.aligned).count(),
            runs.iter().filter(|r| r.discrepancy).count(),
            max_cycles(Method::Landweber),
            max_cycles(Method::SteepestDescent),
        ),
        bits,
    );
    (c4, c5)
}

fn exact_spec(p: usize, mask: MaskFamily, fraction: f64, seed: u64) -> InstanceSpec {
    InstanceSpec {
        mask,
        mask_size: MaskSize::Fraction(fraction),
        noise: NoiseSpec::Absolute(vec![0.0]),
        ..spec(p, seed)
    }
}

// 6. exact data
fn exact_data_convergence() -> Outcome {
    let mut bits = Vec::new();
    let mut notes = Vec::new();
    let mut pass = true;

    let full = synthesize(&exact_spec(8, MaskFamily::Full, 1.0, 6)).unwrap();
    let e0 = full.truth.initial_image.sub(&full.truth.image).unwrap().norm();
    for method in METHODS {
        let problem = linear_problem(&full, full.noisy.clone(), method);
        let cfg = SolverConfig::new(method);
        let res = run_linear(&problem, &cfg, full.truth.initial_image.clone(), Some(&full.truth.image)).unwrap();
        push_result(&mut bits, &res, res.solution.values());
        let rel = res.trace.final_error.unwrap() / e0;
        pass &= rel < 1e-6 && res.termination != Termination::CycleCap;
        notes.push(format!("full {} err {rel:.1e} in {} cycles", method.label(), res.trace.steps() / problem.r_num()));
    }

    let half = synthesize(&exact_spec(8, MaskFamily::Random, 0.5, 6)).unwrap();
    for method in METHODS {
        let problem = linear_problem(&half, half.noisy.clone(), method);
        let initial = problem.residual_norms(&half.truth.initial_image).unwrap().into_iter().fold(0.0, f64::max);
        let cfg = SolverConfig::new(method);
        let res = run_linear(&problem, &cfg, half.truth.initial_image.clone(), Some(&half.truth.image)).unwrap();
        push_result(&mut bits, &res, res.solution.values());
        let fin = oracle_residuals(&half, &problem, &res.solution).into_iter().fold(0.0, f64::max);
        let rel = fin / initial;
        pass &= rel < 1e-8 && res.termination != Termination::CycleCap;
        notes.push(format!("50% {} residual {rel:.1e} in {} cycles", method.label(), res.trace.steps() / problem.r_num()));
    }
    Outcome::new(pass, notes.join("; "), bits)
}

// 7. stability under δ → 0
fn stability() -> Outcome {
    let inst = synthesize(&InstanceSpec {
        mask: MaskFamily::Full,
        mask_size: MaskSize::Fraction(1.0),
        ..spec(16, 7)
    })
    .unwrap();
    let sets = inst.noise_sequence(&inst.relative_levels(0.1), 5).unwrap();
    let mut bits = Vec::new();
    let mut pass = true;
    let mut notes = Vec::new();
    for method in METHODS {
        let errors: Vec<f64> = sets
            .iter()
            .map(|data| {
                let problem = linear_problem(&inst, data.clone(), method);
                let res = run_linear(&problem, &SolverConfig::new(method), inst.truth.initial_image.clone(), Some(&inst.truth.image))
                    .unwrap();
                push_result(&mut bits, &res, res.solution.values());
                res.solution.sub(&inst.truth.image).unwrap().norm()
            })
            .collect();
        let monotone = errors.windows(2).all(|w| w[1] <= 1.1 * w[0]);
        let ratio = errors[4] / errors[0];
        pass &= monotone && ratio <= 0.3;
        notes.push(format!(
            "{} errors {} (e4/e0 = {ratio:.3})",
            method.label(),
            errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")
        ));
    }
    Outcome::new(pass, notes.join("; "), bits)
}

fn dft_2x2_op() -> LinearForward {
    let s = GridShape::new(2, 2).unwrap();
    let one = Complex64::new(1.0, 0.0);
    let model = Arc::new(SensitivityModel::new(vec![ComplexImage::constant(s, one)], vec![vec![one]]).unwrap());
    LinearForward::new(model, Arc::new(KSpaceMask::full(s)), Arc::new(DftPlan::new(4, DftAlgorithm::Naive).unwrap()), 0).unwrap()
}

// 8. unit-norm scaling for lLK
fn scaling_hypothesis() -> Outcome {
    let mut bits = Vec::new();
    let mut worst_est: f64 = 0.0;
    let mut worst_true: f64 = 0.0;
    for (p, mask) in [(32, MaskFamily::Random), (16, MaskFamily::Full)] {
        let inst = synthesize(&InstanceSpec {
            mask,
            ..spec(p, 8)
        })
        .unwrap();
        let mut problem = inst.linear_problem().unwrap();
        let report = problem.rescale_to_unit().unwrap();
        bits.extend(report.norms_after.iter().map(|x| x.to_bits()));
        for (i, op) in problem.ops().iter().enumerate() {
            // fresh estimate from an unrelated start vector
            let est = estimate_norm(op, DEFAULT_NORM_ITERATIONS, 9000 + i as u64).unwrap();
            worst_est = worst_est.max(est).max(report.norms_after[i]);
            if mask == MaskFamily::Full {
                // full mask: ‖c𝐏ℱ(·×S)‖ = c·sqrt(p_num)·max|S|
                let s = sensitivity(inst.model.basis(), &inst.model.coefficients()[i]);
                let exact = op.scale() * (inst.shape().p_num() as f64).sqrt() * s.iter().map(|z| z.norm()).fold(0.0, f64::max);
                worst_true = worst_true.max(exact);
            }
        }
    }
    let problem = LinearProblem::new(
        vec![dft_2x2_op()],
        MeasurementSet::new(vec![dft_2x2_op().apply(&ComplexImage::zeros(GridShape::new(2, 2).unwrap())).unwrap()], vec![0.1]).unwrap(),
    )
    .unwrap();
    let rejected = matches!(
        run_linear(&problem, &SolverConfig::new(Method::Landweber), ComplexImage::zeros(GridShape::new(2, 2).unwrap()), None),
        Err(Error::Config(_))
    );
    let pass = worst_est <= 1.0 + 1e-6 && worst_true <= 1.0 + 1e-6 && rejected;
    Outcome::new(
        pass,
        format!(
            "max estimated norm after rescaling {worst_est:.9}, exact full-mask norm {worst_true:.9} (<= 1 + 1e-6); unscaled norm-2 lLK rejected: {rejected}"
        ),
        bits,
    )
}

// 9. cone condition: linear vs bilinear
fn cone_dichotomy() -> Outcome {
    let mut bits = Vec::new();
    let inst = synthesize(&spec(32, 9)).unwrap();
    let center = inst.truth.image.values().to_vec();
    let mut linear_max: f64 = 0.0;
    for op in inst.linear_ops().unwrap().iter().chain([&dft_2x2_op()]) {
        let c = if op.model().shape().p_num() == center.len() { center.clone() } else { vec![Complex64::new(0.5, 0.0); 4] };
        let rep = cone_probe(&LinearCone(op), &c, 0.1, 200, 9).unwrap();
        linear_max = linear_max.max(rep.max_ratio.unwrap());
        bits.push(rep.max_ratio.unwrap().to_bits());
    }
    let origin = [Complex64::new(0.0, 0.0); 2];
    let scalar = cone_probe(&ProductModel, &origin, 0.1, 1000, 9).unwrap();
    let scalar_max = scalar.max_ratio.unwrap();
    bits.push(scalar_max.to_bits());
    // oracle: for f = xy the pair (t, t), (0, 0) has ratio |t·t| / |t·t| = 1
    let t = Complex64::new(0.01, 0.0);
    let diag = cone_pair(&ProductModel, &[t, t], &origin).unwrap().ratio.unwrap();
    // the joint operators around a generic point also fail the condition
    let jop: &JointForward = &inst.joint_ops().unwrap()[0];
    let joint = cone_probe(&JointCone::new(jop), &inst.truth.joint_solution().to_flat(), 0.1, 50, 9).unwrap();
    bits.push(joint.max_ratio.unwrap().to_bits());

    let pass = linear_max <= 1e-10 && scalar_max >= 1.0 - 1e-9 && scalar.violated && diag == 1.0;
    Outcome::new(
        pass,
        format!(
            "linear max ratio {linear_max:.1e} (<= 1e-10); xy max ratio {scalar_max:.3} (>= 1 - 1e-9), flag {}; diagonal pair {diag}; joint receiver 0 max ratio {:.3}",
            scalar.violated,
            joint.max_ratio.unwrap()
        ),
        bits,
    )
}

// 10. joint iteration smoke
fn joint_smoke() -> Outcome {
    let mut bits = Vec::new();
    let s = GridShape::new(2, 2).unwrap();
    let one = Complex64::new(1.0, 0.0);
    let model = Arc::new(SensitivityModel::new(vec![ComplexImage::constant(s, one)], vec![vec![one], vec![one * 2.0]]).unwrap());
    let mask = Arc::new(KSpaceMask::full(s));
    let plan = Arc::new(DftPlan::new(4, DftAlgorithm::Fast).unwrap());
    let ops: Vec<_> = (0..2).map(|i| JointForward::new(model.clone(), mask.clone(), plan.clone(), i).unwrap()).collect();
    let truth = JointParameter::new(ComplexImage::constant(s, one), model.coefficients().to_vec());
    let data: Vec<_> = ops.iter().map(|op| op.apply(&truth).unwrap()).collect();

    // Least-squares oracle with the image frozen at P ≡ 1: bᵢ = ⟨ℱP, 𝓜ᵢ⟩ / ‖ℱP‖².
    let fp = naive_dft(&[one; 4]);
    let oracle: f64 = data
        .iter()
        .map(|m| {
            let b = dot(m.values(), &fp) / norm(&fp).powi(2);
            let fit: Vec<Complex64> = fp.iter().map(|z| z * b).collect();
            diff_norm(&fit, m.values()).powi(2)
        })
        .sum::<f64>()
        .sqrt();

    let problem = mri_lk::solver::JointProblem::new(ops, MeasurementSet::new(data, vec![0.0, 0.0]).unwrap()).unwrap();
    let start = JointParameter::new(ComplexImage::constant(s, one), vec![vec![one * 0.5], vec![one * 0.5]]);
    let mut sweep = Kaczmarz::new(&problem, SolverConfig::default(), start, None).unwrap();
    let total = |x: &JointParameter| problem.residual_norms(x).unwrap().iter().map(|r| r * r).sum::<f64>().sqrt();
    let mut history = vec![total(sweep.iterate())];
    for _ in 0..50 {
        sweep.cycle().unwrap();
        history.push(total(sweep.iterate()));
    }
    bits.extend(history.iter().map(|x| x.to_bits()));
    let monotone = history.windows(2).all(|w| w[1] <= w[0]);
    let tiny_final = *history.last().unwrap();
    let tiny_ok = monotone && (tiny_final - oracle).abs() <= 1e-6;

    let inst = synthesize(&InstanceSpec { joint: true, ..spec(16, 10) }).unwrap();
    let problem = inst.joint_problem().unwrap();
    let x0 = inst.truth.joint_initial();
    let initial = problem.residual_norms(&x0).unwrap().into_iter().fold(0.0, f64::max);
    let res = run_joint(&problem, &SolverConfig::default(), x0, Some(&inst.truth.joint_solution())).unwrap();
    push_result(&mut bits, &res, &res.solution.to_flat());
    let fin = problem.residual_norms(&res.solution).unwrap().into_iter().fold(0.0, f64::max);
    let generic_ok = fin <= 0.1 * initial && res.experimental;

    Outcome::new(
        tiny_ok && generic_ok,
        format!(
            "2x2: residual {:.2e} -> {tiny_final:.1e} over 50 cycles, monotone {monotone}, oracle {oracle:.1e}; 16x16: max residual {initial:.3e} -> {fin:.3e} (ratio {:.4}, need <= 0.1), {:?}",
            history[0],
            fin / initial,
            res.termination
        ),
        bits,
    )
}

// 11. determinism, including the files an instance writes
fn instance_bytes() -> Vec<u64> {
    let inst = synthesize(&spec(16, 11)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut files = write_instance(&inst, dir.path()).unwrap();
    files.sort();
    files
        .iter()
        .flat_map(|f| fs::read(f).unwrap())
        .map(u64::from)
        .collect()
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, out: &Outcome, elapsed: Duration, budget: Option<u64>) {
        let in_time = budget.is_none_or(|b| elapsed <= Duration::from_secs(b));
        let ok = out.pass && in_time;
        if !ok {
            self.failures += 1;
        }
        let budget = budget.map_or(String::new(), |b| format!(", budget {b}s"));
        println!(
            "criterion {name}: {} [{:.2}s{budget}] {}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn main() {
    let mut report = Report { failures: 0 };
    let mut first: Vec<Vec<u64>> = Vec::new();

    let singles: [(&str, fn() -> Outcome, Option<u64>); 3] = [
        ("1 transform oracle", transform_oracle, Some(10)),
        ("2 adjoint dot products", adjoint_suite, Some(30)),
        ("3 derivative check", derivative_check, Some(10)),
    ];
    for (name, f, budget) in singles {
        let (out, dt) = timed(f);
        report.line(name, &out, dt, budget);
        first.push(out.bits);
    }

    let ((c4, c5), dt) = timed(monotonicity_and_stopping);
    report.line("4 monotonicity", &c4, dt, Some(120));
    report.line("5 finite stopping + discrepancy", &c5, dt, Some(120));
    first.push(c4.bits);

    let rest: [(&str, fn() -> Outcome, Option<u64>); 5] = [
        ("6 exact-data convergence", exact_data_convergence, Some(60)),
        ("7 stability", stability, Some(180)),
        ("8 lLK scaling", scaling_hypothesis, None),
        ("9 cone dichotomy", cone_dichotomy, None),
        ("10 joint smoke", joint_smoke, None),
    ];
    for (name, f, budget) in rest {
        let (out, dt) = timed(f);
        report.line(name, &out, dt, budget);
        first.push(out.bits);
    }
    first.push(instance_bytes());

    // 11: repeat every run and compare bit patterns
    let (second, dt) = timed(|| {
        vec![
            transform_oracle().bits,
            adjoint_suite().bits,
            derivative_check().bits,
            monotonicity_and_stopping().0.bits,
            exact_data_convergence().bits,
            stability().bits,
            scaling_hypothesis().bits,
            cone_dichotomy().bits,
            joint_smoke().bits,
            instance_bytes(),
        ]
    });
    let names = ["1", "2", "3", "4/5", "6", "7", "8", "9", "10", "instance files"];
    let mismatched: Vec<&str> = names
        .iter()
        .zip(first.iter().zip(&second))
        .filter(|(_, (a, b))| a != b)
        .map(|(n, _)| *n)
        .collect();
    let compared: usize = second.iter().map(Vec::len).sum();
    let c11 = Outcome::new(
        mismatched.is_empty(),
        format!("{compared} recorded values reproduced bit for bit on a second run; mismatches: {mismatched:?}"),
        Vec::new(),
    );
    report.line("11 determinism", &c11, dt, None);

    if report.failures > 0 {
        println!("acceptance: {} criterion line(s) failed", report.failures);
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
