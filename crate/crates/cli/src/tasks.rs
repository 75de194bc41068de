//! The five tasks. Each returns its checks; CSV files go to `out` when given.

use std::path::Path;

use blochlat::norms::{self, SamplingPlan, WeightedNorm};
use blochlat::opfunc::{self, Contour, NamedFunction};
use blochlat::periodic_op::{max_abs, max_abs_diff, reconstruct};
use blochlat::periodization::{default_nodes, fiber_hat, periodize};
use blochlat::verify::{self, Check, SuiteConfig, BOUND_SLACK, FUNCTION_TOLERANCE, IDENTITY_TOLERANCE};
use blochlat::{random, LatticeKind, Shape, ZKernel};
use num_complex::Complex64;

use crate::config::{Job, TaskName};
use crate::error::CliResult;
use crate::kernel;
use crate::report::{num, CsvOut};

pub fn run(job: &Job, out: &Path) -> CliResult<Vec<Check>> {
    let a = job
        .kernel
        .as_ref()
        .map(|k| kernel::build(&job.spec, k, job.seed))
        .transpose()?;
    let a = a.as_ref();
    match job.task {
        TaskName::Fibers => fibers(job, a.expect("validated"), Some(out)),
        TaskName::Norms => norm_task(job, a.expect("validated"), Some(out)),
        TaskName::Decay => decay(job, a.expect("validated")),
        TaskName::Funcalc => funcalc(job, a.expect("validated"), out),
        TaskName::Verify => {
            let cfg = SuiteConfig {
                seed: job.seed,
                kernels: job.kernels,
                fields: job.fields,
                strip_samples: job.strip_samples,
                fiber_points: job.fiber_points,
                weight: job.weight,
                scale: job.scale,
            };
            let mut checks = verify::run_suite(&job.spec, &cfg)?;
            if let Some(a) = a {
                checks.extend(fibers(job, a, None)?);
                checks.extend(norm_task(job, a, None)?);
                checks.extend(decay(job, a)?);
            }
            Ok(checks)
        }
    }
}

fn axis_columns(prefix: &str, axes: usize) -> Vec<String> {
    (0..axes).map(|a| format!("{prefix}_{a}")).collect()
}

/// Fibers at the discrete momenta of the torus, their agreement with the
/// infinite-lattice fiber, and the reconstruction of the operator from them.
fn fibers(job: &Job, a: &ZKernel, out: Option<&Path>) -> CliResult<Vec<Check>> {
    let spec = &job.spec;
    let per = periodize(a)?;
    let fam = per.family().clone();
    let reps = fam.canonical_k_reps();
    let fibers = per.bloch_fibers(&reps)?;

    let (mut dev, mut scale, mut at) = (0.0f64, 0.0f64, reps[0].clone());
    for (kj, fb) in reps.iter().zip(&fibers) {
        let k: Vec<Complex64> = spec.discrete_momentum(kj).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        let d = max_abs_diff(fiber_hat(a, &k).entries(), fb.entries());
        if d > dev {
            dev = d;
            at = kj.clone();
        }
        scale = scale.max(max_abs(fb.entries()));
    }
    let rebuilt = reconstruct(&fam, &fibers)?;
    let checks = vec![
        Check::le("configured_discrete_k_fiber_consistency", "lemBOifkervar.c", dev, IDENTITY_TOLERANCE * scale)
            .with_witness(format!("k index {at:?}")),
        Check::le(
            "configured_position_from_fibers",
            "lemBOkervar.b",
            max_abs_diff(rebuilt.entries(), per.entries()),
            IDENTITY_TOLERANCE * max_abs(per.entries()),
        ),
    ];

    if let Some(dir) = out {
        let mut header = axis_columns("k_index", spec.axes());
        header.extend(["ell_row", "ell_col", "re", "im"].map(String::from));
        let mut csv = CsvOut::create(dir, "fibers.csv", &header)?;
        for (kj, fb) in reps.iter().zip(&fibers) {
            let m = fb.entries();
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let mut row: Vec<String> = kj.iter().map(|x| x.to_string()).collect();
                    row.extend([i.to_string(), j.to_string(), num(m[(i, j)].re), num(m[(i, j)].im)]);
                    csv.row(&row)?;
                }
            }
        }
        csv.finish()?;
    }
    Ok(checks)
}

/// Weighted norms of the kernel and of its periodization, and the fiber
/// sup bound on the strip |Im k| ≤ m.
fn norm_task(job: &Job, a: &ZKernel, out: Option<&Path>) -> CliResult<Vec<Check>> {
    let w = job.weight;
    let per = periodize(a)?;
    let rows: Vec<(&str, f64, f64, f64)> = [("m", w.m), ("m_prime", w.m_prime), ("m_dblprime", w.m_dblprime)]
        .into_iter()
        .map(|(name, m)| (name, m, a.weighted_norm(m), per.weighted_norm(m)))
        .collect();

    let mut rng = random::seeded(job.seed);
    let ks = norms::sample_strip(&job.spec, w.m, job.strip_samples, &mut rng);
    let sup = norms::fiber_sup_bound_check(a, w.m, &ks);
    let mut checks = vec![Check::le(
        "configured_fiber_entries_bounded_by_norm",
        "lemBOlonelinfty.a",
        sup.max_entry,
        sup.norm * (1.0 + BOUND_SLACK),
    )
    .with_witness(format!(
        "k = {:?}, entry ({}, {})",
        sup.witness.k, sup.witness.row, sup.witness.col
    ))];
    for &(name, _, kernel_norm, periodized_norm) in &rows {
        checks.push(Check::le(
            format!("configured_periodized_norm_le_kernel_norm_{name}"),
            "lemBOlonelinfty.b",
            periodized_norm,
            kernel_norm * (1.0 + BOUND_SLACK),
        ));
    }

    if let Some(dir) = out {
        let header = ["weight", "m", "kernel_norm", "periodized_norm"].map(String::from);
        let mut csv = CsvOut::create(dir, "norms.csv", &header)?;
        for (name, m, kn, pn) in rows {
            csv.row([name.to_string(), num(m), num(kn), num(pn)])?;
        }
        csv.finish()?;
    }
    Ok(checks)
}

fn sampling_plan(job: &Job, a: &ZKernel) -> SamplingPlan {
    SamplingPlan::for_spread(&job.spec, a.radius().max(1), job.random_directions, job.seed)
}

/// Decay of the kernel against its fibers on |Im k| = m', and the norm chain at m''.
fn decay(job: &Job, a: &ZKernel) -> CliResult<Vec<Check>> {
    let w = job.weight;
    let spec = &job.spec;
    let rep = norms::decay_bound_from_fibers(a, w, &sampling_plan(job, a))?;
    let slack = 1.0 + BOUND_SLACK;
    let (wb, wd) = &rep.decay_witness;
    let mut checks = vec![
        Check::le("configured_kernel_decay_le_fiber_sum", "lemBOlonelinfty.b", rep.decay, rep.sum_bound * slack)
            .with_witness(format!("u = {wb:?}, u' - u = {wd:?}")),
        Check::le("configured_fiber_sum_le_fiber_max", "lemBOlonelinfty.b", rep.sum_bound, rep.max_bound * slack),
    ];
    if let Some(chain) = &rep.chain {
        if let Some(p) = chain.periodized_norm {
            checks.push(Check::le(
                "configured_periodized_norm_le_kernel_norm",
                "lemBOlonelinfty.b",
                p,
                chain.kernel_norm * slack,
            ));
        }
        checks.push(
            Check::le(
                "configured_kernel_norm_le_c_fiber_sum",
                "lemBOlonelinfty.b",
                chain.kernel_norm,
                chain.sum_bound * slack,
            )
            .with_witness(format!("C = {:e}", chain.c.value)),
        );
        checks.push(Check::le(
            "configured_c_fiber_sum_le_c_fiber_max",
            "lemBOlonelinfty.b",
            chain.sum_bound,
            chain.max_bound * slack,
        ));
    }

    let nodes = default_nodes(spec, a.radius(), 5);
    let (mut dev, mut scale, mut at) = (0.0f64, 0.0f64, String::new());
    for (b, d, v) in a.entries() {
        let u2: Vec<i64> = b.iter().zip(&d).map(|(x, y)| x + y).collect();
        let want = v * (w.m_prime * spec.fine_length(&d)).exp();
        let e = (norms::stokes_shift_value(a, &b, &u2, w.m_prime, &nodes) - want).norm();
        if e > dev {
            dev = e;
            at = format!("u = {b:?}, u' = {u2:?}");
        }
        scale = scale.max(want.norm());
    }
    checks.push(
        Check::le(
            "configured_stokes_shift_consistency",
            "lemBOlonelinfty.b",
            dev,
            verify::STOKES_TOLERANCE * scale,
        )
        .with_witness(at),
    );
    Ok(checks)
}

/// f(A) by the contour integral, written out for the block rows; the
/// contour bound on its norm, and the dense comparison on small tori.
fn funcalc(job: &Job, a: &ZKernel, out: &Path) -> CliResult<Vec<Check>> {
    let contour = match &job.contour {
        Some(c) => c.clone(),
        None => opfunc::default_contour(a)?,
    };
    let f = &job.function;
    let result = opfunc::function_of_operator(a, f, &contour)?;
    let per = periodize(a)?;
    let fam = per.family().clone();

    let mut checks = Vec::new();
    let bound = opfunc::function_norm_bound(a, f, &contour, job.weight, &sampling_plan(job, a))?;
    checks.push(
        Check::le("configured_function_norm_le_contour_bound", "lemBOfnbnd", bound.direct_norm, bound.bound_sum)
            .with_witness(format!("zeta = {}, k = {:?}", bound.witness_zeta, bound.witness_k)),
    );
    checks.push(Check::le(
        "configured_contour_sum_bound_le_max_bound",
        "lemBOfnbnd",
        bound.bound_sum,
        bound.bound_max * (1.0 + BOUND_SLACK),
    ));
    if fam.n_fine <= opfunc::DENSE_SPECTRUM_LIMIT {
        let want = opfunc::function_dense(&per, f)?;
        let tol = match f {
            NamedFunction::Identity => verify::LINEAR_FUNCTION_TOLERANCE,
            _ => FUNCTION_TOLERANCE,
        };
        checks.push(
            Check::le(
                "configured_function_matches_dense",
                "eqnBOfofA",
                max_abs_diff(result.kernel.entries(), want.entries()),
                tol * max_abs(want.entries()),
            )
            .with_witness(format!("{} contour nodes", result.nodes)),
        );
    }

    let axes = job.spec.axes();
    let mut header = axis_columns("row", axes);
    header.extend(axis_columns("col", axes));
    header.extend(["re", "im"].map(String::from));
    let mut csv = CsvOut::create(out, "funcalc.csv", &header)?;
    let fine = fam.shape(LatticeKind::Fine).clone();
    let block = Shape::new(job.spec.periods());
    let m = result.kernel.entries();
    for b in block.iter() {
        let i = fine.ravel(&b);
        for (j, u2) in fine.iter().enumerate() {
            let mut row: Vec<String> = b.iter().chain(&u2).map(|x| x.to_string()).collect();
            row.extend([num(m[(i, j)].re), num(m[(i, j)].im)]);
            csv.row(&row)?;
        }
    }
    csv.finish()?;
    Ok(checks)
}

/// Contour description for diagnostics.
pub fn describe(c: &Contour) -> String {
    match c {
        Contour::Circle { center, radius } => format!("circle centre {center}, radius {radius}"),
        Contour::Polyline { vertices } => format!("polygon with {} vertices", vertices.len()),
    }
}
