//! Builds the configured fine → fine kernel.

use std::collections::HashMap;
use std::path::Path;

use blochlat::averaging::{q_star_q_kernel, Profile};
use blochlat::{random, Error, LatticeSpec, ZKernel};
use num_complex::Complex64;

use crate::config::{max_fine_radius, KernelSection};
use crate::error::{CliError, CliResult};

pub fn build(spec: &LatticeSpec, section: &KernelSection, seed: u64) -> CliResult<ZKernel> {
    let (kernel, path) = match section {
        KernelSection::NaiveQstarq => {
            let q = Profile::naive(spec.clone()).map_err(|e| profile_error(e, "kernel.kind"))?;
            (q_star_q_kernel(&q), "kernel.kind")
        }
        KernelSection::SmoothQstarq { exponent } => {
            let q = Profile::smooth(spec.clone(), *exponent).map_err(|e| profile_error(e, "kernel.exponent"))?;
            (q_star_q_kernel(&q), "kernel.exponent")
        }
        KernelSection::Random { seed: own, support_radius } => {
            let mut rng = random::seeded(own.unwrap_or(seed));
            (ZKernel::random(spec.clone(), *support_radius, &mut rng), "kernel.support_radius")
        }
        KernelSection::Explicit { path } => (read_explicit(spec, path)?, "kernel.path"),
    };
    let limit = max_fine_radius(spec);
    if kernel.radius() > limit {
        return Err(CliError::config(
            path,
            format!("kernel radius {} does not fit the torus (at most {limit})", kernel.radius()),
        ));
    }
    Ok(kernel)
}

fn profile_error(e: Error, path: &str) -> CliError {
    match e {
        Error::EvenPeriod { .. } | Error::InvalidArgument(_) | Error::SupportExceedsWindow { .. } => {
            CliError::config(path, e)
        }
        other => CliError::Numerical(other),
    }
}

/// Reads `row_0..row_d, offset_0..offset_d, re, im`: a(row, row + offset) for
/// block representatives `row`. Entries not listed are zero.
pub fn read_explicit(spec: &LatticeSpec, path: &Path) -> CliResult<ZKernel> {
    let axes = spec.axes();
    let bad = |line: u64, msg: String| CliError::config("kernel.path", format!("{}:{line}: {msg}", path.display()));
    let file = std::fs::File::open(path).map_err(|e| CliError::io("open kernel file", path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);

    let mut want: Vec<String> = (0..axes).map(|a| format!("row_{a}")).collect();
    want.extend((0..axes).map(|a| format!("offset_{a}")));
    want.extend(["re".to_string(), "im".to_string()]);
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    if header.iter().ne(want.iter().map(String::as_str)) {
        return Err(bad(1, format!("expected header {}", want.join(","))));
    }

    let mut entries: HashMap<(Vec<i64>, Vec<i64>), Complex64> = HashMap::new();
    let mut radius = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let ints = |range: std::ops::Range<usize>| -> CliResult<Vec<i64>> {
            range
                .map(|i| record[i].parse::<i64>().map_err(|e| bad(line, format!("column {}: {e}", want[i]))))
                .collect()
        };
        let row = ints(0..axes)?;
        let offset = ints(axes..2 * axes)?;
        let num = |i: usize| -> CliResult<f64> {
            record[i].parse::<f64>().map_err(|e| bad(line, format!("column {}: {e}", want[i])))
        };
        let value = Complex64::new(num(2 * axes)?, num(2 * axes + 1)?);
        if let Some(a) = (0..axes).find(|&a| row[a] < 0 || row[a] >= spec.period(a) as i64) {
            return Err(bad(
                line,
                format!("row_{a} = {} is not a block representative in [0, {})", row[a], spec.period(a)),
            ));
        }
        radius = radius.max(offset.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0));
        if entries.insert((row.clone(), offset.clone()), value).is_some() {
            return Err(bad(line, format!("duplicate entry for row {row:?}, offset {offset:?}")));
        }
    }
    Ok(ZKernel::from_fn(spec.clone(), radius, |b, d| {
        entries.get(&(b.to_vec(), d.to_vec())).copied().unwrap_or_default()
    }))
}
