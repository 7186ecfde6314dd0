//! Dataset ingestion (CSV) and synthetic generation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{Dataset, Points};
use crate::sampling::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenKind {
    /// Isotropic Gaussian blobs with means drawn uniformly from `[0.2, 0.8]^d`,
    /// clipped to the unit cube.
    GaussianMixture {
        components: usize,
        sigma: f64,
    },
    Uniform,
}

/// A synthetic dataset description.
///
/// Text form: `mixture:n=10000,d=4,components=5,sigma=0.05,seed=1` or
/// `uniform:n=1000,d=3,seed=2`. Omitted keys default to `components=5`,
/// `sigma=0.05`, `seed=0`; `n` and `d` are required.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn mixture(n: usize, d: usize, components: usize, sigma: f64, seed: u64) -> Self {
        Self {
            kind: GenKind::GaussianMixture { components, sigma },
            n,
            d,
            seed,
        }
    }

    pub fn uniform(n: usize, d: usize, seed: u64) -> Self {
        Self {
            kind: GenKind::Uniform,
            n,
            d,
            seed,
        }
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GenKind::GaussianMixture { components, sigma } => write!(
                f,
                "mixture:n={},d={},components={components},sigma={sigma},seed={}",
                self.n, self.d, self.seed
            ),
            GenKind::Uniform => write!(f, "uniform:n={},d={},seed={}", self.n, self.d, self.seed),
        }
    }
}

impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::contract(format!("generator spec `{s}`: {msg}"));
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let (mut n, mut d, mut components, mut sigma, mut seed) =
            (None, None, 5usize, 0.05f64, 0u64);
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{pair}`")))?;
            let parse_err =
                |_: std::num::ParseIntError| bad(format!("bad value for `{key}`: `{value}`"));
            match key.trim() {
                "n" => n = Some(value.trim().parse().map_err(parse_err)?),
                "d" => d = Some(value.trim().parse().map_err(parse_err)?),
                "components" => components = value.trim().parse().map_err(parse_err)?,
                "sigma" => {
                    sigma = value
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad value for `sigma`: `{value}`")))?
                }
                "seed" => seed = value.trim().parse().map_err(parse_err)?,
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| bad("missing n".into()))?;
        let d = d.ok_or_else(|| bad("missing d".into()))?;
        let kind = match kind {
            "mixture" | "gaussian_mixture" => GenKind::GaussianMixture { components, sigma },
            "uniform" => GenKind::Uniform,
            other => return Err(bad(format!("unknown generator `{other}`"))),
        };
        Ok(GenSpec { kind, n, d, seed })
    }
}

/// Draws a dataset; the same spec always yields the same points.
///
/// Mixture draws: all component means first (component-major), then per
/// point a component index followed by `d` standard normals.
pub fn generate_synthetic(spec: &GenSpec) -> Result<Dataset> {
    if spec.n == 0 || spec.d == 0 {
        return Err(Error::contract("generator needs n >= 1 and d >= 1"));
    }
    let mut rng = RandomStream::new(spec.seed);
    let mut coords = Vec::with_capacity(spec.n * spec.d);
    match spec.kind {
        GenKind::Uniform => {
            coords.extend((0..spec.n * spec.d).map(|_| rng.next_f64()));
        }
        GenKind::GaussianMixture { components, sigma } => {
            if components == 0 {
                return Err(Error::contract("mixture needs at least one component"));
            }
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(Error::contract(format!(
                    "mixture spread must be >= 0, got {sigma}"
                )));
            }
            let means: Vec<f64> = (0..components * spec.d)
                .map(|_| 0.2 + 0.6 * rng.next_f64())
                .collect();
            for _ in 0..spec.n {
                let c = rng.next_index(components);
                for l in 0..spec.d {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    coords.push((means[c * spec.d + l] + sigma * z).clamp(0.0, 1.0));
                }
            }
        }
    }
    Dataset::new(Points::new(coords, spec.d)?)
}

/// Reads comma-separated points, one per line.
///
/// With `normalize`, each coordinate is min-max scaled into `[0,1]`
/// (constant coordinates map to 0.5); without it, any value outside `[0,1]`
/// is an error. Blank lines are skipped.
pub fn ingest_csv(path: &Path, normalize: bool, header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::contract(format!("{}: {other:?}", path.display())),
        })?;

    let parse_error = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut coords = Vec::new();
    let mut dim = None;
    let mut row_lines = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(parse_error(
                line,
                format!("expected {expected} values, found {}", record.len()),
            ));
        }
        for cell in record.iter() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_error(line, format!("not a finite number: `{cell}`")))?;
            coords.push(v);
        }
        row_lines.push(line);
    }
    let dim = dim.ok_or_else(|| parse_error(1, "no data rows".into()))?;

    if normalize {
        for l in 0..dim {
            let column = coords.iter().skip(l).step_by(dim);
            let (lo, hi) = column.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            for v in coords.iter_mut().skip(l).step_by(dim) {
                *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.5 };
            }
        }
    } else if let Some(pos) = coords.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(parse_error(
            row_lines[pos / dim],
            format!(
                "value {} outside [0,1]; pass --normalize to rescale",
                coords[pos]
            ),
        ));
    }
    Dataset::new(Points::new(coords, dim)?)
}

/// Writes a dataset as headerless CSV with round-trip float formatting.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for row in dataset.rows() {
        writer.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    writer.flush()?;
    Ok(())
}

/// Where an experiment's points come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv {
        path: PathBuf,
        normalize: bool,
        header: bool,
    },
    Generated(GenSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Csv {
                path,
                normalize,
                header,
            } => ingest_csv(path, *normalize, *header),
            DataSource::Generated(spec) => generate_synthetic(spec),
        }
    }
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSource::Csv {
                path,
                normalize,
                header,
            } => write!(
                f,
                "csv:{}?normalize={normalize}&header={header}",
                path.display()
            ),
            DataSource::Generated(spec) => write!(f, "gen:{spec}"),
        }
    }
}

impl FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(spec) = s.strip_prefix("gen:") {
            return Ok(DataSource::Generated(spec.parse()?));
        }
        let rest = s
            .strip_prefix("csv:")
            .ok_or_else(|| Error::contract(format!("unknown data source `{s}`")))?;
        let (path, query) = rest.rsplit_once('?').unwrap_or((rest, ""));
        let (mut normalize, mut header) = (false, false);
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            match pair {
                "normalize=true" => normalize = true,
                "normalize=false" => normalize = false,
                "header=true" => header = true,
                "header=false" => header = false,
                other => return Err(Error::contract(format!("unknown csv option `{other}`"))),
            }
        }
        Ok(DataSource::Csv {
            path: PathBuf::from(path),
            normalize,
            header,
        })
    }
}
