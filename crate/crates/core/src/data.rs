//! Datasets: synthetic generation, the feature-file format, angle rescaling
//! and stratified splitting.
//!
//! Feature files are UTF-8 text. The first non-comment line is the header
//! `classes=<C>,features=<F>`; every following line is `label,f1,...,fF`.
//! Lines starting with `#` and blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{QtlError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub features: Vec<T>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    rows: Vec<Sample<T>>,
    class_count: usize,
    feature_dim: usize,
}

impl<T: Real> Dataset<T> {
    pub fn new(rows: Vec<Sample<T>>, class_count: usize, feature_dim: usize) -> Result<Self> {
        if class_count == 0 || feature_dim == 0 {
            return Err(QtlError::Validation(
                "class count and feature dimension must be positive".into(),
            ));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.features.len() != feature_dim {
                return Err(QtlError::Validation(format!(
                    "row {i} has {} features, expected {feature_dim}",
                    row.features.len()
                )));
            }
            if row.label >= class_count {
                return Err(QtlError::Validation(format!(
                    "row {i} label {} out of range for {class_count} classes",
                    row.label
                )));
            }
            if row.features.iter().any(|f| !f.is_finite()) {
                return Err(QtlError::Validation(format!("row {i} has a non-finite feature")));
            }
        }
        Ok(Self {
            rows,
            class_count,
            feature_dim,
        })
    }

    pub fn rows(&self) -> &[Sample<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r.label)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for l in self.labels() {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, same class count and dimension.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            class_count: self.class_count,
            feature_dim: self.feature_dim,
        }
    }

    /// Serializes to the feature-file format. `comments` are emitted as `#` lines.
    pub fn to_feature_text(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        let _ = writeln!(out, "classes={},features={}", self.class_count, self.feature_dim);
        for row in &self.rows {
            let _ = write!(out, "{}", row.label);
            for f in &row.features {
                let _ = write!(out, ",{f}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_feature_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((classes, features)) = header else {
                header = Some(parse_header(line, line_no)?);
                continue;
            };
            let mut fields = line.split(',');
            let label_field = fields.next().unwrap_or_default().trim();
            let label: usize = label_field.parse().map_err(|_| QtlError::Parse {
                line: line_no,
                msg: format!("bad label '{label_field}'"),
            })?;
            if label >= classes {
                return Err(QtlError::Validation(format!(
                    "line {line_no}: label {label} out of range for {classes} classes"
                )));
            }
            let values = fields
                .map(|f| {
                    f.trim().parse::<T>().map_err(|_| QtlError::Parse {
                        line: line_no,
                        msg: format!("bad feature value '{}'", f.trim()),
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            if values.len() != features {
                return Err(QtlError::Parse {
                    line: line_no,
                    msg: format!("expected {features} features, found {}", values.len()),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(QtlError::Parse {
                    line: line_no,
                    msg: "non-finite feature value".into(),
                });
            }
            rows.push(Sample {
                features: values,
                label,
            });
        }
        let (classes, features) = header.ok_or(QtlError::Parse {
            line: 0,
            msg: "missing header 'classes=<C>,features=<F>'".into(),
        })?;
        Self::new(rows, classes, features)
    }
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let bad = || QtlError::Parse {
        line: line_no,
        msg: format!("expected header 'classes=<C>,features=<F>', found '{line}'"),
    };
    let mut classes = None;
    let mut features = None;
    for part in line.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(bad)?;
        let value: usize = value.trim().parse().map_err(|_| bad())?;
        match key.trim() {
            "classes" => classes = Some(value),
            "features" => features = Some(value),
            _ => return Err(bad()),
        }
    }
    match (classes, features) {
        (Some(c), Some(f)) if c > 0 && f > 0 => Ok((c, f)),
        _ => Err(bad()),
    }
}

pub fn load_features<T: Real>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| QtlError::io(&path, e))?;
    Dataset::parse_feature_text(&text)
}

pub fn save_features<T: Real>(
    dataset: &Dataset<T>,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<()> {
    std::fs::write(path.as_ref(), dataset.to_feature_text(comments))
        .map_err(|e| QtlError::io(&path, e))
}

/// Settings for the two-class Gaussian benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n: usize,
    pub dim: usize,
    pub sigma: f64,
    /// Class `c` is centred at `(-1)^c * separation` along the first axis.
    pub separation: f64,
    pub seed: u64,
}

/// Default class-mean offset along the first axis.
pub const DEFAULT_SEPARATION: f64 = 0.25;

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n: 100,
            dim: 3,
            sigma: 0.5,
            separation: DEFAULT_SEPARATION,
            seed: 0,
        }
    }
}

/// Balanced two-class Gaussian data; rows alternate labels 0, 1, 0, 1, ...
pub fn gen_synthetic<T: Real>(cfg: &SyntheticConfig) -> Result<Dataset<T>> {
    if cfg.n == 0 || !cfg.n.is_multiple_of(2) {
        return Err(QtlError::invalid(format!(
            "synthetic size must be a positive even number, got {}",
            cfg.n
        )));
    }
    if cfg.dim == 0 {
        return Err(QtlError::invalid("synthetic dimension must be positive"));
    }
    if !(cfg.sigma > 0.0 && cfg.sigma.is_finite()) {
        return Err(QtlError::invalid(format!("sigma must be positive, got {}", cfg.sigma)));
    }
    if !cfg.separation.is_finite() {
        return Err(QtlError::invalid("separation must be finite"));
    }
    let normal = Normal::new(0.0, cfg.sigma).map_err(|e| QtlError::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rows = (0..cfg.n)
        .map(|i| {
            let label = i % 2;
            let offset = if label == 0 { cfg.separation } else { -cfg.separation };
            let features = (0..cfg.dim)
                .map(|axis| {
                    let mean = if axis == 0 { offset } else { 0.0 };
                    T::lit(mean + normal.sample(&mut rng))
                })
                .collect();
            Sample { features, label }
        })
        .collect();
    Dataset::new(rows, 2, cfg.dim)
}

/// Upper end of the angle range training encodes features into.
///
/// The encoding gate rotates by the full angle, so `x` and `x + pi` give the
/// same state up to sign; a quarter turn keeps the two ends of every feature
/// range distinguishable.
pub const ENCODING_MAX_ANGLE: f64 = std::f64::consts::FRAC_PI_2;

/// Per-feature affine map onto `[lo, hi]`, fitted on one dataset and reusable on others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleScaler<T> {
    pub mins: Vec<T>,
    pub maxs: Vec<T>,
    pub lo: T,
    pub hi: T,
}

impl<T: Real> AngleScaler<T> {
    pub fn fit(dataset: &Dataset<T>, lo: T, hi: T) -> Result<Self> {
        if dataset.is_empty() {
            return Err(QtlError::invalid("cannot fit a scaler on an empty dataset"));
        }
        if !(lo < hi) {
            return Err(QtlError::invalid("scaler range needs lo < hi"));
        }
        let dim = dataset.feature_dim();
        let mut mins = vec![T::infinity(); dim];
        let mut maxs = vec![T::neg_infinity(); dim];
        for row in dataset.rows() {
            for (j, &v) in row.features.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Ok(Self { mins, maxs, lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    /// Maps one feature vector. Values outside the fitted range are clamped;
    /// constant columns map to the midpoint.
    pub fn apply(&self, features: &[T]) -> Vec<T> {
        let mid = (self.lo + self.hi) / T::lit(2.0);
        features
            .iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(&x, (&min, &max))| {
                if max > min {
                    let t = (x - min) / (max - min);
                    (self.lo + t * (self.hi - self.lo)).max(self.lo).min(self.hi)
                } else {
                    mid
                }
            })
            .collect()
    }

    pub fn apply_dataset(&self, dataset: &Dataset<T>) -> Result<Dataset<T>> {
        if dataset.feature_dim() != self.dim() {
            return Err(QtlError::Validation(format!(
                "scaler fitted on {} features, dataset has {}",
                self.dim(),
                dataset.feature_dim()
            )));
        }
        let rows = dataset
            .rows()
            .iter()
            .map(|r| Sample {
                features: self.apply(&r.features),
                label: r.label,
            })
            .collect();
        Dataset::new(rows, dataset.class_count(), dataset.feature_dim())
    }
}

/// Fits a min-max scaler on `dataset` and applies it.
pub fn rescale_to_angles<T: Real>(
    dataset: &Dataset<T>,
    lo: T,
    hi: T,
) -> Result<(Dataset<T>, AngleScaler<T>)> {
    let scaler = AngleScaler::fit(dataset, lo, hi)?;
    Ok((scaler.apply_dataset(dataset)?, scaler))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_count: usize,
    pub test_count: usize,
    pub seed: u64,
}

impl SplitSpec {
    /// Train share rounded to the nearest row.
    pub fn from_fraction(total: usize, train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(QtlError::invalid(format!(
                "train fraction must be in (0, 1), got {train_fraction}"
            )));
        }
        let train_count = (total as f64 * train_fraction).round() as usize;
        Ok(Self {
            train_count,
            test_count: total.saturating_sub(train_count),
            seed,
        })
    }
}

/// Stratified random split. Each class contributes to the training part in
/// proportion to its size (largest-remainder rounding); rows keep their
/// original relative order inside each part.
pub fn split<T: Real>(dataset: &Dataset<T>, spec: &SplitSpec) -> Result<(Dataset<T>, Dataset<T>)> {
    let total = dataset.len();
    if spec.train_count == 0 || spec.test_count == 0 || spec.train_count + spec.test_count != total {
        return Err(QtlError::invalid(format!(
            "split {}+{} does not partition {total} rows into two nonempty parts",
            spec.train_count, spec.test_count
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.class_count()];
    for (i, row) in dataset.rows().iter().enumerate() {
        by_class[row.label].push(i);
    }

    // Largest-remainder apportionment of train_count across classes.
    let mut quota: Vec<usize> = by_class
        .iter()
        .map(|rows| rows.len() * spec.train_count / total)
        .collect();
    let mut assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..by_class.len()).collect();
    order.sort_by_key(|&c| {
        let rem = by_class[c].len() * spec.train_count % total;
        (std::cmp::Reverse(rem), c)
    });
    for &c in order.iter().cycle() {
        if assigned == spec.train_count {
            break;
        }
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            assigned += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_idx = Vec::with_capacity(spec.train_count);
    let mut test_idx = Vec::with_capacity(spec.test_count);
    for (class, rows) in by_class.iter_mut().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if quota[class] == 0 {
            return Err(QtlError::Validation(format!(
                "class {class} has {} rows, too few to appear in a {}-row training split",
                rows.len(),
                spec.train_count
            )));
        }
        rows.shuffle(&mut rng);
        train_idx.extend_from_slice(&rows[..quota[class]]);
        test_idx.extend_from_slice(&rows[quota[class]..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((dataset.subset(&train_idx), dataset.subset(&test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn toy(values: &[(usize, &[f64])], classes: usize) -> Dataset<f64> {
        let dim = values[0].1.len();
        Dataset::new(
            values
                .iter()
                .map(|(l, f)| Sample {
                    features: f.to_vec(),
                    label: *l,
                })
                .collect(),
            classes,
            dim,
        )
        .unwrap()
    }

    #[test]
    fn synthetic_shape() {
        let ds: Dataset<f64> = gen_synthetic(&SyntheticConfig {
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(ds.len(), 100);
        assert_eq!(ds.feature_dim(), 3);
        assert_eq!(ds.class_counts(), vec![50, 50]);
    }

    #[test]
    fn synthetic_odd_rejected() {
        let cfg = SyntheticConfig {
            n: 99,
            ..Default::default()
        };
        assert!(gen_synthetic::<f64>(&cfg).is_err());
    }

    #[test]
    fn synthetic_class_means_within_clt_bound() {
        let cfg = SyntheticConfig {
            separation: 0.25,
            seed: 11,
            ..Default::default()
        };
        let ds: Dataset<f64> = gen_synthetic(&cfg).unwrap();
        let bound = 4.0 * cfg.sigma / 50f64.sqrt();
        for class in 0..2 {
            let rows: Vec<_> = ds.rows().iter().filter(|r| r.label == class).collect();
            for axis in 0..3 {
                let mean: f64 = rows.iter().map(|r| r.features[axis]).sum::<f64>() / rows.len() as f64;
                let target = if axis == 0 {
                    if class == 0 { 0.25 } else { -0.25 }
                } else {
                    0.0
                };
                assert!((mean - target).abs() < bound, "class {class} axis {axis}: {mean}");
            }
        }
    }

    #[test]
    fn parse_and_errors() {
        let text = "# comment\nclasses=2,features=4\n0,1,2,3,4\n1,0.5,0.25,-1,2e-3\n";
        let ds: Dataset<f64> = Dataset::parse_feature_text(text).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.feature_dim(), 4);
        assert!(matches!(
            Dataset::<f64>::parse_feature_text(""),
            Err(QtlError::Parse { .. })
        ));
        let err = Dataset::<f64>::parse_feature_text("classes=2,features=2\n0,1,2\n1,x,2\n").unwrap_err();
        assert!(matches!(err, QtlError::Parse { line: 3, .. }), "{err}");
        let err = Dataset::<f64>::parse_feature_text("classes=2,features=2\n2,1,2\n").unwrap_err();
        assert!(matches!(err, QtlError::Validation(_)));
        let err = Dataset::<f64>::parse_feature_text("classes=2,features=2\n0,1\n").unwrap_err();
        assert!(matches!(err, QtlError::Parse { line: 2, .. }));
    }

    #[test]
    fn rescale_examples() {
        let ds = toy(&[(0, &[0.0, 5.0]), (1, &[1.0, 5.0]), (0, &[2.0, 5.0])], 2);
        let (scaled, scaler) = rescale_to_angles(&ds, 0.0, PI).unwrap();
        let col: Vec<f64> = scaled.rows().iter().map(|r| r.features[0]).collect();
        assert_eq!(col, vec![0.0, FRAC_PI_2, PI]);
        assert!(scaled.rows().iter().all(|r| r.features[1] == FRAC_PI_2));
        assert_eq!(scaler.apply(&[-3.0, 1.0]), vec![0.0, FRAC_PI_2]);
        assert_eq!(scaler.apply(&[10.0, 1.0])[0], PI);
    }

    #[test]
    fn split_balanced() {
        let ds: Dataset<f64> = gen_synthetic(&SyntheticConfig::default()).unwrap();
        let (tr, te) = split(
            &ds,
            &SplitSpec {
                train_count: 50,
                test_count: 50,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(tr.class_counts(), vec![25, 25]);
        assert_eq!(te.class_counts(), vec![25, 25]);
    }

    #[test]
    fn split_rejects_bad_counts() {
        let ds: Dataset<f64> = gen_synthetic(&SyntheticConfig::default()).unwrap();
        let bad = SplitSpec {
            train_count: 60,
            test_count: 50,
            seed: 0,
        };
        assert!(split(&ds, &bad).is_err());
        let rare = toy(&[(0, &[0.0]), (0, &[1.0]), (0, &[2.0]), (0, &[3.0]), (1, &[4.0])], 2);
        let spec = SplitSpec {
            train_count: 2,
            test_count: 3,
            seed: 0,
        };
        assert!(matches!(split(&rare, &spec), Err(QtlError::Validation(_))));
    }
}
