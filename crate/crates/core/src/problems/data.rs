use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::DcError;

/// A finite point cloud `a¹, …, aⁿ ∈ ℝᵖ`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterData {
    dim_space: usize,
    coords: Vec<f64>,
    mean: Vec<f64>,
}

impl ClusterData {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, DcError> {
        let dim_space = points
            .first()
            .map(|p| p.len())
            .ok_or_else(|| DcError::InvalidInput("point set is empty".into()))?;
        if dim_space == 0 {
            return Err(DcError::InvalidInput(
                "points must have at least one coordinate".into(),
            ));
        }
        let mut coords = Vec::with_capacity(points.len() * dim_space);
        for p in &points {
            if p.len() != dim_space {
                return Err(DcError::DimensionMismatch {
                    expected: dim_space,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim_space, coords)
    }

    pub fn from_flat(dim_space: usize, coords: Vec<f64>) -> Result<Self, DcError> {
        if dim_space == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim_space) {
            return Err(DcError::InvalidInput(
                "flat coordinates must hold a positive whole number of points".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(DcError::NonFinite { what: "data point" });
        }
        let n = coords.len() / dim_space;
        let mut mean = vec![0.0; dim_space];
        for p in coords.chunks_exact(dim_space) {
            mean.iter_mut().zip(p).for_each(|(m, c)| *m += c);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        Ok(Self {
            dim_space,
            coords,
            mean,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim_space
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim_space(&self) -> usize {
        self.dim_space
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim_space..(i + 1) * self.dim_space]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim_space)
    }

    /// Per-coordinate `(min, max)` over all points.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim_space];
        for p in self.points() {
            for (b, &c) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(c);
                b.1 = b.1.max(c);
            }
        }
        bounds
    }
}

/// Parameters of the isotropic Gaussian blob generator.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub n_blobs: usize,
    pub points_per_blob: usize,
    /// Standard deviation of each coordinate around the blob center.
    pub spread: f64,
    /// Blob centers are drawn uniformly from `[lo, hi]` in every coordinate.
    pub lo: f64,
    pub hi: f64,
    pub dim_space: usize,
}

impl BlobSpec {
    pub fn planar(n_blobs: usize, points_per_blob: usize) -> Self {
        Self {
            n_blobs,
            points_per_blob,
            spread: 0.5,
            lo: 0.0,
            hi: 10.0,
            dim_space: 2,
        }
    }
}

/// Blob centers uniform in the box, then `points_per_blob` Gaussian samples
/// around each center, emitted blob by blob. Deterministic per seed.
pub fn generate_blobs(spec: &BlobSpec, seed: u64) -> Result<ClusterData, DcError> {
    if spec.n_blobs == 0 || spec.points_per_blob == 0 || spec.dim_space == 0 {
        return Err(DcError::InvalidInput("blob counts must be positive".into()));
    }
    if !(spec.spread > 0.0) || !spec.spread.is_finite() {
        return Err(DcError::InvalidInput("spread must be positive".into()));
    }
    if !(spec.lo <= spec.hi) || !spec.lo.is_finite() || !spec.hi.is_finite() {
        return Err(DcError::InvalidInput("box must satisfy lo <= hi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise =
        Normal::new(0.0, spec.spread).map_err(|e| DcError::InvalidInput(format!("spread: {e}")))?;
    let centers: Vec<Vec<f64>> = (0..spec.n_blobs)
        .map(|_| {
            (0..spec.dim_space)
                .map(|_| rng.random_range(spec.lo..=spec.hi))
                .collect()
        })
        .collect();
    let mut coords = Vec::with_capacity(spec.n_blobs * spec.points_per_blob * spec.dim_space);
    for c in &centers {
        for _ in 0..spec.points_per_blob {
            coords.extend(c.iter().map(|&ci| ci + noise.sample(&mut rng)));
        }
    }
    ClusterData::from_flat(spec.dim_space, coords)
}

/// Parses comma-separated coordinates, one point per line. Lines starting
/// with `#` and blank lines are skipped.
pub fn parse_points_csv<R: Read>(reader: R) -> Result<ClusterData, DcError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut points: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| DcError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let coords = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| DcError::Parse {
                    line,
                    message: format!("'{field}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(DcError::Parse {
                line,
                message: "non-finite coordinate".into(),
            });
        }
        if let Some(first) = points.first() {
            if first.len() != coords.len() {
                return Err(DcError::Parse {
                    line,
                    message: format!(
                        "expected {} coordinates, found {}",
                        first.len(),
                        coords.len()
                    ),
                });
            }
        }
        points.push(coords);
    }
    if points.is_empty() {
        return Err(DcError::InvalidInput("no points in input".into()));
    }
    ClusterData::new(points)
}

pub fn load_points_csv(path: impl AsRef<Path>) -> Result<ClusterData, DcError> {
    let file = std::fs::File::open(path)?;
    parse_points_csv(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_pairs() {
        let d = parse_points_csv("0,0\n2,0\n".as_bytes()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.mean(), &[1.0, 0.0]);
    }

    #[test]
    fn skips_comments() {
        let d = parse_points_csv("#header\n1.5,2.5\n".as_bytes()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.point(0), &[1.5, 2.5]);
    }

    #[test]
    fn reports_line_of_bad_field() {
        match parse_points_csv("1,abc\n".as_bytes()) {
            Err(DcError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match parse_points_csv("# c\n1,2\n3\n".as_bytes()) {
            Err(DcError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse_points_csv("".as_bytes()).is_err());
        assert!(parse_points_csv("# only a comment\n".as_bytes()).is_err());
    }

    #[test]
    fn blobs_are_seed_deterministic() {
        let spec = BlobSpec::planar(3, 100);
        let a = generate_blobs(&spec, 42).unwrap();
        let b = generate_blobs(&spec, 42).unwrap();
        let c = generate_blobs(&spec, 43).unwrap();
        assert_eq!(a.len(), 300);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_spread_collapses_onto_centers() {
        let spec = BlobSpec {
            spread: 1e-13,
            ..BlobSpec::planar(2, 50)
        };
        let d = generate_blobs(&spec, 7).unwrap();
        for blob in 0..2 {
            let first = d.point(blob * 50).to_vec();
            for i in 0..50 {
                let p = d.point(blob * 50 + i);
                for (a, b) in p.iter().zip(&first) {
                    assert!((a - b).abs() <= 1e-9 * 10.0);
                }
            }
        }
    }
}
