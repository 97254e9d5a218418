//! Crisp clusterings used to seed the optimizer: k-means, PAM, agglomerative
//! linkages, and labels read from a file.

mod hierarchy;
mod kmeans;
mod pam;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use hierarchy::{agglomerative, cut_tree, Dendrogram, Linkage, Merge};
pub use kmeans::{kmeans, KMeansConfig, KMeansFit};
pub use pam::{assign_to_medoids, pam, PamFit};
pub(crate) use pam::{nearest_two, Nearest};

use crate::error::{Error, Result};
use crate::geometry::{DataSet, DistanceMatrix, Partition};

/// An initial clustering method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitMethod {
    KMeans(KMeansConfig),
    Pam,
    Hierarchical(Linkage),
    /// Labels read from a newline-separated file.
    External(PathBuf),
}

impl InitMethod {
    /// The methods compared in the fixed-k study, in table column order.
    pub fn standard() -> Vec<InitMethod> {
        let mut v = vec![InitMethod::KMeans(KMeansConfig::default()), InitMethod::Pam];
        v.extend(Linkage::ALL.iter().map(|&l| InitMethod::Hierarchical(l)));
        v
    }

    pub fn needs_coordinates(&self) -> bool {
        matches!(self, InitMethod::KMeans(_))
    }
}

impl fmt::Display for InitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitMethod::KMeans(_) => f.write_str("kmeans"),
            InitMethod::Pam => f.write_str("pam"),
            InitMethod::Hierarchical(l) => f.write_str(l.name()),
            InitMethod::External(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for InitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(InitMethod::External(PathBuf::from(path)));
        }
        match s {
            "kmeans" => Ok(InitMethod::KMeans(KMeansConfig::default())),
            "pam" => Ok(InitMethod::Pam),
            other => Linkage::parse(other)
                .map(InitMethod::Hierarchical)
                .ok_or_else(|| Error::Input(format!("unknown clustering method '{other}'"))),
        }
    }
}

/// Runs `method` for `k` clusters. k-means needs `data`; everything else
/// works from the dissimilarities alone.
pub fn initialize(
    method: &InitMethod,
    dist: &DistanceMatrix,
    data: Option<&DataSet>,
    k: usize,
    seed: u64,
) -> Result<Partition> {
    match method {
        InitMethod::KMeans(cfg) => {
            let data = data.ok_or_else(|| Error::CoordinatesRequired("kmeans".into()))?;
            Ok(kmeans(data, k, *cfg, seed)?.partition)
        }
        InitMethod::Pam => Ok(pam(dist, k)?.partition),
        InitMethod::Hierarchical(l) => cut_tree(&agglomerative(dist, *l), k),
        InitMethod::External(path) => {
            let part = load_external_labels(path, dist.n())?;
            if part.k() != k {
                return Err(Error::Input(format!(
                    "label file has {} clusters, expected {k}",
                    part.k()
                )));
            }
            Ok(part)
        }
    }
}

/// Reads `n` newline-separated integer labels. Blank lines and a leading
/// `label` header are ignored.
pub fn load_external_labels(path: &Path, n: usize) -> Result<Partition> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_labels(&text, n)
}

pub fn parse_labels(text: &str, n: usize) -> Result<Partition> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty()).peekable();
    if lines.peek().is_some_and(|l| l.trim_matches('"').eq_ignore_ascii_case("label")) {
        lines.next();
    }
    let raw = lines
        .enumerate()
        .map(|(i, l)| {
            l.parse::<i64>()
                .map_err(|_| Error::Input(format!("label line {}: '{l}' is not an integer", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    Partition::validate(&raw, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pairwise_distances, Metric};

    #[test]
    fn external_labels() {
        assert_eq!(parse_labels("1\n1\n2\n2\n", 4).unwrap().k(), 2);
        assert!(matches!(
            parse_labels("1\n1\n2\n", 4),
            Err(Error::LengthMismatch { expected: 4, got: 3 })
        ));
        assert_eq!(parse_labels("5\n5\n9\n9", 4).unwrap().labels(), &[0, 0, 1, 1]);
        assert!(matches!(parse_labels("1\nx\n2\n2", 4), Err(Error::Input(_))));
        assert_eq!(parse_labels("label\n1\n1\n2\n2\n", 4).unwrap().k(), 2);
    }

    #[test]
    fn external_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("osil-labels-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("labels.txt");
        std::fs::write(&path, "2\n2\n7\n7\n").unwrap();
        let p = load_external_labels(&path, 4).unwrap();
        assert_eq!(p.one_based(), vec![1, 1, 2, 2]);
        assert!(load_external_labels(&dir.join("missing"), 4).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in InitMethod::standard() {
            assert_eq!(m.to_string().parse::<InitMethod>().unwrap(), m);
        }
        assert!("spectral".parse::<InitMethod>().is_err());
    }

    #[test]
    fn kmeans_needs_coordinates() {
        let data = DataSet::new(vec![vec![0.0], vec![1.0], vec![5.0]], None).unwrap();
        let d = pairwise_distances(&data, Metric::Euclidean);
        let err = initialize(&InitMethod::KMeans(KMeansConfig::default()), &d, None, 2, 0);
        assert_eq!(err, Err(Error::CoordinatesRequired("kmeans".into())));
    }

    #[test]
    fn average_linkage_recovers_blobs() {
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for (c, (cx, cy)) in [(0.0, 0.0), (8.0, 0.0), (4.0, 7.0)].iter().enumerate() {
            for j in 0..6 {
                let t = j as f64;
                rows.push(vec![cx + 0.3 * t.sin(), cy + 0.3 * t.cos()]);
                truth.push(c);
            }
        }
        let data = DataSet::new(rows, None).unwrap();
        let d = pairwise_distances(&data, Metric::Euclidean);
        let p = initialize(&InitMethod::Hierarchical(Linkage::Average), &d, None, 3, 0).unwrap();
        assert_eq!(p.labels(), &truth[..]);
    }
}
