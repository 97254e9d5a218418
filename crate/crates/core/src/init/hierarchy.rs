use crate::error::{Error, Result};
use crate::geometry::{first_appearance, DistanceMatrix, Partition};

/// Inter-cluster dissimilarity update used by agglomerative clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Linkage {
    Single,
    Complete,
    /// Size-weighted mean (UPGMA).
    Average,
    /// Ward's minimum variance, on squared dissimilarities.
    Ward,
    /// Unweighted mean of the two merged entries (WPGMA).
    McQuitty,
}

impl Linkage {
    pub const ALL: [Linkage; 5] = [
        Linkage::Single,
        Linkage::Complete,
        Linkage::Average,
        Linkage::Ward,
        Linkage::McQuitty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Ward => "ward",
            Linkage::McQuitty => "mcquitty",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Linkage::ALL.into_iter().find(|l| l.name() == s)
    }

    /// Lance-Williams update: dissimilarity between the union of `i` and `j`
    /// and a third cluster `x`.
    #[inline]
    fn update(self, d_ix: f64, d_jx: f64, d_ij: f64, n_i: f64, n_j: f64, n_x: f64) -> f64 {
        match self {
            Linkage::Single => d_ix.min(d_jx),
            Linkage::Complete => d_ix.max(d_jx),
            Linkage::Average => (n_i * d_ix + n_j * d_jx) / (n_i + n_j),
            Linkage::McQuitty => 0.5 * (d_ix + d_jx),
            Linkage::Ward => {
                ((n_i + n_x) * d_ix + (n_j + n_x) * d_jx - n_x * d_ij) / (n_i + n_j + n_x)
            }
        }
    }
}

/// One agglomeration step. Leaves are nodes `0..n`; the node created by merge
/// `t` is `n + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    linkage: Linkage,
    merges: Vec<Merge>,
    monotone: bool,
}

impl Dendrogram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn linkage(&self) -> Linkage {
        self.linkage
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// `false` if some merge height is below its predecessor's.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }
}

/// Agglomerative clustering via the Lance-Williams recurrence.
///
/// Ward heights are on the squared-dissimilarity scale. Among equal minimum
/// dissimilarities the pair with the smallest `(left, right)` node ids merges
/// first.
pub fn agglomerative(dist: &DistanceMatrix, linkage: Linkage) -> Dendrogram {
    let n = dist.n();
    let work = if linkage == Linkage::Ward { dist.squared() } else { dist.clone() };
    // slot-indexed working matrix; slot s currently holds node `node[s]`
    let mut d: Vec<f64> = (0..n).flat_map(|i| work.row(i).to_vec()).collect();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut monotone = true;

    for t in 0..n - 1 {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        let mut best_slots = (0, 0);
        for (ai, &a) in active.iter().enumerate() {
            let row = &d[a * n..(a + 1) * n];
            for &b in &active[ai + 1..] {
                let v = row[b];
                let (lo, hi) = if node[a] < node[b] { (node[a], node[b]) } else { (node[b], node[a]) };
                if (v, lo, hi) < best {
                    best = (v, lo, hi);
                    best_slots = (a, b);
                }
            }
        }
        let (a, b) = best_slots;
        let height = best.0;
        if let Some(prev) = merges.last().map(|m: &Merge| m.height) {
            if height < prev {
                monotone = false;
            }
        }
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for &x in &active {
            if x == a || x == b {
                continue;
            }
            let v = linkage.update(d[a * n + x], d[b * n + x], height, na, nb, size[x] as f64);
            d[a * n + x] = v;
            d[x * n + a] = v;
        }
        merges.push(Merge { left: best.1, right: best.2, height, size: size[a] + size[b] });
        size[a] += size[b];
        node[a] = n + t;
        active.retain(|&s| s != b);
    }
    Dendrogram { n, linkage, merges, monotone }
}

/// Cuts a dendrogram into `k` groups by undoing its last `k - 1` merges.
/// Groups are numbered by their smallest member index.
pub fn cut_tree(dend: &Dendrogram, k: usize) -> Result<Partition> {
    let n = dend.n;
    if k < 2 || k + 1 > n {
        return Err(Error::TrivialClustering { k, n });
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (t, m) in dend.merges[..n - k].iter().enumerate() {
        let new = n + t;
        let l = find(&mut parent, m.left);
        let r = find(&mut parent, m.right);
        parent[l] = new;
        parent[r] = new;
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let (labels, kk) = first_appearance(&roots);
    debug_assert_eq!(kk, k);
    Partition::from_compact(labels, kk)
}
