//! Vietoris-Rips persistent homology over Z/2 in dimensions 0-2.
//!
//! Filtration values follow the diameter convention: a simplex enters at the
//! maximum pairwise distance among its vertices. Dimension 0 is computed by
//! union-find over the sorted edges (minimum-spanning-tree semantics).
//! Dimensions 1 and 2 reduce the coboundary matrix in reverse filtration
//! order (the anti-transpose of the boundary matrix), which yields the same
//! persistence pairing while keeping column fill-in negligible on Rips
//! inputs, with the clearing optimization between dimensions. Simplices are
//! ordered by (filtration value, dimension, lexicographic vertex tuple).
//! Birth and death values are copied verbatim from the distance matrix, so
//! diagrams from the optimized and the brute-force path compare exactly.
//!
//! Pairs with `birth == death` carry no information and are dropped at the
//! source. Essential classes are recorded with death `+inf`; indicator
//! formulas downstream substitute the filtration cap for them.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::embedding::PointCloud;
use crate::scalar::Real;

/// Total simplex count allowed per diagram unless the caller raises it.
pub const DEFAULT_SIMPLEX_BUDGET: usize = 5_000_000;

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("homology dimension {0} not supported (max 2)")]
    DimTooLarge(usize),
    #[error(
        "complex needs at least {required} simplices, over the budget of {budget}; \
         subsample the cloud or lower max_filtration"
    )]
    SimplexBudget { required: usize, budget: usize },
    #[error("brute-force reduction is limited to 10 points, got {0}")]
    TooManyPoints(usize),
    #[error("Betti curve grid needs at least 2 values, got {0}")]
    GridTooSmall(usize),
    #[error("invalid pair (dim {dim}, birth {birth}, death {death})")]
    InvalidPair { dim: usize, birth: f64, death: f64 },
}

/// One feature: born at `birth`, dead at `death` (`+inf` for essential
/// classes), in homology dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair<T: Real> {
    pub birth: T,
    pub death: T,
    pub dim: usize,
}

impl<T: Real> PersistencePair<T> {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> T {
        self.death - self.birth
    }
}

/// Multiset of persistence pairs for one cloud, up to `max_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram<T: Real> {
    pairs: Vec<PersistencePair<T>>,
    max_dim: usize,
    max_filtration: T,
}

impl<T: Real> PersistenceDiagram<T> {
    fn new(mut pairs: Vec<PersistencePair<T>>, max_dim: usize, max_filtration: T) -> Self {
        pairs.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.partial_cmp(&b.birth).expect("finite birth"))
                .then(a.death.partial_cmp(&b.death).expect("ordered death"))
        });
        Self {
            pairs,
            max_dim,
            max_filtration,
        }
    }

    /// Builds a diagram from explicit pairs, validating that births are
    /// non-negative, deaths exceed births and dimensions fit `max_dim`.
    pub fn from_pairs(
        pairs: Vec<PersistencePair<T>>,
        max_dim: usize,
        max_filtration: T,
    ) -> Result<Self, PersistenceError> {
        for p in &pairs {
            let ok = p.dim <= max_dim
                && p.birth >= T::zero()
                && p.death > p.birth
                && p.birth <= max_filtration
                && (p.is_essential() || p.death <= max_filtration);
            if !ok {
                return Err(PersistenceError::InvalidPair {
                    dim: p.dim,
                    birth: p.birth.as_f64(),
                    death: p.death.as_f64(),
                });
            }
        }
        Ok(Self::new(pairs, max_dim, max_filtration))
    }

    pub fn pairs(&self) -> &[PersistencePair<T>] {
        &self.pairs
    }

    pub fn pairs_in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair<T>> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// The filtration cap the diagram was computed with.
    pub fn max_filtration(&self) -> T {
        self.max_filtration
    }

    /// Largest finite death in a dimension, if any.
    pub fn d_max(&self, dim: usize) -> Option<T> {
        self.pairs_in_dim(dim)
            .filter(|p| !p.is_essential())
            .map(|p| p.death)
            .fold(None, |acc, d| Some(acc.map_or(d, |m: T| m.max(d))))
    }

    /// Betti number at one filtration value: features with
    /// `birth <= eps < death` (essential classes count for all `eps >= birth`).
    pub fn betti_at(&self, dim: usize, eps: T) -> usize {
        self.pairs_in_dim(dim)
            .filter(|p| p.birth <= eps && (p.is_essential() || eps < p.death))
            .count()
    }

    /// CSV rows `dim,birth,death` with `inf` for essential deaths.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.pairs {
            if p.is_essential() {
                writeln!(out, "{},{},inf", p.dim, p.birth).expect("string write");
            } else {
                writeln!(out, "{},{},{}", p.dim, p.birth, p.death).expect("string write");
            }
        }
        out
    }
}

/// Betti number sampled on a uniform filtration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BettiCurve<T: Real> {
    pub grid: Vec<T>,
    pub counts: Vec<usize>,
    pub dim: usize,
}

/// Samples the dimension-`dim` Betti number on `grid_size` uniform values
/// over `[0, max_filtration]`.
pub fn betti_curve<T: Real>(
    diagram: &PersistenceDiagram<T>,
    dim: usize,
    grid_size: usize,
) -> Result<BettiCurve<T>, PersistenceError> {
    if grid_size < 2 {
        return Err(PersistenceError::GridTooSmall(grid_size));
    }
    let cap = diagram.max_filtration();
    let step = cap / T::of_usize(grid_size - 1);
    let grid: Vec<T> = (0..grid_size).map(|i| step * T::of_usize(i)).collect();
    let counts = grid.iter().map(|&eps| diagram.betti_at(dim, eps)).collect();
    Ok(BettiCurve { grid, counts, dim })
}

// ---------------------------------------------------------------------------
// Distance matrix and union-find
// ---------------------------------------------------------------------------

struct DistanceMatrix<T> {
    d: Vec<T>,
    n: usize,
}

impl<T: Real> DistanceMatrix<T> {
    fn build(cloud: &PointCloud<T>) -> Self {
        let n = cloud.len();
        let mut d = vec![T::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = cloud.dist(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self { d, n }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> T {
        self.d[i * self.n + j]
    }

    fn max_value(&self) -> T {
        self.d
            .iter()
            .copied()
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grandparent = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grandparent;
            x = grandparent;
        }
        x
    }

    /// Returns true when the two sets were distinct and got merged.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.rank[ra as usize] < self.rank[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        if self.rank[ra as usize] == self.rank[rb as usize] {
            self.rank[ra as usize] += 1;
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Z/2 column reduction
// ---------------------------------------------------------------------------

const NO_COL: u32 = u32::MAX;

/// Adds `other` into `col` over Z/2 (symmetric difference of sorted lists).
fn add_column(col: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut a, mut b) = (0usize, 0usize);
    while a < col.len() && b < other.len() {
        match col[a].cmp(&other[b]) {
            std::cmp::Ordering::Less => {
                scratch.push(col[a]);
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[b]);
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                a += 1;
                b += 1;
            }
        }
    }
    scratch.extend_from_slice(&col[a..]);
    scratch.extend_from_slice(&other[b..]);
    std::mem::swap(col, scratch);
}

struct Reduction {
    /// Owning column per row, `NO_COL` when unclaimed.
    pivot_of_row: Vec<u32>,
    /// Column indices that reduced to zero (were not cleared).
    zero_columns: Vec<bool>,
}

/// Left-to-right reduction of one boundary matrix. Columns must already be
/// in filtration order; `cleared[j]` skips columns known to reduce to zero.
fn reduce_boundary(columns: &mut [Vec<u32>], n_rows: usize, cleared: Option<&[bool]>) -> Reduction {
    let mut pivot_of_row = vec![NO_COL; n_rows];
    let mut zero_columns = vec![false; columns.len()];
    let mut scratch = Vec::new();
    for j in 0..columns.len() {
        if cleared.is_some_and(|c| c[j]) {
            columns[j].clear();
            continue;
        }
        loop {
            let Some(&pivot) = columns[j].last() else {
                zero_columns[j] = true;
                break;
            };
            let owner = pivot_of_row[pivot as usize];
            if owner == NO_COL {
                pivot_of_row[pivot as usize] = j as u32;
                break;
            }
            let (left, right) = columns.split_at_mut(j);
            add_column(&mut right[0], &left[owner as usize], &mut scratch);
        }
    }
    Reduction {
        pivot_of_row,
        zero_columns,
    }
}

// ---------------------------------------------------------------------------
// Rips complex enumeration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Edge<T> {
    value: T,
    i: u32,
    j: u32,
}

/// Ascending intersection of two sorted u32 slices, keeping elements > floor.
fn intersect_above(a: &[u32], b: &[u32], floor: u32, out: &mut Vec<u32>) {
    out.clear();
    let (mut x, mut y) = (0usize, 0usize);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                if a[x] > floor {
                    out.push(a[x]);
                }
                x += 1;
                y += 1;
            }
        }
    }
}

fn max3<T: Real>(a: T, b: T, c: T) -> T {
    let m = if a > b { a } else { b };
    if m > c {
        m
    } else {
        c
    }
}

/// Edge (i, j) -> rank in the sorted edge order. Dense table for small
/// vertex counts, hashed beyond that.
enum EdgeRank {
    Dense { ranks: Vec<u32>, n: usize },
    Sparse(HashMap<u64, u32>),
}

impl EdgeRank {
    fn build<T: Real>(edges: &[Edge<T>], n: usize) -> Self {
        if n <= 4096 {
            let mut ranks = vec![u32::MAX; n * n];
            for (rank, e) in edges.iter().enumerate() {
                ranks[e.i as usize * n + e.j as usize] = rank as u32;
            }
            Self::Dense { ranks, n }
        } else {
            let mut map = HashMap::with_capacity(edges.len());
            for (rank, e) in edges.iter().enumerate() {
                map.insert(((e.i as u64) << 32) | e.j as u64, rank as u32);
            }
            Self::Sparse(map)
        }
    }

    #[inline]
    fn get(&self, i: u32, j: u32) -> u32 {
        match self {
            Self::Dense { ranks, n } => ranks[i as usize * n + j as usize],
            Self::Sparse(map) => map[&(((i as u64) << 32) | j as u64)],
        }
    }
}

/// Computes the Vietoris-Rips persistence diagram of a point cloud.
///
/// * `max_dim` — highest homology dimension reported (0, 1 or 2).
/// * `max_filtration` — filtration cap; `None` uses the maximum pairwise
///   distance, at which the complex is a single simplex.
/// * `simplex_budget` — hard cap on the number of simplices materialized;
///   exceeding it is an error rather than a silent truncation.
pub fn rips_persistence<T: Real>(
    cloud: &PointCloud<T>,
    max_dim: usize,
    max_filtration: Option<T>,
    simplex_budget: usize,
) -> Result<PersistenceDiagram<T>, PersistenceError> {
    if max_dim > 2 {
        return Err(PersistenceError::DimTooLarge(max_dim));
    }
    let n = cloud.len();
    let dist = DistanceMatrix::build(cloud);
    let threshold = max_filtration.unwrap_or_else(|| dist.max_value());

    let mut pairs: Vec<PersistencePair<T>> = Vec::new();
    let mut simplex_count = n;

    // Edges within the cap, sorted by (value, lex).
    let mut edges: Vec<Edge<T>> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let value = dist.get(i, j);
            if value <= threshold {
                edges.push(Edge {
                    value,
                    i: i as u32,
                    j: j as u32,
                });
            }
        }
    }
    edges.sort_unstable_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .expect("finite distance")
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    simplex_count += edges.len();
    if simplex_count > simplex_budget {
        return Err(PersistenceError::SimplexBudget {
            required: simplex_count,
            budget: simplex_budget,
        });
    }

    // H0: Kruskal over the sorted edges. A merging edge destroys a component;
    // the rest create cycles.
    let mut uf = UnionFind::new(n);
    let mut merging_edge = vec![false; edges.len()];
    for (rank, e) in edges.iter().enumerate() {
        if uf.union(e.i, e.j) {
            merging_edge[rank] = true;
            if e.value > T::zero() {
                pairs.push(PersistencePair {
                    birth: T::zero(),
                    death: e.value,
                    dim: 0,
                });
            }
        }
    }
    let mut components = 0usize;
    for v in 0..n as u32 {
        if uf.find(v) == v {
            components += 1;
        }
    }
    for _ in 0..components {
        pairs.push(PersistencePair {
            birth: T::zero(),
            death: T::infinity(),
            dim: 0,
        });
    }

    if max_dim >= 1 && n >= 3 {
        // Neighbor lists over the capped graph (successors only).
        let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
        for e in &edges {
            neighbors[e.i as usize].push(e.j);
        }
        for nb in neighbors.iter_mut() {
            nb.sort_unstable();
        }

        // Flag triangles: i < j < k pairwise within the cap.
        let mut triangles: Vec<(T, [u32; 3])> = Vec::new();
        let mut common = Vec::new();
        for i in 0..n {
            let nb_i = &neighbors[i];
            for (a, &j) in nb_i.iter().enumerate() {
                intersect_above(&nb_i[a + 1..], &neighbors[j as usize], j, &mut common);
                for &k in &common {
                    let value = max3(
                        dist.get(i, j as usize),
                        dist.get(i, k as usize),
                        dist.get(j as usize, k as usize),
                    );
                    triangles.push((value, [i as u32, j, k]));
                    simplex_count += 1;
                    if simplex_count > simplex_budget {
                        return Err(PersistenceError::SimplexBudget {
                            required: simplex_count,
                            budget: simplex_budget,
                        });
                    }
                }
            }
        }
        triangles.sort_unstable_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite diameter")
                .then(a.1.cmp(&b.1))
        });
        let edge_rank = EdgeRank::build(&edges, n);
        let e_count = edges.len();
        let t_count = triangles.len();

        // Dimension-1 coboundary: one column per edge in reverse filtration
        // order, holding its cofacet triangles as rows (also reversed).
        // Iterating triangles in ascending rank emits rows in descending
        // order, so each column only needs a final reverse.
        let mut columns: Vec<Vec<u32>> = vec![Vec::new(); e_count];
        for (rank, &(_, [i, j, k])) in triangles.iter().enumerate() {
            let row = (t_count - 1 - rank) as u32;
            for (a, b) in [(i, j), (i, k), (j, k)] {
                let e = edge_rank.get(a, b) as usize;
                columns[e_count - 1 - e].push(row);
            }
        }
        for col in columns.iter_mut() {
            col.reverse();
        }
        // Edges that merged components pair with vertices; their columns
        // reduce to zero and are cleared.
        let cleared: Vec<bool> = (0..e_count)
            .map(|p| merging_edge[e_count - 1 - p])
            .collect();
        let reduction = reduce_boundary(&mut columns, t_count, Some(&cleared));
        let mut killed_triangle = vec![false; t_count];
        for (row, &col_pos) in reduction.pivot_of_row.iter().enumerate() {
            if col_pos == NO_COL {
                continue;
            }
            let tri_rank = t_count - 1 - row;
            killed_triangle[tri_rank] = true;
            let edge_idx = e_count - 1 - col_pos as usize;
            let birth = edges[edge_idx].value;
            let death = triangles[tri_rank].0;
            if death > birth {
                pairs.push(PersistencePair {
                    birth,
                    death,
                    dim: 1,
                });
            }
        }
        // Cycle-creating edges never paired with a triangle are essential.
        for (p, zero) in reduction.zero_columns.iter().enumerate() {
            let edge_idx = e_count - 1 - p;
            if *zero && !merging_edge[edge_idx] {
                pairs.push(PersistencePair {
                    birth: edges[edge_idx].value,
                    death: T::infinity(),
                    dim: 1,
                });
            }
        }

        if max_dim >= 2 && n >= 4 {
            let mut tri_rank: HashMap<[u32; 3], u32> = HashMap::with_capacity(t_count);
            for (rank, t) in triangles.iter().enumerate() {
                tri_rank.insert(t.1, rank as u32);
            }
            let mut tetrahedra: Vec<(T, [u32; 4])> = Vec::new();
            let mut common3 = Vec::new();
            for &(tri_value, [i, j, k]) in &triangles {
                intersect_above(&neighbors[i as usize], &neighbors[j as usize], k, &mut common);
                intersect_above(&common, &neighbors[k as usize], k, &mut common3);
                for &l in &common3 {
                    let value = max3(
                        tri_value,
                        dist.get(i as usize, l as usize),
                        max3(
                            dist.get(j as usize, l as usize),
                            dist.get(k as usize, l as usize),
                            tri_value,
                        ),
                    );
                    tetrahedra.push((value, [i, j, k, l]));
                    simplex_count += 1;
                    if simplex_count > simplex_budget {
                        return Err(PersistenceError::SimplexBudget {
                            required: simplex_count,
                            budget: simplex_budget,
                        });
                    }
                }
            }
            tetrahedra.sort_unstable_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .expect("finite diameter")
                    .then(a.1.cmp(&b.1))
            });
            let k_count = tetrahedra.len();

            // Dimension-2 coboundary: one column per triangle (reversed),
            // rows are cofacet tetrahedra (reversed).
            let mut columns: Vec<Vec<u32>> = vec![Vec::new(); t_count];
            for (rank, &(_, [i, j, k, l])) in tetrahedra.iter().enumerate() {
                let row = (k_count - 1 - rank) as u32;
                for face in [[i, j, k], [i, j, l], [i, k, l], [j, k, l]] {
                    let t = tri_rank[&face] as usize;
                    columns[t_count - 1 - t].push(row);
                }
            }
            for col in columns.iter_mut() {
                col.reverse();
            }
            // Triangles that killed a loop pair with edges; clear them here.
            let cleared: Vec<bool> = (0..t_count)
                .map(|p| killed_triangle[t_count - 1 - p])
                .collect();
            let reduction = reduce_boundary(&mut columns, k_count, Some(&cleared));
            for (row, &col_pos) in reduction.pivot_of_row.iter().enumerate() {
                if col_pos == NO_COL {
                    continue;
                }
                let tet_rank = k_count - 1 - row;
                let tri_idx = t_count - 1 - col_pos as usize;
                let birth = triangles[tri_idx].0;
                let death = tetrahedra[tet_rank].0;
                if death > birth {
                    pairs.push(PersistencePair {
                        birth,
                        death,
                        dim: 2,
                    });
                }
            }
            for (p, zero) in reduction.zero_columns.iter().enumerate() {
                let tri_idx = t_count - 1 - p;
                if *zero && !killed_triangle[tri_idx] {
                    pairs.push(PersistencePair {
                        birth: triangles[tri_idx].0,
                        death: T::infinity(),
                        dim: 2,
                    });
                }
            }
        }
    }

    Ok(PersistenceDiagram::new(pairs, max_dim, threshold))
}

// ---------------------------------------------------------------------------
// Brute-force reference reduction
// ---------------------------------------------------------------------------

/// Textbook persistence: enumerate every simplex up to dimension
/// `max_dim + 1`, build the full boundary matrix in one global filtration
/// order and reduce it left to right with no optimizations.
///
/// Limited to 10 points; exists as an independently-coded reference for the
/// optimized path and must agree with it pair for pair.
pub fn brute_force_persistence<T: Real>(
    cloud: &PointCloud<T>,
    max_dim: usize,
    max_filtration: Option<T>,
) -> Result<PersistenceDiagram<T>, PersistenceError> {
    if max_dim > 2 {
        return Err(PersistenceError::DimTooLarge(max_dim));
    }
    let n = cloud.len();
    if n > 10 {
        return Err(PersistenceError::TooManyPoints(n));
    }
    let dist = DistanceMatrix::build(cloud);
    let threshold = max_filtration.unwrap_or_else(|| dist.max_value());

    // Every vertex subset of size 1..=max_dim+2 whose diameter fits the cap.
    let mut simplices: Vec<(T, Vec<u32>)> = Vec::new();
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > max_dim + 2 {
            continue;
        }
        let vertices: Vec<u32> = (0..n as u32).filter(|v| mask & (1 << v) != 0).collect();
        let mut value = T::zero();
        for a in 0..vertices.len() {
            for b in (a + 1)..vertices.len() {
                let d = dist.get(vertices[a] as usize, vertices[b] as usize);
                if d > value {
                    value = d;
                }
            }
        }
        if value <= threshold {
            simplices.push((value, vertices));
        }
    }
    simplices.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite diameter")
            .then(a.1.len().cmp(&b.1.len()))
            .then(a.1.cmp(&b.1))
    });

    let index: HashMap<Vec<u32>, u32> = simplices
        .iter()
        .enumerate()
        .map(|(rank, (_, v))| (v.clone(), rank as u32))
        .collect();

    let mut columns: Vec<Vec<u32>> = simplices
        .iter()
        .map(|(_, vertices)| {
            if vertices.len() == 1 {
                return Vec::new();
            }
            let mut faces: Vec<u32> = (0..vertices.len())
                .map(|drop| {
                    let face: Vec<u32> = vertices
                        .iter()
                        .enumerate()
                        .filter(|&(pos, _)| pos != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    index[&face]
                })
                .collect();
            faces.sort_unstable();
            faces
        })
        .collect();

    let reduction = reduce_boundary(&mut columns, simplices.len(), None);

    let mut pairs: Vec<PersistencePair<T>> = Vec::new();
    let mut paired = vec![false; simplices.len()];
    for (row, &col) in reduction.pivot_of_row.iter().enumerate() {
        if col == NO_COL {
            continue;
        }
        paired[row] = true;
        paired[col as usize] = true;
        let dim = simplices[row].1.len() - 1;
        if dim > max_dim {
            continue;
        }
        let (birth, death) = (simplices[row].0, simplices[col as usize].0);
        if death > birth {
            pairs.push(PersistencePair { birth, death, dim });
        }
    }
    for (rank, (value, vertices)) in simplices.iter().enumerate() {
        let dim = vertices.len() - 1;
        if dim <= max_dim && !paired[rank] && reduction.zero_columns[rank] {
            pairs.push(PersistencePair {
                birth: *value,
                death: T::infinity(),
                dim,
            });
        }
    }

    Ok(PersistenceDiagram::new(pairs, max_dim, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::PointCloud;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: &[[f64; 2]]) -> PointCloud<f64> {
        PointCloud::new(points.iter().flatten().copied().collect(), 2).unwrap()
    }

    fn unit_square() -> PointCloud<f64> {
        cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    #[test]
    fn unit_square_diagram() {
        let diagram = rips_persistence(&unit_square(), 2, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let h0: Vec<_> = diagram.pairs_in_dim(0).collect();
        assert_eq!(h0.len(), 4);
        let finite: Vec<f64> = h0
            .iter()
            .filter(|p| !p.is_essential())
            .map(|p| p.death)
            .collect();
        assert_eq!(finite, vec![1.0, 1.0, 1.0]);
        assert_eq!(h0.iter().filter(|p| p.is_essential()).count(), 1);

        let h1: Vec<_> = diagram.pairs_in_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 1.0).abs() < 1e-15);
        assert!((h1[0].death - 2f64.sqrt()).abs() < 1e-15);

        assert_eq!(diagram.pairs_in_dim(2).count(), 0);
    }

    #[test]
    fn collinear_points_have_no_loop() {
        let diagram = rips_persistence(
            &cloud(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]),
            1,
            None,
            DEFAULT_SIMPLEX_BUDGET,
        )
        .unwrap();
        let mut deaths: Vec<f64> = diagram
            .pairs_in_dim(0)
            .filter(|p| !p.is_essential())
            .map(|p| p.death)
            .collect();
        deaths.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(deaths, vec![1.0, 2.0]);
        assert_eq!(diagram.pairs_in_dim(0).filter(|p| p.is_essential()).count(), 1);
        assert_eq!(diagram.pairs_in_dim(1).count(), 0);
    }

    #[test]
    fn single_point_is_one_essential_class() {
        let diagram = rips_persistence(
            &cloud(&[[0.5, -0.5]]),
            2,
            None,
            DEFAULT_SIMPLEX_BUDGET,
        )
        .unwrap();
        assert_eq!(diagram.pairs().len(), 1);
        assert!(diagram.pairs()[0].is_essential());
        assert_eq!(diagram.pairs()[0].dim, 0);
        assert_eq!(diagram.pairs()[0].birth, 0.0);
    }

    #[test]
    fn equilateral_triangle_loop_is_instantaneous() {
        let h = 3f64.sqrt() / 2.0;
        let diagram = rips_persistence(
            &cloud(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]),
            1,
            None,
            DEFAULT_SIMPLEX_BUDGET,
        )
        .unwrap();
        assert_eq!(diagram.pairs_in_dim(1).count(), 0);
    }

    #[test]
    fn two_points_brute_force() {
        let diagram = brute_force_persistence(&cloud(&[[0.0, 0.0], [3.0, 4.0]]), 1, None).unwrap();
        let h0: Vec<_> = diagram.pairs_in_dim(0).collect();
        assert_eq!(h0.len(), 2);
        let finite: Vec<_> = h0.iter().filter(|p| !p.is_essential()).collect();
        assert_eq!(finite.len(), 1);
        assert!((finite[0].death - 5.0).abs() < 1e-15);
        assert_eq!(diagram.pairs_in_dim(1).count(), 0);
    }

    #[test]
    fn brute_force_matches_on_unit_square() {
        let optimized = rips_persistence(&unit_square(), 2, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let brute = brute_force_persistence(&unit_square(), 2, None).unwrap();
        assert_eq!(optimized.pairs(), brute.pairs());
    }

    #[test]
    fn brute_force_rejects_large_clouds() {
        let points: Vec<[f64; 2]> = (0..11).map(|i| [i as f64, 0.0]).collect();
        assert!(matches!(
            brute_force_persistence(&cloud(&points), 1, None),
            Err(PersistenceError::TooManyPoints(11))
        ));
    }

    #[test]
    fn budget_exceeded_is_loud() {
        let points: Vec<[f64; 2]> = (0..50).map(|i| [(i as f64).cos(), (i as f64).sin()]).collect();
        let err = rips_persistence(&cloud(&points), 2, None, 100).unwrap_err();
        assert!(matches!(err, PersistenceError::SimplexBudget { .. }));
        assert!(err.to_string().contains("subsample"));
    }

    #[test]
    fn betti_curve_unit_square() {
        let diagram = rips_persistence(&unit_square(), 1, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        assert_eq!(diagram.betti_at(0, 1.2), 1);
        assert_eq!(diagram.betti_at(1, 1.2), 1);
        assert_eq!(diagram.betti_at(0, 0.0), 4);
        assert_eq!(diagram.betti_at(1, 0.0), 0);
        let curve = betti_curve(&diagram, 1, 100).unwrap();
        assert_eq!(curve.grid.len(), 100);
        assert_eq!(curve.counts.iter().max(), Some(&1));
    }

    #[test]
    fn betti_curve_needs_two_grid_points() {
        let diagram = rips_persistence(&unit_square(), 1, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        assert!(matches!(
            betti_curve(&diagram, 1, 1),
            Err(PersistenceError::GridTooSmall(1))
        ));
    }

    #[test]
    fn capped_filtration_yields_essential_loop() {
        // with the cap below sqrt(2) the square's loop never fills in
        let diagram =
            rips_persistence(&unit_square(), 1, Some(1.2), DEFAULT_SIMPLEX_BUDGET).unwrap();
        let h1: Vec<_> = diagram.pairs_in_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert!(h1[0].is_essential());
        assert_eq!(h1[0].birth, 1.0);
    }

    #[test]
    fn monotone_in_filtration_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let points: Vec<[f64; 2]> =
            (0..30).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let c = cloud(&points);
        let low = rips_persistence(&c, 1, Some(0.8), DEFAULT_SIMPLEX_BUDGET).unwrap();
        let high = rips_persistence(&c, 1, Some(1.6), DEFAULT_SIMPLEX_BUDGET).unwrap();
        for p in low.pairs().iter().filter(|p| !p.is_essential() && p.death < 0.8) {
            assert!(
                high.pairs().iter().any(|q| q == p),
                "pair {p:?} lost when the cap was raised"
            );
        }
    }

    #[test]
    fn scale_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let points: Vec<[f64; 2]> =
            (0..20).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let scaled: Vec<[f64; 2]> = points.iter().map(|p| [p[0] * 2.5, p[1] * 2.5]).collect();
        let base = rips_persistence(&cloud(&points), 1, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let big = rips_persistence(&cloud(&scaled), 1, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        assert_eq!(base.pairs().len(), big.pairs().len());
        for (a, b) in base.pairs().iter().zip(big.pairs()) {
            assert_eq!(a.dim, b.dim);
            assert!((a.birth * 2.5 - b.birth).abs() < 1e-12);
            if a.is_essential() {
                assert!(b.is_essential());
            } else {
                assert!((a.death * 2.5 - b.death).abs() < 1e-12);
            }
        }
    }

    /// Prim's algorithm, kept independent of the union-find H0 path.
    fn mst_weights_prim(c: &PointCloud<f64>) -> Vec<f64> {
        let n = c.len();
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        in_tree[0] = true;
        for j in 1..n {
            best[j] = c.dist(0, j);
        }
        let mut weights = Vec::with_capacity(n - 1);
        for _ in 1..n {
            let (next, &w) = best
                .iter()
                .enumerate()
                .filter(|(i, _)| !in_tree[*i])
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            weights.push(w);
            in_tree[next] = true;
            for j in 0..n {
                if !in_tree[j] {
                    best[j] = best[j].min(c.dist(next, j));
                }
            }
        }
        weights
    }

    #[test]
    fn h0_deaths_are_mst_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let points: Vec<[f64; 2]> = (0..40)
                .map(|_| [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)])
                .collect();
            let c = cloud(&points);
            let diagram = rips_persistence(&c, 0, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
            let mut deaths: Vec<f64> = diagram
                .pairs_in_dim(0)
                .filter(|p| !p.is_essential())
                .map(|p| p.death)
                .collect();
            let mut mst = mst_weights_prim(&c);
            deaths.sort_by(|a, b| a.partial_cmp(b).unwrap());
            mst.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(deaths, mst);
        }
    }

    #[test]
    fn csv_export_marks_essentials() {
        let diagram = rips_persistence(&unit_square(), 1, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let csv = diagram.to_csv();
        assert!(csv.starts_with("dim,birth,death\n"));
        assert!(csv.contains("0,0,inf"));
        assert!(csv.contains("1,1,1.4142135623730951"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn oracle_equivalence_small_clouds(
            seed in 0u64..10_000,
            n in 2usize..=8,
            dim in 1usize..=4,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = PointCloud::new(coords, dim).unwrap();
            let fast = rips_persistence(&c, 2, None, DEFAULT_SIMPLEX_BUDGET).unwrap();
            let slow = brute_force_persistence(&c, 2, None).unwrap();
            prop_assert_eq!(fast.pairs(), slow.pairs());
        }
    }
}
