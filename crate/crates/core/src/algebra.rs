//! Heisenberg-type Lie algebras `n = v ⊕ z` with explicit `J_Z` maps.
//!
//! The maps come from left multiplication by imaginary octonions (restricted
//! to the complex or quaternionic subalgebra for `k <= 3`), one doubling step
//! for `k = 8`, and the mod-8 periodicity `Cl_{k+8} = Cl_k ⊗ Cl_8` beyond.
//! Feasible `m` are the positive multiples of the minimal module dimension;
//! larger modules are block-diagonal copies.
//!
//! Orientation: for `(m, k) = (2, 1)`, `J_1 e_1 = +e_2`, so
//! `[e_1, e_2] = ⟨J_1 e_1, e_2⟩ = +1`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Anticommuting skew matrices realising the bracket of an H-type algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct HTypeAlgebra {
    m: usize,
    k: usize,
    j: Vec<DMatrix<f64>>,
}

/// Smallest `m` admitting `k` anticommuting complex structures on `R^m`.
pub fn min_module_dim(k: usize) -> usize {
    const TABLE: [usize; 8] = [1, 2, 4, 4, 8, 8, 8, 8];
    let mut d = TABLE[k % 8];
    for _ in 0..k / 8 {
        d *= 16;
    }
    d
}

// Imaginary-unit products e_a e_b = e_c for each cyclic triple (a, b, c).
const OCTONION_TRIPLES: [(usize, usize, usize); 7] =
    [(1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5)];

/// Product of octonion basis units, returned as (sign, index).
fn octonion_unit_product(a: usize, b: usize) -> (f64, usize) {
    match (a, b) {
        (0, b) => (1.0, b),
        (a, 0) => (1.0, a),
        (a, b) if a == b => (-1.0, 0),
        (a, b) => {
            for &(p, q, r) in &OCTONION_TRIPLES {
                let cyc = [(p, q, r), (q, r, p), (r, p, q)];
                for &(x, y, z) in &cyc {
                    if (x, y) == (a, b) {
                        return (1.0, z);
                    }
                    if (y, x) == (a, b) {
                        return (-1.0, z);
                    }
                }
            }
            unreachable!("octonion table covers every pair of distinct units")
        }
    }
}

/// Left multiplication by `e_a` restricted to the first `dim` basis units.
fn octonion_left(a: usize, dim: usize) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (s, row) = octonion_unit_product(a, col);
        debug_assert!(row < dim);
        l[(row, col)] = s;
    }
    l
}

fn minimal_generators(k: usize) -> Vec<DMatrix<f64>> {
    let d = min_module_dim(k);
    match k {
        0 => Vec::new(),
        1..=7 => (1..=k).map(|a| octonion_left(a, d)).collect(),
        8 => {
            // J_i ↦ diag(J_i, -J_i), plus the block rotation [[0, -I], [I, 0]].
            let base = minimal_generators(7);
            let mut gens: Vec<DMatrix<f64>> = base
                .iter()
                .map(|g| {
                    let mut big = DMatrix::zeros(16, 16);
                    big.view_mut((0, 0), (8, 8)).copy_from(g);
                    big.view_mut((8, 8), (8, 8)).copy_from(&(-g));
                    big
                })
                .collect();
            let mut rot = DMatrix::zeros(16, 16);
            for i in 0..8 {
                rot[(i, 8 + i)] = -1.0;
                rot[(8 + i, i)] = 1.0;
            }
            gens.push(rot);
            gens
        }
        _ => {
            let inner = minimal_generators(k - 8);
            let cl8 = minimal_generators(8);
            let omega = cl8.iter().fold(DMatrix::identity(16, 16), |acc, g| acc * g);
            let di = inner.first().map_or(1, |g| g.nrows());
            let mut gens: Vec<DMatrix<f64>> = inner.iter().map(|g| g.kronecker(&omega)).collect();
            let id = DMatrix::<f64>::identity(di, di);
            gens.extend(cl8.iter().map(|e| id.kronecker(e)));
            gens
        }
    }
}

fn block_diagonal(g: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let d = g.nrows();
    let mut out = DMatrix::zeros(d * copies, d * copies);
    for c in 0..copies {
        out.view_mut((c * d, c * d), (d, d)).copy_from(g);
    }
    out
}

/// Builds an H-type algebra with `dim v = m`, `dim z = k`.
pub fn build_htype(m: usize, k: usize) -> Result<HTypeAlgebra> {
    HTypeAlgebra::new(m, k)
}

impl HTypeAlgebra {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        let d = min_module_dim(k);
        if m == 0 || !m.is_multiple_of(d) {
            return Err(Error::InfeasibleDimensions { m, k, min_m: d });
        }
        let j: Vec<DMatrix<f64>> = minimal_generators(k)
            .iter()
            .map(|g| block_diagonal(g, m / d))
            .collect();
        let alg = Self { m, k, j };
        let defect = alg.invariant_defect();
        assert!(defect <= 1e-12, "constructed J maps violate H-type identities by {defect:e}");
        Ok(alg)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `J_i = J_{e_i}` for the standard basis of `z`.
    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.j
    }

    /// The matrix of `J_Z = Σ Z_i J_i`.
    pub fn j_matrix(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_z(z, "j_matrix")?;
        let mut out = DMatrix::zeros(self.m, self.m);
        for (zi, ji) in z.iter().zip(&self.j) {
            out += ji * *zi;
        }
        Ok(out)
    }

    /// `J_Z X`.
    pub fn j_map(&self, z: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_z(z, "j_map")?;
        self.check_v(x, "j_map")?;
        Ok(self.j_map_unchecked(z, x))
    }

    pub(crate) fn j_map_unchecked(&self, z: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (zi, ji) in z.iter().zip(&self.j) {
            if *zi != 0.0 {
                out.gemv(*zi, ji, x, 1.0);
            }
        }
        out
    }

    /// `[X, X']`, with components `⟨J_i X, X'⟩`.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_v(x, "bracket")?;
        self.check_v(y, "bracket")?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.k, self.j.iter().map(|ji| (ji * x).dot(y)))
    }

    /// Largest Frobenius-norm violation of skew-symmetry, `J_i² = -I` and
    /// `J_i J_j + J_j J_i = 0`.
    pub fn invariant_defect(&self) -> f64 {
        let id = DMatrix::<f64>::identity(self.m, self.m);
        let mut worst: f64 = 0.0;
        for (a, ja) in self.j.iter().enumerate() {
            worst = worst.max((ja + ja.transpose()).norm());
            worst = worst.max((ja * ja + &id).norm());
            for jb in &self.j[a + 1..] {
                worst = worst.max((ja * jb + jb * ja).norm());
            }
        }
        worst
    }

    fn check_v(&self, x: &DVector<f64>, context: &'static str) -> Result<()> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.m,
                found: x.len(),
            });
        }
        Ok(())
    }

    fn check_z(&self, z: &DVector<f64>, context: &'static str) -> Result<()> {
        if z.len() != self.k {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.k,
                found: z.len(),
            });
        }
        Ok(())
    }
}
