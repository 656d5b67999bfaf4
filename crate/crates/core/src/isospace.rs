//! Finite metabolic symplectic and unitary spaces over `k`, subspaces in
//! canonical echelon form, and the local hyperbolic plane carrying one
//! unramified and `p` ramified isotropic lines.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::gfq::{FieldParams, Flavor, FqElem};

pub type Vector = Vec<FqElem>;

/// Reduces `rows` to reduced row-echelon form in place and drops zero rows.
/// Pivots are normalized to one and scanned left to right.
fn row_reduce(field: &FieldParams, rows: &mut Vec<Vector>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..ncols {
        let Some(found) = (next..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(next, found);
        let inv = field.inv(rows[next][col]).expect("pivot is nonzero");
        for x in rows[next].iter_mut() {
            *x = field.mul(*x, inv);
        }
        for i in 0..rows.len() {
            if i == next || rows[i][col].is_zero() {
                continue;
            }
            let factor = rows[i][col];
            for j in 0..ncols {
                let t = field.mul(factor, rows[next][j]);
                rows[i][j] = field.sub(rows[i][j], t);
            }
        }
        pivots.push(col);
        next += 1;
        if next == rows.len() {
            break;
        }
    }
    rows.truncate(next);
    pivots
}

/// Basis of `{y : A·y = 0}` for `A` with `ncols` columns.
fn null_space(field: &FieldParams, rows: &[Vector], ncols: usize) -> Vec<Vector> {
    let mut reduced = rows.to_vec();
    let pivots = row_reduce(field, &mut reduced, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![FqElem::ZERO; ncols];
            v[f] = FqElem::ONE;
            for (row, &pc) in reduced.iter().zip(&pivots) {
                v[pc] = field.neg(row[f]);
            }
            v
        })
        .collect()
}

/// Lexicographic order of vectors by canonical element index.
pub fn compare_vectors(field: &FieldParams, a: &[FqElem], b: &[FqElem]) -> Ordering {
    a.iter()
        .map(|&x| field.index_of(x))
        .cmp(b.iter().map(|&x| field.index_of(x)))
}

/// A subspace of `k^n`, stored as its unique reduced row-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    pub fn span(field: &FieldParams, ambient_dim: usize, vectors: &[Vector]) -> Result<Self> {
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: v.len(),
                });
            }
        }
        let mut basis = vectors.to_vec();
        row_reduce(field, &mut basis, ambient_dim);
        Ok(Subspace { ambient_dim, basis })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut v = vec![FqElem::ZERO; ambient_dim];
                v[i] = FqElem::ONE;
                v
            })
            .collect();
        Subspace { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn contains(&self, field: &FieldParams, v: &[FqElem]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        row_reduce(field, &mut rows, self.ambient_dim);
        rows.len() == self.basis.len()
    }

    pub fn intersection(&self, field: &FieldParams, other: &Subspace) -> Result<Subspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        // x ∈ U ∩ W iff x ⊥ ann(U) and x ⊥ ann(W) for the standard dot product.
        let n = self.ambient_dim;
        let mut ann = null_space(field, &self.basis, n);
        ann.extend(null_space(field, &other.basis, n));
        let basis = null_space(field, &ann, n);
        Subspace::span(field, n, &basis)
    }

    pub fn format(&self, field: &FieldParams) -> String {
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|v| {
                let coords: Vec<String> = v.iter().map(|&x| field.format_elem(x)).collect();
                format!("({})", coords.join(","))
            })
            .collect();
        format!("span[{}]", rows.join(" "))
    }
}

/// A non-degenerate alternating (symplectic) or hermitian (unitary) space,
/// with `h(x, y) = Σ x_i g_ij y_j†`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitianSpace {
    field: FieldParams,
    gram: Vec<Vector>,
}

impl HermitianSpace {
    pub fn new(field: FieldParams, gram: Vec<Vector>) -> Result<Self> {
        let dim = gram.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("space of dimension 0".into()));
        }
        for row in &gram {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                let (gij, gji) = (gram[i][j], gram[j][i]);
                let ok = match field.flavor() {
                    Flavor::Symplectic => {
                        // h(e_i, e_i) = 0 is required separately: skew-symmetry
                        // says nothing in characteristic 2.
                        (i != j || gij.is_zero()) && gji == field.neg(gij)
                    }
                    Flavor::Unitary => gji == field.conj(gij),
                };
                if !ok {
                    return Err(Error::NotSesquilinear(match field.flavor() {
                        Flavor::Symplectic => "alternating",
                        Flavor::Unitary => "hermitian",
                    }));
                }
            }
        }
        let mut rows = gram.clone();
        if row_reduce(&field, &mut rows, dim).len() != dim {
            return Err(Error::Degenerate);
        }
        Ok(HermitianSpace { field, gram })
    }

    /// Standard hyperbolic plane: `[[0,1],[-1,0]]` (symplectic) or
    /// `[[0,1],[1,0]]` (unitary).
    pub fn hyperbolic_plane(field: FieldParams) -> Self {
        Self::metabolic(field, 1)
    }

    /// Orthogonal sum of `planes` standard hyperbolic planes, on the basis
    /// `e1, e2 | e3, e4 | ...`.
    pub fn metabolic(field: FieldParams, planes: usize) -> Self {
        let dim = 2 * planes;
        let lower = match field.flavor() {
            Flavor::Symplectic => field.neg(FqElem::ONE),
            Flavor::Unitary => FqElem::ONE,
        };
        let mut gram = vec![vec![FqElem::ZERO; dim]; dim];
        for b in 0..planes {
            gram[2 * b][2 * b + 1] = FqElem::ONE;
            gram[2 * b + 1][2 * b] = lower;
        }
        Self::new(field, gram).expect("standard metabolic gram matrix is valid")
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vector] {
        &self.gram
    }

    fn check_len(&self, v: &[FqElem]) -> Result<()> {
        if v.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            })
        }
    }

    pub fn evaluate_form(&self, x: &[FqElem], y: &[FqElem]) -> Result<FqElem> {
        self.check_len(x)?;
        self.check_len(y)?;
        let f = &self.field;
        let mut acc = FqElem::ZERO;
        for (xi, row) in x.iter().zip(&self.gram) {
            if xi.is_zero() {
                continue;
            }
            for (gij, yj) in row.iter().zip(y) {
                let t = f.mul(f.mul(*xi, *gij), f.conj(*yj));
                acc = f.add(acc, t);
            }
        }
        Ok(acc)
    }

    pub fn orthogonal_complement(&self, x: &Subspace) -> Result<Subspace> {
        if x.ambient_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.ambient_dim(),
            });
        }
        let f = &self.field;
        let n = self.dim();
        // h(b, y) = Σ_j (bG)_j y_j† = 0  <=>  Σ_j (bG)_j† y_j = 0
        let rows: Vec<Vector> = x
            .basis()
            .iter()
            .map(|b| {
                (0..n)
                    .map(|j| {
                        let s = (0..n).fold(FqElem::ZERO, |acc, i| {
                            f.add(acc, f.mul(b[i], self.gram[i][j]))
                        });
                        f.conj(s)
                    })
                    .collect()
            })
            .collect();
        let basis = null_space(f, &rows, n);
        Subspace::span(f, n, &basis)
    }

    pub fn is_isotropic(&self, x: &Subspace) -> Result<bool> {
        for a in x.basis() {
            for b in x.basis() {
                if !self.evaluate_form(a, b)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn is_maximal_isotropic(&self, x: &Subspace) -> Result<bool> {
        Ok(self.orthogonal_complement(x)? == *x)
    }

    /// Every isotropic line of a 2-dimensional space, ordered by the
    /// canonical basis vector.
    pub fn enumerate_isotropic_lines(&self) -> Result<Vec<Subspace>> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.dim(),
            });
        }
        let f = &self.field;
        let mut reps: Vec<Vector> = vec![vec![FqElem::ZERO, FqElem::ONE]];
        reps.extend(f.elements().map(|t| vec![FqElem::ONE, t]));
        let mut lines = Vec::new();
        for v in reps {
            if self.evaluate_form(&v, &v)?.is_zero() {
                lines.push(v);
            }
        }
        lines.sort_by(|a, b| compare_vectors(f, a, b));
        lines
            .into_iter()
            .map(|v| Subspace::span(f, 2, &[v]))
            .collect()
    }
}

/// The local cohomology at a split place, modelled as a hyperbolic plane
/// with its isotropic lines split into the unramified one and `p` ramified
/// ones.
#[derive(Debug, Clone)]
pub struct LocalPlane {
    space: HermitianSpace,
    unramified_line: Subspace,
    ramified_lines: Vec<Subspace>,
}

impl LocalPlane {
    pub fn build(field: FieldParams) -> Self {
        let space = HermitianSpace::hyperbolic_plane(field);
        let mut lines = space
            .enumerate_isotropic_lines()
            .expect("hyperbolic plane has dimension 2");
        let unramified_line = lines.remove(0);
        debug_assert_eq!(lines.len(), field.p() as usize);
        LocalPlane {
            space,
            unramified_line,
            ramified_lines: lines,
        }
    }

    pub fn space(&self) -> &HermitianSpace {
        &self.space
    }

    pub fn field(&self) -> &FieldParams {
        self.space.field()
    }

    pub fn unramified_line(&self) -> &Subspace {
        &self.unramified_line
    }

    pub fn ramified_lines(&self) -> &[Subspace] {
        &self.ramified_lines
    }

    /// Maps a totally ramified character (by index) to its Kummer line.
    /// Consecutive blocks of [`fiber_size`] indices share a line.
    pub fn kummer_line_of_character(&self, fiber_index: u64, n: u32) -> Result<&Subspace> {
        let p = self.field().p() as u64;
        let len = character_count(p, n)?;
        if fiber_index >= len {
            return Err(Error::IndexOutOfRange {
                index: fiber_index,
                len,
            });
        }
        let block = fiber_size(p, n)?;
        Ok(&self.ramified_lines[(fiber_index / block) as usize])
    }

    /// Index into `ramified_lines` hit by `fiber_index`.
    pub fn kummer_index(&self, fiber_index: u64, n: u32) -> Result<usize> {
        let line = self.kummer_line_of_character(fiber_index, n)?;
        Ok(self
            .ramified_lines
            .iter()
            .position(|l| l == line)
            .expect("line comes from the list"))
    }
}

fn checked_pow(p: u64, e: u32) -> Result<u64> {
    p.checked_pow(e)
        .ok_or_else(|| Error::InvalidParameter(format!("{p}^{e} overflows")))
}

/// Number of totally ramified characters of order `p^n` at a place,
/// `p^(2n-1)(p-1)`.
pub fn character_count(p: u64, n: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(checked_pow(p, 2 * n - 1)? * (p - 1))
}

/// Characters sharing one Kummer line, `p^(2n-2)(p-1)`.
pub fn fiber_size(p: u64, n: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(checked_pow(p, 2 * n - 2)? * (p - 1))
}
