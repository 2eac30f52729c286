use std::sync::{Mutex, OnceLock};

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{HamiltonianMatrix, Space};

/// Orthonormal basis vector `w_a e_a + w_b e_b` of a symmetry block.
#[derive(Clone, Copy, Debug)]
struct Member {
    a: usize,
    b: usize,
    wa: f64,
    wb: f64,
}

impl Member {
    fn single(a: usize) -> Self {
        Self { a, b: a, wa: 1.0, wb: 0.0 }
    }

    /// `u^T H v` for two block basis vectors.
    fn sandwich(&self, h: &HamiltonianMatrix, v: &Member) -> f64 {
        let mut s = self.wa * v.wa * h.get(self.a, v.a);
        if v.wb != 0.0 {
            s += self.wa * v.wb * h.get(self.a, v.b);
        }
        if self.wb != 0.0 {
            s += self.wb * v.wa * h.get(self.b, v.a);
            if v.wb != 0.0 {
                s += self.wb * v.wb * h.get(self.b, v.b);
            }
        }
        s
    }

    fn project(&self, v: &[Complex64]) -> Complex64 {
        v[self.a] * self.wa + v[self.b] * self.wb
    }

    fn scatter(&self, coeff: Complex64, out: &mut [Complex64]) {
        out[self.a] += coeff * self.wa;
        if self.wb != 0.0 {
            out[self.b] += coeff * self.wb;
        }
    }
}

struct Eigen {
    values: Vec<f64>,
    /// Eigenvectors, column-major.
    vectors: Vec<f64>,
}

impl Eigen {
    fn column(&self, c: usize) -> &[f64] {
        let n = self.values.len();
        &self.vectors[c * n..(c + 1) * n]
    }
}

struct Block {
    members: Vec<Member>,
    matrix: Mutex<Option<Mat<f64>>>,
    eigen: OnceLock<Result<Eigen>>,
}

impl Block {
    fn new(members: Vec<Member>, h: &HamiltonianMatrix) -> Self {
        let n = members.len();
        let matrix = Mat::from_fn(n, n, |r, c| members[r].sandwich(h, &members[c]));
        Self {
            members,
            matrix: Mutex::new(Some(matrix)),
            eigen: OnceLock::new(),
        }
    }

    fn eigen(&self) -> Result<&Eigen> {
        self.eigen
            .get_or_init(|| {
                let matrix = self
                    .matrix
                    .lock()
                    .expect("block matrix lock")
                    .take()
                    .expect("block matrix consumed once");
                let evd = matrix
                    .self_adjoint_eigen(Side::Lower)
                    .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
                let n = matrix.nrows();
                let values = (0..n).map(|i| evd.S()[i]).collect();
                let u = evd.U();
                let mut vectors = Vec::with_capacity(n * n);
                for c in 0..n {
                    vectors.extend((0..n).map(|r| u[(r, c)]));
                }
                Ok(Eigen { values, vectors })
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// Exact propagator `e^{-iHt}` from a dense eigendecomposition.
///
/// The Hamiltonian may be split into reflection-parity blocks; each block is
/// diagonalized the first time a state with weight in it is evolved, and the
/// decomposition is reused for every later time.
pub struct Propagator {
    space: Space,
    blocks: Vec<Block>,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("space", &self.space)
            .field("blocks", &self.block_dims())
            .finish()
    }
}

impl Propagator {
    /// Single block spanning the whole space.
    pub fn new(h: &HamiltonianMatrix) -> Self {
        let members = (0..h.dim()).map(Member::single).collect();
        Self {
            space: h.space(),
            blocks: vec![Block::new(members, h)],
        }
    }

    /// Splits into even and odd blocks under the mirror `j -> L - 1 - j`.
    ///
    /// Falls back to a single block when `h` is not mirror symmetric.
    pub fn with_reflection(h: &HamiltonianMatrix) -> Self {
        let space = h.space();
        let n = h.dim();
        let mirror: Vec<usize> = (0..n).map(|i| space.reflect(i)).collect();
        let symmetric = (0..n).all(|i| {
            let row = h.row(i);
            let mrow = h.row(mirror[i]);
            (0..n).all(|j| (row[j] - mrow[mirror[j]]).abs() <= 1e-14)
        });
        if !symmetric {
            return Self::new(h);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for (i, &m) in mirror.iter().enumerate() {
            if m == i {
                even.push(Member::single(i));
            } else if i < m {
                even.push(Member { a: i, b: m, wa: s, wb: s });
                odd.push(Member { a: i, b: m, wa: s, wb: -s });
            }
        }
        let mut blocks = vec![Block::new(even, h)];
        if !odd.is_empty() {
            blocks.push(Block::new(odd, h));
        }
        Self { space, blocks }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.members.len()).collect()
    }

    /// Diagonalizes every block and returns all eigenvalues, sorted.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut all = Vec::new();
        for block in &self.blocks {
            all.extend_from_slice(&block.eigen()?.values);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// Largest deviation of the eigenvector matrices from orthogonality
    /// and of the reconstruction `V diag(E) V^T` from `h`, over the
    /// spot-checked entries `(i, (i * 7 + 3) mod n)`.
    pub fn decomposition_error(&self, h: &HamiltonianMatrix) -> Result<(f64, f64)> {
        let mut ortho = 0.0f64;
        let mut recon = 0.0f64;
        for block in &self.blocks {
            let eig = block.eigen()?;
            let n = eig.values.len();
            let v = |r: usize, c: usize| eig.vectors[c * n + r];
            for i in 0..n {
                let j = (i * 7 + 3) % n;
                let dot: f64 = eig.column(i).iter().zip(eig.column(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((dot - target).abs());
                let rebuilt: f64 = (0..n).map(|k| v(i, k) * eig.values[k] * v(j, k)).sum();
                let exact = block.members[i].sandwich(h, &block.members[j]);
                recon = recon.max((rebuilt - exact).abs());
            }
        }
        Ok((ortho, recon))
    }

    /// `V e^{-iEt} V^T psi`, block by block.
    pub(crate) fn apply(&self, psi: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for block in &self.blocks {
            let coeffs: Vec<Complex64> = block.members.iter().map(|m| m.project(psi)).collect();
            if coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
                continue;
            }
            let eig = block.eigen()?;
            let n = coeffs.len();
            let (re, im): (Vec<f64>, Vec<f64>) = coeffs.iter().map(|c| (c.re, c.im)).unzip();
            let mut rotated = Vec::with_capacity(n);
            for (col, &energy) in eig.values.iter().enumerate() {
                let (mut wr, mut wi) = (0.0, 0.0);
                for ((x, r), i) in eig.column(col).iter().zip(&re).zip(&im) {
                    wr += x * r;
                    wi += x * i;
                }
                let phase = Complex64::from_polar(1.0, -energy * t);
                rotated.push(Complex64::new(wr, wi) * phase);
            }
            let mut back_re = vec![0.0; n];
            let mut back_im = vec![0.0; n];
            for (col, w) in rotated.iter().enumerate() {
                for ((x, r), i) in eig.column(col).iter().zip(&mut back_re).zip(&mut back_im) {
                    *r += x * w.re;
                    *i += x * w.im;
                }
            }
            for (member, (r, i)) in block.members.iter().zip(back_re.into_iter().zip(back_im)) {
                member.scatter(Complex64::new(r, i), &mut out);
            }
        }
        Ok(out)
    }
}
