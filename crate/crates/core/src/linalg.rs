//! Dense complex matrices and the random ensembles the sampler is built on.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pattern::PhotonPattern;
use crate::rng::RandomStream;

/// Square complex matrix stored row-major.
///
/// When `symmetric` is set the entries are bit-identical across the diagonal;
/// the symmetric constructors mirror the upper triangle to guarantee it.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    symmetric: bool,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
            symmetric: true,
        }
    }

    /// General matrix from row-major entries. The symmetry flag is set only
    /// if the entries already happen to be exactly symmetric.
    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        let mut m = Self {
            dim,
            entries,
            symmetric: false,
        };
        m.symmetric = m.is_exactly_symmetric();
        Ok(m)
    }

    /// Symmetric matrix from row-major entries; the lower triangle is
    /// overwritten with the upper one.
    pub fn symmetric_from_upper(dim: usize, mut entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                entries[i * dim + j] = entries[j * dim + i];
            }
        }
        Ok(Self {
            dim,
            entries,
            symmetric: true,
        })
    }

    /// Builds a matrix entry by entry; the result is flagged symmetric if it is.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        let mut m = Self {
            dim,
            entries,
            symmetric: false,
        };
        m.symmetric = m.is_exactly_symmetric();
        m
    }

    /// Real 0/1 adjacency matrix of an undirected simple graph.
    pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::invalid(format!("bad edge ({a}, {b}) for {n} vertices")));
            }
            entries[a * n + b] = Complex64::new(1.0, 0.0);
            entries[b * n + a] = Complex64::new(1.0, 0.0);
        }
        Ok(Self {
            dim: n,
            entries,
            symmetric: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * c).collect(),
            symmetric: self.symmetric,
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::invalid("matmul dimension mismatch"));
        }
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                for j in 0..n {
                    out[i * n + j] += a * other.get(l, j);
                }
            }
        }
        ComplexMatrix::from_row_major(n, out)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        })
    }

    /// Same matrix with rows and columns reordered: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.dim];
        if perm.len() != self.dim || perm.iter().any(|&p| p >= self.dim || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("not a permutation of the matrix indices"));
        }
        Ok(Self::from_fn(self.dim, |i, j| self.get(perm[i], perm[j])))
    }

    fn is_exactly_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({0}x{0}, symmetric={1})", self.dim, self.symmetric)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| format!("{:.4}", self.get(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// On-disk layout: `{dim, symmetric, entries: [[re, im], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    dim: usize,
    symmetric: bool,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile {
            dim: self.dim,
            symmetric: self.symmetric,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixFile::deserialize(d)?;
        let entries = raw.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let m = ComplexMatrix::from_row_major(raw.dim, entries).map_err(D::Error::custom)?;
        if raw.symmetric && !m.symmetric {
            return Err(D::Error::custom("matrix flagged symmetric but entries are not"));
        }
        Ok(m)
    }
}

/// Squeezing parameter `r` shared by all `n` input modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSpec {
    pub r: f64,
    pub n: usize,
}

impl SqueezingSpec {
    pub fn new(r: f64, n: usize) -> Result<Self> {
        let spec = Self { r, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::invalid(format!("squeezing r = {} must be finite and >= 0", self.r)));
        }
        if self.n == 0 {
            return Err(Error::invalid("mode count must be >= 1"));
        }
        Ok(())
    }
}

/// Circular complex normal with `E|z|^2 = sigma^2` (each part has variance `sigma^2 / 2`).
pub fn complex_normal(rng: &mut RandomStream, sigma: f64) -> Complex64 {
    let s = sigma * std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Haar-distributed `n x n` unitary.
///
/// Orthonormalizes the columns of a complex Ginibre matrix by Gram–Schmidt
/// (run twice per column for numerical orthogonality). The implied QR factor
/// has a real positive diagonal, which is exactly the phase fixing that makes
/// `Q` Haar rather than merely unitary.
pub fn haar_unitary(n: usize, rng: &mut RandomStream) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::invalid("haar_unitary needs n >= 1"));
    }
    // columns[c][row]
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..n).map(|_| complex_normal(rng, 1.0)).collect())
        .collect();
    for c in 0..n {
        for _pass in 0..2 {
            for p in 0..c {
                let proj: Complex64 = cols[p].iter().zip(&cols[c]).map(|(q, v)| q.conj() * v).sum();
                let (done, rest) = cols.split_at_mut(c);
                for (v, q) in rest[0].iter_mut().zip(&done[p]) {
                    *v -= proj * q;
                }
            }
        }
        let norm = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("degenerate Ginibre draw"));
        }
        for v in cols[c].iter_mut() {
            *v /= norm;
        }
    }
    Ok(ComplexMatrix::from_fn(n, |i, j| cols[j][i]))
}

/// `B = tanh(r) · U Uᵗ` with `U` Haar: a scaled COE matrix, flagged symmetric.
pub fn coe_matrix(spec: SqueezingSpec, rng: &mut RandomStream) -> Result<ComplexMatrix> {
    spec.validate()?;
    let n = spec.n;
    let u = haar_unitary(n, rng)?;
    let t = spec.r.tanh();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let s: Complex64 = (0..n).map(|l| u.get(i, l) * u.get(j, l)).sum();
            entries[i * n + j] = s * t;
        }
    }
    ComplexMatrix::symmetric_from_upper(n, entries)
}

/// Symmetric `k x k` matrix whose upper triangle (diagonal included) is
/// i.i.d. circular complex normal with `E|z|^2 = sigma^2`.
pub fn gaussian_symmetric(k: usize, sigma: f64, rng: &mut RandomStream) -> Result<ComplexMatrix> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::invalid(format!("gaussian_symmetric needs an even k >= 2, got {k}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma = {sigma} must be positive")));
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        for j in i..k {
            entries[i * k + j] = complex_normal(rng, sigma);
        }
    }
    ComplexMatrix::symmetric_from_upper(k, entries)
}

/// Rows and columns of `b` selected by `s`, in ascending index order.
pub fn submatrix(b: &ComplexMatrix, s: &PhotonPattern) -> Result<ComplexMatrix> {
    if s.n() != b.dim() {
        return Err(Error::invalid(format!(
            "pattern over {} modes for a {}x{} matrix",
            s.n(),
            b.dim(),
            b.dim()
        )));
    }
    let idx = s.indices();
    Ok(submatrix_by_indices(b, &idx))
}

pub(crate) fn submatrix_by_indices(b: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    let k = idx.len();
    let mut entries = Vec::with_capacity(k * k);
    for &i in idx {
        for &j in idx {
            entries.push(b.get(i, j));
        }
    }
    ComplexMatrix {
        dim: k,
        entries,
        symmetric: b.symmetric,
    }
}
