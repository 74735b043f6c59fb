use num_complex::Complex64;

use crate::cancellation::basis::BasisFunction;
use crate::error::{arg_err, Result};
use crate::waveform::ComplexSignal;

/// Which reference branch and basis function a column block holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockTag {
    pub branch: usize,
    pub basis: BasisFunction,
}

/// Windowed convolution matrix of one or more basis-expanded reference streams.
///
/// Row `r`, column `c` of block `j` is `s_j(M − 1 + r − c)`, so the matrix has
/// `N − M + 1` rows and row `r` regresses observation sample `M − 1 + r`. The
/// matrix is never materialized unless asked for; entries are read from the
/// expanded streams.
#[derive(Debug, Clone)]
pub struct RegressionMatrix {
    streams: Vec<Vec<Complex64>>,
    tags: Vec<BlockTag>,
    m_taps: usize,
}

impl RegressionMatrix {
    /// Blocks are ordered branch-major, then by basis function.
    pub fn build(refs: &[&[Complex64]], m_taps: usize, basis: &[BasisFunction]) -> Result<Self> {
        if refs.is_empty() || basis.is_empty() {
            return Err(arg_err("regression needs at least one reference and one basis function"));
        }
        if m_taps == 0 {
            return Err(arg_err("regression needs at least one tap"));
        }
        let n = refs[0].len();
        if refs.iter().any(|r| r.len() != n) {
            return Err(arg_err("reference streams differ in length"));
        }
        if n < m_taps {
            return Err(arg_err(format!("references have {n} samples, fewer than the {m_taps} taps")));
        }
        let mut streams = Vec::with_capacity(refs.len() * basis.len());
        let mut tags = Vec::with_capacity(streams.capacity());
        for (branch, r) in refs.iter().enumerate() {
            for b in basis {
                streams.push(b.expand(r));
                tags.push(BlockTag { branch, basis: *b });
            }
        }
        Ok(Self { streams, tags, m_taps })
    }

    pub fn from_signals(refs: &[ComplexSignal], m_taps: usize, basis: &[BasisFunction]) -> Result<Self> {
        let slices: Vec<&[Complex64]> = refs.iter().map(|s| s.samples()).collect();
        Self::build(&slices, m_taps, basis)
    }

    pub fn m_taps(&self) -> usize {
        self.m_taps
    }

    pub fn stream_len(&self) -> usize {
        self.streams[0].len()
    }

    pub fn n_rows(&self) -> usize {
        self.stream_len() - self.m_taps + 1
    }

    pub fn n_cols(&self) -> usize {
        self.streams.len() * self.m_taps
    }

    pub fn block_count(&self) -> usize {
        self.streams.len()
    }

    pub fn tags(&self) -> &[BlockTag] {
        &self.tags
    }

    pub fn stream(&self, block: usize) -> &[Complex64] {
        &self.streams[block]
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let (block, lag) = (col / self.m_taps, col % self.m_taps);
        self.streams[block][self.m_taps - 1 + row - lag]
    }

    /// Contiguous slice holding column `col` over all rows.
    pub fn column(&self, col: usize) -> &[Complex64] {
        let (block, lag) = (col / self.m_taps, col % self.m_taps);
        let start = self.m_taps - 1 - lag;
        &self.streams[block][start..start + self.n_rows()]
    }

    /// Column-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.n_cols()).map(|c| self.column(c).to_vec()).collect()
    }

    /// `X·h`.
    pub fn mul(&self, h: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(h.len(), self.n_cols());
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_rows()];
        for (c, &hc) in h.iter().enumerate() {
            if hc == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.column(c)) {
                *o += hc * x;
            }
        }
        out
    }

    /// `Xᴴ·v`.
    pub fn adjoint_mul(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n_rows());
        (0..self.n_cols()).map(|c| conj_dot(self.column(c), v)).collect()
    }

    /// `XᴴX`, row-major, filled by the shift recursion of the Toeplitz blocks.
    pub fn gram(&self) -> Vec<Complex64> {
        let m = self.m_taps;
        let k = self.n_cols();
        let rows = self.n_rows();
        let s = self.streams.len();
        let mut g = vec![Complex64::new(0.0, 0.0); k * k];
        // first row of every block pair: G[(a,0),(b,d)]
        for a in 0..s {
            let lead = self.column(a * m);
            for b in 0..s {
                for d in 0..m {
                    g[(a * m) * k + b * m + d] = conj_dot(lead, self.column(b * m + d));
                }
            }
        }
        for a in 0..s {
            for b in 0..s {
                for c in 1..m {
                    g[(a * m + c) * k + b * m] = g[(b * m) * k + a * m + c].conj();
                }
            }
        }
        for a in 0..s {
            let xa = &self.streams[a];
            for b in 0..s {
                let xb = &self.streams[b];
                for c in 0..m - 1 {
                    for d in 0..m - 1 {
                        let head = xa[m - 2 - c].conj() * xb[m - 2 - d];
                        let tail = xa[m - 2 - c + rows].conj() * xb[m - 2 - d + rows];
                        g[(a * m + c + 1) * k + b * m + d + 1] = g[(a * m + c) * k + b * m + d] + head - tail;
                    }
                }
            }
        }
        g
    }
}

/// `Σ conj(a_i)·b_i`.
pub(crate) fn conj_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re, im)
}
