use std::io::Write;

use num_complex::Complex64;

use crate::cancellation::basis::Variant;
use crate::cancellation::matrix::BlockTag;
use crate::error::{arg_err, Error, Result};

/// Estimated FIR taps for one receive chain, one vector of `m_taps` per block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimateSet {
    pub variant: Option<Variant>,
    pub calibrated: bool,
    pub n_samples: usize,
    pub m_taps: usize,
    pub tags: Vec<BlockTag>,
    pub taps: Vec<Vec<Complex64>>,
    /// Condition estimate of the solved system; 0 when not estimated.
    pub condition: f64,
}

impl ChannelEstimateSet {
    /// Split a stacked coefficient vector into per-block tap vectors.
    pub fn from_stacked(h: &[Complex64], tags: &[BlockTag], m_taps: usize, n_samples: usize) -> Result<Self> {
        if h.len() != tags.len() * m_taps {
            return Err(arg_err(format!("{} coefficients for {} blocks of {m_taps} taps", h.len(), tags.len())));
        }
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(arg_err("estimate contains non-finite coefficients"));
        }
        Ok(Self {
            variant: None,
            calibrated: false,
            n_samples,
            m_taps,
            tags: tags.to_vec(),
            taps: h.chunks(m_taps).map(<[Complex64]>::to_vec).collect(),
            condition: 0.0,
        })
    }

    pub fn zeros(tags: &[BlockTag], m_taps: usize) -> Self {
        Self {
            variant: None,
            calibrated: false,
            n_samples: 0,
            m_taps,
            tags: tags.to_vec(),
            taps: vec![vec![Complex64::new(0.0, 0.0); m_taps]; tags.len()],
            condition: 0.0,
        }
    }

    pub fn coefficient_count(&self) -> usize {
        self.taps.iter().map(Vec::len).sum()
    }

    pub fn stacked(&self) -> Vec<Complex64> {
        self.taps.concat()
    }

    /// Position of block `b` among the blocks of its branch.
    fn basis_index(&self, b: usize) -> usize {
        let branch = self.tags[b].branch;
        self.tags[..b].iter().filter(|t| t.branch == branch).count()
    }
}

pub const ESTIMATE_CSV_HEADER: [&str; 6] = ["rx", "tx", "basis", "lag", "re", "im"];

/// One coefficient per row; the RX index is the set's position in `sets`.
pub fn write_estimates_csv<W: Write>(out: W, sets: &[ChannelEstimateSet]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(ESTIMATE_CSV_HEADER)?;
    for (rx, set) in sets.iter().enumerate() {
        for (b, (tag, taps)) in set.tags.iter().zip(&set.taps).enumerate() {
            let basis = set.basis_index(b);
            for (lag, z) in taps.iter().enumerate() {
                w.write_record([
                    rx.to_string(),
                    tag.branch.to_string(),
                    basis.to_string(),
                    lag.to_string(),
                    z.re.to_string(),
                    z.im.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::Io { path: "<estimate csv>".into(), source: e })
}
