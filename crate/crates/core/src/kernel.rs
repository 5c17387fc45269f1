//! Transient diffusion kernels `{I, P, P^2, ..., P^H}` under no, pre-, or
//! post-thresholding, with stored-entry accounting.
//!
//! Pre-thresholding drops small transition probabilities before taking
//! powers, so every hop stays sparse: a row of `threshold(P, s)` holds at
//! most `floor(1/s)` entries because the row sums to at most one, and the
//! bound multiplies hop by hop. Post-thresholding takes exact powers first
//! and thresholds each one afterwards; the slices it keeps are sparse but the
//! dense intermediates cost `N^2` entries, which the ledger records.
//!
//! The ledger counts stored entries (index/value pairs), not bytes.

use std::cell::Cell;
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, DenseMatrix, RowAccumulator};

/// Tolerance on transition-matrix row sums.
const ROW_SUM_TOLERANCE: f64 = 1e-9;

thread_local! {
    static KERNELS_BUILT: Cell<usize> = const { Cell::new(0) };
}

/// Number of kernels built on the current thread so far.
pub fn kernels_built() -> usize {
    KERNELS_BUILT.with(Cell::get)
}

/// How the power series is sparsified.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", content = "threshold", rename_all = "lowercase")]
pub enum KernelMode {
    None,
    /// Threshold the transition matrix, then take powers.
    Pre(f64),
    /// Take exact powers, then threshold each one.
    Post(f64),
}

impl KernelMode {
    pub fn name(&self) -> &'static str {
        match self {
            KernelMode::None => "none",
            KernelMode::Pre(_) => "pre",
            KernelMode::Post(_) => "post",
        }
    }

    pub fn threshold(&self) -> f64 {
        match *self {
            KernelMode::None => 0.0,
            KernelMode::Pre(t) | KernelMode::Post(t) => t,
        }
    }
}

impl fmt::Display for KernelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelMode::None => f.write_str("none"),
            KernelMode::Pre(t) => write!(f, "pre({t})"),
            KernelMode::Post(t) => write!(f, "post({t})"),
        }
    }
}

/// Stored-entry counts gathered while building a kernel.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct MemoryLedger {
    pub per_slice_nnz: Vec<usize>,
    /// Most entries held at once during construction, including dense
    /// intermediates and the product's scratch row.
    pub peak_stored_entries: usize,
    /// `N^2 (H+1)`: what a dense kernel would hold.
    pub dense_equivalent_entries: usize,
}

impl MemoryLedger {
    pub fn total_nnz(&self) -> usize {
        self.per_slice_nnz.iter().sum()
    }
}

/// Tracks live and peak entry counts during construction.
#[derive(Debug, Default)]
struct PeakTracker {
    live: usize,
    peak: usize,
}

impl PeakTracker {
    fn observe(&mut self, transient: usize) {
        self.peak = self.peak.max(self.live + transient);
    }

    fn retain(&mut self, entries: usize) {
        self.live += entries;
        self.observe(0);
    }
}

/// The stacked hop matrices plus construction ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionKernel {
    n_nodes: usize,
    mode: KernelMode,
    slices: Vec<CsrMatrix>,
    ledger: MemoryLedger,
}

fn check_inputs(p: &CsrMatrix, threshold: f64) -> Result<()> {
    if !p.is_square() {
        return Err(Error::input(format!(
            "transition matrix must be square, got {}x{}",
            p.n_rows(),
            p.n_cols()
        )));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::input(format!(
            "threshold must lie in [0, 1], got {threshold}"
        )));
    }
    if p.values().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::input("transition probabilities must lie in [0, 1]"));
    }
    if let Some((i, s)) = p
        .row_sums()
        .into_iter()
        .enumerate()
        .find(|(_, s)| *s > 1.0 + ROW_SUM_TOLERANCE)
    {
        return Err(Error::input(format!(
            "row {i} of the transition matrix sums to {s} > 1"
        )));
    }
    Ok(())
}

impl DiffusionKernel {
    /// Builds the kernel for `mode`. [`KernelMode::None`] shares the
    /// pre-threshold path with a zero threshold.
    pub fn build(p: &CsrMatrix, mode: KernelMode, n_hops: usize) -> Result<Self> {
        match mode {
            KernelMode::None => {
                let mut k = Self::build_pre(p, 0.0, n_hops)?;
                k.mode = KernelMode::None;
                Ok(k)
            }
            KernelMode::Pre(sigma) => Self::build_pre(p, sigma, n_hops),
            KernelMode::Post(rho) => Self::build_post(p, rho, n_hops),
        }
    }

    /// Thresholds `p` at `sigma` and multiplies the result into itself,
    /// `Pbar^(j+1) = Pbar^j * Pbar`, never leaving sparse storage.
    pub fn build_pre(p: &CsrMatrix, sigma: f64, n_hops: usize) -> Result<Self> {
        check_inputs(p, sigma)?;
        let n = p.n_rows();
        let mut tracker = PeakTracker::default();
        let mut slices = Vec::with_capacity(n_hops + 1);

        slices.push(CsrMatrix::identity(n));
        tracker.retain(n);
        if n_hops >= 1 {
            let p_bar = p.threshold(sigma)?;
            tracker.retain(p_bar.nnz());
            slices.push(p_bar);
        }
        let mut workspace = RowAccumulator::new(n);
        for _ in 2..=n_hops {
            let next = slices
                .last()
                .expect("at least two slices")
                .matmul_with(&slices[1], &mut workspace)?;
            tracker.observe(next.nnz() + workspace.width());
            tracker.retain(next.nnz());
            slices.push(next);
        }

        KERNELS_BUILT.with(|c| c.set(c.get() + 1));
        Ok(Self::assemble(n, KernelMode::Pre(sigma), slices, tracker.peak))
    }

    /// Computes each exact power densely, `P^(j+1) = P^j * P`, and keeps only
    /// entries `>= rho` of each.
    pub fn build_post(p: &CsrMatrix, rho: f64, n_hops: usize) -> Result<Self> {
        check_inputs(p, rho)?;
        let n = p.n_rows();
        let mut tracker = PeakTracker::default();
        let mut slices = Vec::with_capacity(n_hops + 1);

        slices.push(CsrMatrix::identity(n));
        tracker.retain(n);
        if n_hops >= 1 {
            let first = p.threshold(rho)?;
            tracker.retain(first.nnz());
            slices.push(first);
        }
        if n_hops >= 2 {
            let dense_entries = n * n;
            let mut power = p.to_dense();
            tracker.observe(dense_entries);
            for _ in 2..=n_hops {
                let next = power.matmul_sparse(p)?;
                tracker.observe(2 * dense_entries);
                let kept = CsrMatrix::from_dense(&next).threshold(rho)?;
                tracker.observe(dense_entries + kept.nnz());
                tracker.retain(kept.nnz());
                slices.push(kept);
                power = next;
            }
        }

        KERNELS_BUILT.with(|c| c.set(c.get() + 1));
        Ok(Self::assemble(n, KernelMode::Post(rho), slices, tracker.peak))
    }

    fn assemble(n: usize, mode: KernelMode, slices: Vec<CsrMatrix>, peak: usize) -> Self {
        let ledger = MemoryLedger {
            per_slice_nnz: slices.iter().map(CsrMatrix::nnz).collect(),
            peak_stored_entries: peak,
            dense_equivalent_entries: n * n * slices.len(),
        };
        Self {
            n_nodes: n,
            mode,
            slices,
            ledger,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_hops(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    pub fn slices(&self) -> &[CsrMatrix] {
        &self.slices
    }

    pub fn slice(&self, hop: usize) -> &CsrMatrix {
        &self.slices[hop]
    }

    pub fn ledger(&self) -> &MemoryLedger {
        &self.ledger
    }

    /// Fraction of non-zero entries across all `H+1` slices.
    pub fn density(&self) -> f64 {
        if self.n_nodes == 0 {
            return 0.0;
        }
        self.ledger.total_nnz() as f64 / self.ledger.dense_equivalent_entries as f64
    }

    /// Largest stored-entry count in any single row of hop `hop`.
    pub fn max_row_nnz(&self, hop: usize) -> usize {
        let s = &self.slices[hop];
        (0..s.n_rows()).map(|i| s.row_nnz(i)).max().unwrap_or(0)
    }

    /// Stacks `slice[j] * X` for every hop.
    pub fn diffuse_features(&self, x: &DenseMatrix) -> Result<DiffusedFeatures> {
        if x.n_rows() != self.n_nodes {
            return Err(Error::input(format!(
                "feature matrix has {} rows, kernel has {} nodes",
                x.n_rows(),
                self.n_nodes
            )));
        }
        let hops = self.slices.len();
        let f = x.n_cols();
        let mut values = vec![0.0; self.n_nodes * hops * f];
        for (j, slice) in self.slices.iter().enumerate() {
            let block = if j == 0 { x.clone() } else { slice.matmul_dense(x)? };
            for i in 0..self.n_nodes {
                let start = (i * hops + j) * f;
                values[start..start + f].copy_from_slice(block.row(i));
            }
        }
        Ok(DiffusedFeatures {
            n_nodes: self.n_nodes,
            n_hops: hops - 1,
            n_features: f,
            values,
        })
    }

    /// Ledger together with an analytic per-slice bound on stored entries.
    ///
    /// Hop 0 is bounded by `N`. Pre mode uses `min(N s^-j, N^2)`; post mode
    /// uses `min(N / r, N^2)` for every hop past zero; unthresholded kernels
    /// are bounded by `N^2`.
    pub fn memory_report(&self) -> MemoryReport {
        let n = self.n_nodes as f64;
        let dense = n * n;
        let bounds = (0..self.slices.len())
            .map(|j| match self.mode {
                _ if j == 0 => n,
                KernelMode::Pre(s) if s > 0.0 => (n * s.powi(-(j as i32))).min(dense),
                KernelMode::Post(r) if r > 0.0 => (n / r).min(dense),
                _ => dense,
            })
            .collect();
        MemoryReport {
            n_nodes: self.n_nodes,
            mode: self.mode,
            ledger: self.ledger.clone(),
            bounds,
        }
    }
}

/// `slice[j] * X` for every hop, laid out node-major, then hop, then feature.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusedFeatures {
    n_nodes: usize,
    n_hops: usize,
    n_features: usize,
    values: Vec<f64>,
}

impl DiffusedFeatures {
    pub fn from_vec(n_nodes: usize, n_hops: usize, n_features: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_nodes * (n_hops + 1) * n_features {
            return Err(Error::input("diffused feature tensor has the wrong length"));
        }
        Ok(Self {
            n_nodes,
            n_hops,
            n_features,
            values,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_hops(&self) -> usize {
        self.n_hops
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn get(&self, node: usize, hop: usize, feature: usize) -> f64 {
        self.values[(node * (self.n_hops + 1) + hop) * self.n_features + feature]
    }

    /// The `(H+1) * F` block for one node.
    pub fn node(&self, node: usize) -> &[f64] {
        let w = (self.n_hops + 1) * self.n_features;
        &self.values[node * w..(node + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// One line of the per-hop memory CSV.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MemoryRow {
    pub threshold: f64,
    pub mode: &'static str,
    pub hop: usize,
    pub nnz: usize,
    pub bound: f64,
    pub density: f64,
}

/// Ledger plus analytic bounds, one entry per hop.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryReport {
    pub n_nodes: usize,
    pub mode: KernelMode,
    pub ledger: MemoryLedger,
    pub bounds: Vec<f64>,
}

impl MemoryReport {
    pub fn rows(&self) -> Vec<MemoryRow> {
        let dense = (self.n_nodes * self.n_nodes).max(1) as f64;
        self.ledger
            .per_slice_nnz
            .iter()
            .zip(&self.bounds)
            .enumerate()
            .map(|(hop, (&nnz, &bound))| MemoryRow {
                threshold: self.mode.threshold(),
                mode: self.mode.name(),
                hop,
                nnz,
                bound,
                density: nnz as f64 / dense,
            })
            .collect()
    }

    /// Writes rows with a `threshold,mode,hop,nnz,bound,density` header.
    pub fn write_csv<W: Write>(reports: &[MemoryReport], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for report in reports {
            for row in report.rows() {
                w.serialize(row).map_err(csv_error)?;
            }
        }
        if reports.is_empty() {
            w.write_record(["threshold", "mode", "hop", "nnz", "bound", "density"])
                .map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Input(e.to_string()))
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::Input(format!("csv: {e}"))
}
