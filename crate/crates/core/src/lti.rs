//! Linear time-invariant systems `ẋ = A x + B u` with a pool of candidate actuator columns.
//!
//! An [`LtiSystem`] holds a stable dynamics matrix, an optional pre-existing input matrix `B₀`
//! and an ordered list of [`CandidateActuator`]s. Selecting a subset `S` of candidates forms the
//! input matrix `B_S = [B₀ b_s …]`.
//!
//! Systems are read from either a JSON document or a pair of CSV files (see [`SystemFormat`]).

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Systems whose spectral abscissa is not below `-STABILITY_TOL` are rejected.
pub const STABILITY_TOL: f64 = 1e-10;

/// Default shift used by [`random_stable_system`].
pub const DEFAULT_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateActuator {
    pub id: String,
    pub column: DVector<f64>,
}

impl CandidateActuator {
    pub fn new(id: impl Into<String>, column: DVector<f64>) -> Self {
        Self { id: id.into(), column }
    }
}

/// A validated, immutable LTI system with a candidate actuator pool.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: DMatrix<f64>,
    base: DMatrix<f64>,
    candidates: Vec<CandidateActuator>,
    abscissa: f64,
}

impl LtiSystem {
    /// Validates dimensions, stability, candidate uniqueness and non-zero columns.
    ///
    /// `base` may have zero columns; its row count must still equal `n`.
    pub fn new(
        a: DMatrix<f64>,
        base: DMatrix<f64>,
        candidates: Vec<CandidateActuator>,
    ) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "dynamics matrix must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if base.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B0 has {} rows, expected {n}",
                base.nrows()
            )));
        }
        if a.iter().chain(base.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        let mut seen = HashSet::new();
        for c in &candidates {
            if c.column.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "candidate `{}` has length {}, expected {n}",
                    c.id,
                    c.column.len()
                )));
            }
            if c.column.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse(format!("candidate `{}` has a non-finite entry", c.id)));
            }
            if !seen.insert(c.id.as_str()) {
                return Err(Error::DuplicateCandidate(c.id.clone()));
            }
            if c.column.iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroColumn(c.id.clone()));
            }
        }
        let abscissa = spectral_abscissa(&a);
        if !(abscissa < -STABILITY_TOL) {
            return Err(Error::Unstable { abscissa });
        }
        Ok(Self { a, base, candidates, abscissa })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Pre-existing input matrix `B₀` (n×m₀, possibly with zero columns).
    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn candidates(&self) -> &[CandidateActuator] {
        &self.candidates
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn abscissa(&self) -> f64 {
        self.abscissa
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.id == id)
    }

    pub fn id(&self, index: usize) -> &str {
        &self.candidates[index].id
    }

    /// `B_S = [B₀ b_s …]` for the given candidate indices, in the given order.
    pub fn input_matrix(&self, selection: &[usize]) -> DMatrix<f64> {
        let n = self.n();
        let m0 = self.base.ncols();
        let mut b = DMatrix::zeros(n, m0 + selection.len());
        b.columns_mut(0, m0).copy_from(&self.base);
        for (j, &s) in selection.iter().enumerate() {
            b.set_column(m0 + j, &self.candidates[s].column);
        }
        b
    }

    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let file: SystemFile = serde_json::from_reader(reader)?;
        file.into_system()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_reader(s.as_bytes())
    }

    pub fn to_json_writer<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &SystemFile::from_system(self))?;
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&SystemFile::from_system(self))
            .expect("system file serialization is infallible")
    }

    /// Reads the CSV-pair format: `A` as `n` lines of `n` numbers, candidates as a header line
    /// of ids followed by `n` rows holding one column per candidate.
    pub fn from_csv_pair<R1: Read, R2: Read>(a_reader: R1, candidate_reader: R2) -> Result<Self> {
        let rows = read_csv_rows(a_reader, false)?.1;
        let a = rows_to_matrix(&rows)?;
        let (header, rows) = read_csv_rows(candidate_reader, true)?;
        let header = header.unwrap_or_default();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(Error::DimensionMismatch(format!(
                    "candidate row {} has {} fields, header has {}",
                    i + 1,
                    row.len(),
                    header.len()
                )));
            }
        }
        let candidates = header
            .into_iter()
            .enumerate()
            .map(|(j, id)| {
                CandidateActuator::new(id, DVector::from_iterator(rows.len(), rows.iter().map(|r| r[j])))
            })
            .collect();
        let n = a.nrows();
        Self::new(a, DMatrix::zeros(n, 0), candidates)
    }

    /// Writes the CSV-pair format. `B₀` has no representation there and must be empty.
    pub fn to_csv_pair<W1: Write, W2: Write>(&self, a_writer: W1, candidate_writer: W2) -> Result<()> {
        if self.base.ncols() > 0 {
            return Err(Error::InvalidArgument(
                "the CSV-pair format cannot hold a pre-existing input matrix".into(),
            ));
        }
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(a_writer);
        for i in 0..self.n() {
            w.write_record(self.a.row(i).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_writer(candidate_writer);
        w.write_record(self.candidates.iter().map(|c| c.id.as_str()))?;
        for i in 0..self.n() {
            w.write_record(self.candidates.iter().map(|c| c.column[i].to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// On-disk representation of a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemFormat {
    Json,
    CsvPair,
}

/// Loads a system from `path`. For [`SystemFormat::CsvPair`] the path names the `A` file and
/// `candidates_path` the candidate file.
pub fn load_system(path: &Path, format: SystemFormat, candidates_path: Option<&Path>) -> Result<LtiSystem> {
    match format {
        SystemFormat::Json => LtiSystem::from_json_reader(std::io::BufReader::new(std::fs::File::open(path)?)),
        SystemFormat::CsvPair => {
            let cpath = candidates_path.ok_or_else(|| {
                Error::InvalidArgument("CSV-pair format needs a candidate file".into())
            })?;
            LtiSystem::from_csv_pair(std::fs::File::open(path)?, std::fs::File::open(cpath)?)
        }
    }
}

/// Reads the JSON format as `(A, B₀, candidates)` with shape checks only. `A` may be unstable,
/// as finite-horizon problems allow.
pub fn read_unchecked_json<R: Read>(reader: R) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<CandidateActuator>)> {
    let file: SystemFile = serde_json::from_reader(reader)?;
    file.into_parts()
}

pub fn save_system(system: &LtiSystem, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    system.to_json_writer(&mut f)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct CandidateFile {
    id: String,
    column: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SystemFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B0", default, skip_serializing_if = "Vec::is_empty")]
    b0: Vec<Vec<f64>>,
    #[serde(default)]
    candidates: Vec<CandidateFile>,
}

impl SystemFile {
    fn from_system(sys: &LtiSystem) -> Self {
        Self {
            a: (0..sys.n()).map(|i| sys.a.row(i).iter().copied().collect()).collect(),
            b0: sys.base.column_iter().map(|c| c.iter().copied().collect()).collect(),
            candidates: sys
                .candidates
                .iter()
                .map(|c| CandidateFile { id: c.id.clone(), column: c.column.iter().copied().collect() })
                .collect(),
        }
    }

    fn into_system(self) -> Result<LtiSystem> {
        let (a, base, candidates) = self.into_parts()?;
        LtiSystem::new(a, base, candidates)
    }

    fn into_parts(self) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<CandidateActuator>)> {
        let a = rows_to_matrix(&self.a)?;
        let n = a.nrows();
        let mut base = DMatrix::zeros(n, self.b0.len());
        for (j, col) in self.b0.iter().enumerate() {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "B0 column {j} has length {}, expected {n}",
                    col.len()
                )));
            }
            base.set_column(j, &DVector::from_column_slice(col));
        }
        let candidates = self
            .candidates
            .into_iter()
            .map(|c| CandidateActuator::new(c.id, DVector::from_vec(c.column)))
            .collect::<Vec<_>>();
        if let Some(c) = candidates.iter().find(|c| c.column.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "candidate `{}` has length {}, expected {n}",
                c.id,
                c.column.len()
            )));
        }
        Ok((a, base, candidates))
    }
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("dynamics matrix has no rows".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "row {i} of A has {} entries, expected {n}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

type CsvRows = (Option<Vec<String>>, Vec<Vec<f64>>);

fn read_csv_rows<R: Read>(reader: R, headers: bool) -> Result<CsvRows> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(headers)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = if headers {
        Some(rdr.headers()?.iter().map(str::to_owned).collect())
    } else {
        None
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("`{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Largest real part over the eigenvalues of a square matrix.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    assert!(a.is_square(), "spectral abscissa needs a square matrix");
    if a.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Random stable system `A = G − (α(G) + margin)·I`, with `G` standard normal and candidates
/// `e₁ … e_{num_candidates}`. The same `(n, num_candidates, seed, margin)` always gives the
/// same system.
pub fn random_stable_system(n: usize, num_candidates: usize, seed: u64, margin: f64) -> Result<LtiSystem> {
    if n == 0 {
        return Err(Error::InvalidArgument("state dimension must be positive".into()));
    }
    if !(margin > 0.0) {
        return Err(Error::InvalidArgument(format!("margin must be positive, got {margin}")));
    }
    if num_candidates > n {
        return Err(Error::InvalidArgument(format!(
            "at most {n} unit-vector candidates exist, {num_candidates} requested"
        )));
    }
    let g = random_gaussian_matrix(n, seed);
    let alpha = spectral_abscissa(&g);
    let mut a = g;
    for i in 0..n {
        a[(i, i)] = (a[(i, i)] - alpha) - margin;
    }
    let candidates = unit_candidates(n, num_candidates);
    LtiSystem::new(a, DMatrix::zeros(n, 0), candidates)
}

/// `e₁ … e_count` in ℝⁿ with ids `e1 … e{count}`.
pub fn unit_candidates(n: usize, count: usize) -> Vec<CandidateActuator> {
    (0..count)
        .map(|i| {
            let mut col = DVector::zeros(n);
            col[i] = 1.0;
            CandidateActuator::new(format!("e{}", i + 1), col)
        })
        .collect()
}

/// Row-major standard-normal matrix from a ChaCha8 stream seeded with `seed`.
pub fn random_gaussian_matrix(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    DMatrix::from_row_slice(n, n, &entries)
}
