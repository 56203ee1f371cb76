//! Datasets: the synthetic orthogonal-mixture generator, CSV I/O,
//! standardization and the train/tune/test split.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::orthonormalize;
use crate::{Error, Result};

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Synthetic {
        seed: u64,
        /// Mixing probabilities `p₁ … p_d`.
        spectrum: Vec<f64>,
        scale: f64,
        /// Columns `v₁ … v_d` of the generator's orthonormal basis.
        basis: Array2<f64>,
    },
    File(PathBuf),
    InMemory,
}

/// `n × d` sample matrix, one sample per row, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Array2<f64>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(rows: Array2<f64>, provenance: Provenance) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(Error::invalid("a dataset needs at least one row"));
        }
        if let Some(((r, c), v)) = rows.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite entry {v} at row {r}, column {c}")));
        }
        Ok(Dataset { rows, provenance })
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn spectrum(&self) -> Option<&[f64]> {
        match &self.provenance {
            Provenance::Synthetic { spectrum, .. } => Some(spectrum),
            _ => None,
        }
    }

    /// Rows in order, cycling forever. Bound it with `take`.
    pub fn stream(&self) -> SampleStream<'_> {
        SampleStream {
            rows: self.rows.view(),
            next: 0,
        }
    }

    fn with_rows(&self, rows: Array2<f64>) -> Dataset {
        Dataset {
            rows,
            provenance: self.provenance.clone(),
        }
    }
}

/// Endless cyclic iterator over a dataset's rows.
#[derive(Debug, Clone)]
pub struct SampleStream<'a> {
    rows: ArrayView2<'a, f64>,
    next: usize,
}

impl<'a> Iterator for SampleStream<'a> {
    type Item = ArrayView1<'a, f64>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.rows.nrows() == 0 {
            return None;
        }
        let i = self.next;
        self.next = (i + 1) % self.rows.nrows();
        Some(self.rows.index_axis_move(Axis(0), i))
    }
}

/// `pᵢ ∝ decayⁱ`, `i = 0 … d−1`, normalized to sum to one.
pub fn geometric_spectrum(dim: usize, decay: f64) -> Result<Vec<f64>> {
    if !decay.is_finite() || decay <= 0.0 {
        return Err(Error::invalid(format!("spectrum decay must be positive, got {decay}")));
    }
    let raw: Vec<f64> = (0..dim).map(|i| decay.powi(i as i32)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|p| p / total).collect())
}

/// Samples from a mixture over a seeded random orthonormal basis
/// `{v₁ … v_d}`: each row is `s·scale·√d·vᵢ` with `i ~ spectrum` and a
/// uniform sign `s`. Rows are pairwise orthogonal or parallel, and the
/// population second moment is `d·scale²·V·diag(p)·Vᵀ`, so the optimal
/// subspace is `span(v₁ … v_k)` for a decreasing spectrum.
pub fn generate_orthogonal(n: usize, dim: usize, spectrum: &[f64], scale: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || dim == 0 {
        return Err(Error::invalid("n and d must be positive"));
    }
    if spectrum.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: spectrum.len(),
        });
    }
    if spectrum.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid("spectrum entries must be nonnegative"));
    }
    let total: f64 = spectrum.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("spectrum sums to {total}, not 1")));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::invalid(format!("scale must be positive, got {scale}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = Array2::from_shape_simple_fn((dim, dim), || StandardNormal.sample(&mut rng));
    let basis = orthonormalize(gauss.view())?;
    let pick = WeightedIndex::new(spectrum).map_err(|e| Error::invalid(format!("invalid spectrum: {e}")))?;
    let magnitude = scale * (dim as f64).sqrt();

    let mut rows = Array2::zeros((n, dim));
    for mut row in rows.rows_mut() {
        let i = pick.sample(&mut rng);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        row.scaled_add(sign * magnitude, &basis.column(i));
    }
    Dataset::new(
        rows,
        Provenance::Synthetic {
            seed,
            spectrum: spectrum.to_vec(),
            scale,
            basis,
        },
    )
}

/// Per-column standardization parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Array1<f64>,
    /// Divisors; zero-variance columns use 1.
    pub std: Array1<f64>,
}

impl Normalization {
    /// Column means and population standard deviations. A column whose
    /// entries are all equal gets divisor 1.
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.n() < 2 {
            return Err(Error::invalid("normalization needs at least two rows"));
        }
        let n = data.n() as f64;
        let mut mean = Array1::zeros(data.dim());
        let mut std = Array1::ones(data.dim());
        for (j, col) in data.rows.axis_iter(Axis(1)).enumerate() {
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                mean[j] = first;
                continue;
            }
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean[j] = m;
            std[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Ok(Normalization { mean, std })
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        crate::spectral::check_dim(self.mean.len(), data.dim())?;
        let rows = (&data.rows - &self.mean.view().insert_axis(Axis(0))) / self.std.view().insert_axis(Axis(0));
        Ok(data.with_rows(rows))
    }
}

/// Standardizes every column; returns the transform for reuse on held-out
/// data.
pub fn normalize(data: &Dataset) -> Result<(Dataset, Array1<f64>, Array1<f64>)> {
    let norm = Normalization::fit(data)?;
    let out = norm.apply(data)?;
    Ok((out, norm.mean, norm.std))
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub tune: Dataset,
    pub test: Dataset,
    pub fractions: [f64; 3],
}

pub const DEFAULT_FRACTIONS: [f64; 3] = [0.7, 0.15, 0.15];

/// Seeded permutation, then a contiguous cut into train/tune/test. Train and
/// tune sizes are `round(f·n)`; test takes the remainder.
pub fn split(data: &Dataset, fractions: [f64; 3], seed: u64) -> Result<Split> {
    if fractions.iter().any(|f| f.is_nan() || *f <= 0.0) {
        return Err(Error::invalid(format!(
            "split fractions must be positive, got {fractions:?}"
        )));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("split fractions sum to {total}, not 1")));
    }
    let n = data.n();
    let n_train = (fractions[0] * n as f64).round() as usize;
    let n_tune = (fractions[1] * n as f64).round() as usize;
    if n_train == 0 || n_tune == 0 || n_train + n_tune >= n {
        return Err(Error::invalid(format!(
            "splitting {n} rows by {fractions:?} leaves an empty part"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |idx: &[usize]| data.with_rows(data.rows.select(Axis(0), idx));
    Ok(Split {
        train: take(&perm[..n_train]),
        tune: take(&perm[n_train..n_train + n_tune]),
        test: take(&perm[n_train + n_tune..]),
        fractions,
    })
}

/// Comma-separated values, one sample per row, optional header line
/// `x0,x1,…`. Floats are written in shortest round-trip form.
pub fn save_csv(data: &Dataset, path: &Path, header: bool) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv(data, &mut out, header)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv<W: Write>(data: &Dataset, out: W, header: bool) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        wtr.write_record((0..data.dim()).map(|j| format!("x{j}")))?;
    }
    for row in data.rows.rows() {
        wtr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_csv(path: &Path, header: bool) -> Result<Dataset> {
    let file = File::open(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let parse_err = |row: usize, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };

    let mut values = Vec::new();
    let mut width = None;
    let mut n = 0;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1 + usize::from(header);
        let rec = rec?;
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(parse_err(
                    line,
                    rec.len().min(w) + 1,
                    format!("expected {w} fields, found {}", rec.len()),
                ));
            }
            _ => {}
        }
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(line, j + 1, format!("'{cell}' is not a number")))?;
            values.push(v);
        }
        n += 1;
    }
    let d = width.ok_or_else(|| parse_err(1, 1, "file has no data rows".into()))?;
    let rows = Array2::from_shape_vec((n, d), values).map_err(|e| Error::invalid(e.to_string()))?;
    Dataset::new(rows, Provenance::File(path.to_path_buf()))
}
