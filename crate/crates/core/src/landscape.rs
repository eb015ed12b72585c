//! NK task environments.
//!
//! A [`Landscape`] stores one lookup table per decision. The table for
//! decision `j` has `2^(K_j + 1)` entries and is indexed by the bits of
//! `d_j` and its dependencies: the decision's own bit is the most
//! significant bit, followed by the dependency bits in ascending decision
//! index order. For `j = 1` depending on `{0, 4}` the index is
//! `d_1 << 2 | d_0 << 1 | d_4`.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which the global optimum is computed by enumeration.
pub const ENUMERATION_LIMIT: usize = 25;

/// Stylized interaction structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    /// Block-diagonal, blocks of three, `K = 2`.
    DecomposableK2,
    /// Two block-mates plus three decisions from other blocks, `K = 5`.
    NondecomposableK5,
}

impl StructureKind {
    pub fn short_name(self) -> &'static str {
        match self {
            StructureKind::DecomposableK2 => "k2",
            StructureKind::NondecomposableK5 => "k5",
        }
    }
}

/// `n x n` dependency grid. Entry `(j, i)` is true when the contribution of
/// decision `j` depends on decision `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InteractionMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl InteractionMatrix {
    /// Builds a matrix from row-major entries; the diagonal must be set.
    pub fn new(n: usize, entries: Vec<bool>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structure("matrix must have at least one decision".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Structure(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(j) = (0..n).find(|&j| !entries[j * n + j]) {
            return Err(Error::Structure(format!("diagonal entry ({j}, {j}) must be 1")));
        }
        Ok(InteractionMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        if let Some((j, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Structure(format!(
                "row {j} has {} columns, expected {n}",
                row.len()
            )));
        }
        Self::new(n, rows.concat())
    }

    /// Matrix with no interactions at all (`K = 0`).
    pub fn identity(n: usize) -> Result<Self> {
        Self::from_dependencies(n, &vec![Vec::new(); n])
    }

    /// Builds a matrix from per-decision dependency lists (self excluded).
    pub fn from_dependencies(n: usize, deps: &[Vec<usize>]) -> Result<Self> {
        if deps.len() != n {
            return Err(Error::Structure(format!(
                "expected {n} dependency lists, got {}",
                deps.len()
            )));
        }
        let mut entries = vec![false; n * n];
        for (j, row) in deps.iter().enumerate() {
            entries[j * n + j] = true;
            for &i in row {
                if i >= n {
                    return Err(Error::Structure(format!(
                        "decision {j} depends on out-of-range decision {i}"
                    )));
                }
                entries[j * n + i] = true;
            }
        }
        Self::new(n, entries)
    }

    /// Builds one of the stylized structures from contiguous blocks.
    ///
    /// The non-decomposable pattern gives decision `j` its two block-mates
    /// plus `(j + 3) mod n`, `(j + 6) mod n` and `(j + 9) mod n`; a candidate
    /// that falls inside `j`'s own block or was already chosen is advanced to
    /// the next index (cyclically) until it lands on a free outside decision.
    pub fn stylized(kind: StructureKind, n: usize, block_size: usize) -> Result<Self> {
        if block_size != 3 {
            return Err(Error::Structure(format!(
                "stylized structures use blocks of 3 decisions, got {block_size}"
            )));
        }
        if n == 0 || !n.is_multiple_of(block_size) {
            return Err(Error::Structure(format!(
                "n = {n} is not divisible by block size {block_size}"
            )));
        }
        let block_of = |d: usize| d / block_size;
        let mut deps = Vec::with_capacity(n);
        for j in 0..n {
            let mut row: Vec<usize> = (0..n)
                .filter(|&i| i != j && block_of(i) == block_of(j))
                .collect();
            if kind == StructureKind::NondecomposableK5 {
                if n - block_size < 3 {
                    return Err(Error::Structure(format!(
                        "k5 structure needs at least 3 decisions outside each block; n = {n}"
                    )));
                }
                for offset in [3, 6, 9] {
                    let mut c = (j + offset) % n;
                    while block_of(c) == block_of(j) || row.contains(&c) {
                        c = (c + 1) % n;
                    }
                    row.push(c);
                }
            }
            row.sort_unstable();
            deps.push(row);
        }
        Self::from_dependencies(n, &deps)
    }

    /// Parses the plain-text matrix format: first line `n`, then `n` lines
    /// of `n` space-separated `0`/`1` digits.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first, header) = lines
            .next()
            .ok_or_else(|| err(1, "empty matrix file".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| err(first, format!("expected decision count, found `{header}`")))?;
        if n == 0 {
            return Err(err(first, "decision count must be positive".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in 0..n {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| err(first + row + 1, format!("missing row {row} of {n}")))?;
            let cells: Vec<&str> = line.split_whitespace().collect();
            if cells.len() != n {
                return Err(err(lineno, format!("expected {n} entries, found {}", cells.len())));
            }
            for cell in cells {
                entries.push(match cell {
                    "0" => false,
                    "1" => true,
                    other => return Err(err(lineno, format!("entry must be 0 or 1, found `{other}`"))),
                });
            }
            if !entries[row * n + row] {
                return Err(err(lineno, format!("diagonal entry ({row}, {row}) must be 1")));
            }
        }
        if let Some((lineno, _)) = lines.next() {
            return Err(err(lineno, format!("unexpected content after {n} rows")));
        }
        Self::new(n, entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Serializes to the plain-text matrix format accepted by [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for j in 0..self.n {
            let cells: Vec<&str> = (0..self.n)
                .map(|i| if self.depends(j, i) { "1" } else { "0" })
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// Rows as `0`/`1` strings, used for run metadata.
    pub fn rows(&self) -> Vec<String> {
        (0..self.n)
            .map(|j| {
                (0..self.n)
                    .map(|i| if self.depends(j, i) { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether the contribution of `j` depends on decision `i`.
    pub fn depends(&self, j: usize, i: usize) -> bool {
        self.entries[j * self.n + i]
    }

    /// Decisions other than `j` that its contribution depends on, ascending.
    pub fn dependencies(&self, j: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| i != j && self.depends(j, i)).collect()
    }

    /// Number of other decisions `j` depends on (`K_j`).
    pub fn k_of(&self, j: usize) -> usize {
        self.dependencies(j).len()
    }
}

/// Vector of binary decisions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<bool>);

impl Configuration {
    pub fn new(bits: Vec<bool>) -> Self {
        Configuration(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Configuration(vec![false; n])
    }

    /// Uniform draw over all `2^n` configurations.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Configuration((0..n).map(|_| rng.random::<bool>()).collect())
    }

    /// Configuration whose bits read as `code` in binary, `d_0` being the
    /// most significant bit. Ascending codes follow lexicographic order.
    pub fn from_code(n: usize, code: u64) -> Self {
        Configuration((0..n).map(|j| (code >> (n - 1 - j)) & 1 == 1).collect())
    }

    pub fn code(&self) -> u64 {
        self.0.iter().fold(0, |acc, &b| acc << 1 | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> bool {
        self.0[j]
    }

    pub fn set(&mut self, j: usize, value: bool) {
        self.0[j] = value;
    }

    pub fn flip(&mut self, j: usize) {
        self.0[j] = !self.0[j];
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn hamming(&self, other: &Configuration) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub config: Configuration,
    pub performance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    matrix: InteractionMatrix,
    deps: Vec<Vec<usize>>,
    /// `dependents[i]`: decisions whose contribution reads bit `i` (including `i`).
    dependents: Vec<Vec<usize>>,
    tables: Vec<Vec<f64>>,
    optimum: Optimum,
}

impl Landscape {
    /// Draws every table entry uniformly on `[0, 1)`, decision by decision
    /// and index by index, then caches the global optimum.
    pub fn generate<R: Rng + ?Sized>(matrix: InteractionMatrix, rng: &mut R) -> Result<Self> {
        let tables = (0..matrix.n())
            .map(|j| {
                let size = 1usize << (matrix.k_of(j) + 1);
                (0..size).map(|_| rng.random::<f64>()).collect()
            })
            .collect();
        Self::from_tables(matrix, tables)
    }

    /// Builds a landscape from explicit tables (indexed as documented above).
    pub fn from_tables(matrix: InteractionMatrix, tables: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.n();
        if n > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: ENUMERATION_LIMIT,
            });
        }
        if tables.len() != n {
            return Err(Error::Structure(format!("expected {n} tables, got {}", tables.len())));
        }
        let deps: Vec<Vec<usize>> = (0..n).map(|j| matrix.dependencies(j)).collect();
        for (j, table) in tables.iter().enumerate() {
            let expected = 1usize << (deps[j].len() + 1);
            if table.len() != expected {
                return Err(Error::Structure(format!(
                    "table {j} has {} entries, expected {expected}",
                    table.len()
                )));
            }
            if let Some(v) = table.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Structure(format!("table {j} value {v} outside [0, 1]")));
            }
        }
        let dependents = (0..n)
            .map(|i| (0..n).filter(|&j| matrix.depends(j, i)).collect())
            .collect();
        let mut landscape = Landscape {
            matrix,
            deps,
            dependents,
            tables,
            optimum: Optimum {
                config: Configuration::zeros(n),
                performance: 0.0,
            },
        };
        landscape.optimum = landscape.global_optimum()?;
        Ok(landscape)
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn matrix(&self) -> &InteractionMatrix {
        &self.matrix
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    /// Dependencies of `j` in table-index order.
    pub fn dependencies(&self, j: usize) -> &[usize] {
        &self.deps[j]
    }

    /// Decisions whose contribution reads bit `i`, including `i` itself.
    pub fn dependents(&self, i: usize) -> &[usize] {
        &self.dependents[i]
    }

    pub fn optimum(&self) -> &Optimum {
        &self.optimum
    }

    pub fn table_index(&self, config: &Configuration, j: usize) -> usize {
        self.deps[j]
            .iter()
            .fold(config.get(j) as usize, |acc, &i| acc << 1 | config.get(i) as usize)
    }

    /// Contribution `f(d_j)` under `config`.
    ///
    /// Panics if `j` is out of range.
    pub fn contribution(&self, config: &Configuration, j: usize) -> f64 {
        assert!(j < self.n(), "decision {j} out of range for n = {}", self.n());
        self.tables[j][self.table_index(config, j)]
    }

    pub fn contributions(&self, config: &Configuration) -> Vec<f64> {
        (0..self.n()).map(|j| self.contribution(config, j)).collect()
    }

    /// Mean contribution over `subset`, dependency bits read from `config`.
    ///
    /// Panics on an empty subset.
    pub fn performance(&self, config: &Configuration, subset: &[usize]) -> f64 {
        assert!(!subset.is_empty(), "performance of an empty decision subset");
        let sum: f64 = subset.iter().map(|&j| self.contribution(config, j)).sum();
        sum / subset.len() as f64
    }

    /// Performance of the full decision vector.
    pub fn total_performance(&self, config: &Configuration) -> f64 {
        let sum: f64 = (0..self.n()).map(|j| self.contribution(config, j)).sum();
        sum / self.n() as f64
    }

    /// Exhaustive scan over all `2^n` configurations.
    ///
    /// Configurations are visited in Gray-code order so each step only
    /// re-reads the tables that depend on the flipped bit; the sum itself is
    /// recomputed in decision order, so the reported value is bit-identical
    /// to [`total_performance`](Self::total_performance). Exact ties go to
    /// the lexicographically smallest configuration.
    pub fn global_optimum(&self) -> Result<Optimum> {
        let n = self.n();
        if n > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: ENUMERATION_LIMIT,
            });
        }
        let mut config = Configuration::zeros(n);
        let mut contrib = self.contributions(&config);
        let mut best_code = 0u64;
        let mut best = contrib.iter().sum::<f64>() / n as f64;
        for step in 1u64..(1u64 << n) {
            let bit = step.trailing_zeros() as usize;
            let j = n - 1 - bit;
            config.flip(j);
            for &d in &self.dependents[j] {
                contrib[d] = self.tables[d][self.table_index(&config, d)];
            }
            let value = contrib.iter().sum::<f64>() / n as f64;
            let code = step ^ (step >> 1);
            if value > best || (value == best && code < best_code) {
                best = value;
                best_code = code;
            }
        }
        Ok(Optimum {
            config: Configuration::from_code(n, best_code),
            performance: best,
        })
    }
}
