//! Brute-force reference tables for tiny problems.
//!
//! Everything here works from raw table values and raw belief counts and
//! shares no evaluation code with the engine, so the engine can be checked
//! against it value for value.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest problem the oracle will enumerate.
pub const ORACLE_LIMIT: usize = 4;

/// A tiny random problem: decision `j` depends on `(j + 1) mod n`, ...,
/// `(j + k) mod n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleProblem {
    pub n: usize,
    pub k: usize,
    /// Sorted dependency lists (self excluded).
    pub deps: Vec<Vec<usize>>,
    /// Tables indexed by own bit (most significant) then dependencies ascending.
    pub tables: Vec<Vec<f64>>,
    /// Belief counts `p[i][j]`, `q[i][j]`; the diagonal is unused.
    pub p: Vec<Vec<u32>>,
    pub q: Vec<Vec<u32>>,
}

impl OracleProblem {
    /// Problem drawn from a ChaCha8 stream seeded with `seed`.
    pub fn seeded(n: usize, k: usize, seed: u64) -> Result<Self> {
        Self::random(n, k, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || n > ORACLE_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: ORACLE_LIMIT,
            });
        }
        if k >= n {
            return Err(Error::Config(format!("k = {k} must be below n = {n}")));
        }
        let deps: Vec<Vec<usize>> = (0..n)
            .map(|j| {
                let mut d: Vec<usize> = (1..=k).map(|o| (j + o) % n).collect();
                d.sort_unstable();
                d
            })
            .collect();
        let tables = deps
            .iter()
            .map(|d| (0..(2usize << d.len())).map(|_| rng.random::<f64>()).collect())
            .collect();
        let mut counts = || -> Vec<Vec<u32>> {
            (0..n).map(|_| (0..n).map(|_| rng.random_range(1..=4)).collect()).collect()
        };
        let p = counts();
        let q = counts();
        Ok(OracleProblem { n, k, deps, tables, p, q })
    }

    /// `f(d_j)` read straight from the table.
    pub fn contribution(&self, bits: &[bool], j: usize) -> f64 {
        let mut index = if bits[j] { 1usize } else { 0 };
        for &i in &self.deps[j] {
            index = index * 2 + if bits[i] { 1 } else { 0 };
        }
        self.tables[j][index]
    }

    pub fn performance(&self, bits: &[bool], subset: &[usize]) -> f64 {
        let mut total = 0.0;
        for &j in subset {
            total += self.contribution(bits, j);
        }
        total / subset.len() as f64
    }

    pub fn belief(&self, i: usize, j: usize) -> f64 {
        let p = self.p[i][j] as f64;
        p / (p + self.q[i][j] as f64)
    }

    pub fn mean_internal_belief(&self, owned: &[usize], i: usize) -> f64 {
        let mut total = 0.0;
        for &j in owned {
            if j != i {
                total += self.belief(i, j);
            }
        }
        total / (owned.len() - 1) as f64
    }
}

/// `d_0` is the most significant bit of `code`.
pub fn bits_of(n: usize, code: usize) -> Vec<bool> {
    (0..n).map(|j| (code >> (n - 1 - j)) & 1 == 1).collect()
}

/// Decisions in `mask`, ascending; bit `j` of the mask is decision `j`.
pub fn subset_of(n: usize, mask: usize) -> Vec<usize> {
    (0..n).filter(|j| mask >> j & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceRow {
    pub config: usize,
    pub subset: Vec<usize>,
    pub performance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfferRow {
    /// `None` for belief-based offers, which do not depend on the configuration.
    pub config: Option<usize>,
    pub owned: Vec<usize>,
    pub argmin: Vec<usize>,
    pub min_price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleTables {
    pub problem: OracleProblem,
    pub performance: Vec<PerformanceRow>,
    pub optimum_config: usize,
    pub optimum_performance: f64,
    pub utility_offers: Vec<OfferRow>,
    pub interdependence_offers: Vec<OfferRow>,
}

fn argmin(values: &[(usize, f64)]) -> (Vec<usize>, f64) {
    let mut best = f64::INFINITY;
    for &(_, v) in values {
        if v < best {
            best = v;
        }
    }
    (values.iter().filter(|(_, v)| *v == best).map(|(d, _)| *d).collect(), best)
}

/// Enumerates every configuration and every non-empty subset.
pub fn enumerate(problem: OracleProblem) -> OracleTables {
    let n = problem.n;
    let all: Vec<usize> = (0..n).collect();
    let mut performance = Vec::new();
    let mut utility_offers = Vec::new();
    let mut optimum_config = 0;
    let mut optimum_performance = f64::NEG_INFINITY;

    for code in 0..(1usize << n) {
        let bits = bits_of(n, code);
        let full = problem.performance(&bits, &all);
        if full > optimum_performance {
            optimum_performance = full;
            optimum_config = code;
        }
        for mask in 1..(1usize << n) {
            let subset = subset_of(n, mask);
            performance.push(PerformanceRow {
                config: code,
                subset: subset.clone(),
                performance: problem.performance(&bits, &subset),
            });
            if subset.len() >= 2 {
                let values: Vec<(usize, f64)> =
                    subset.iter().map(|&d| (d, problem.contribution(&bits, d))).collect();
                let (argmin, min_price) = argmin(&values);
                utility_offers.push(OfferRow {
                    config: Some(code),
                    owned: subset,
                    argmin,
                    min_price,
                });
            }
        }
    }

    let interdependence_offers = (1..(1usize << n))
        .map(|mask| subset_of(n, mask))
        .filter(|s| s.len() >= 2)
        .map(|owned| {
            let values: Vec<(usize, f64)> =
                owned.iter().map(|&i| (i, problem.mean_internal_belief(&owned, i))).collect();
            let (argmin, min_price) = argmin(&values);
            OfferRow {
                config: None,
                owned,
                argmin,
                min_price,
            }
        })
        .collect();

    OracleTables {
        problem,
        performance,
        optimum_config,
        optimum_performance,
        utility_offers,
        interdependence_offers,
    }
}

fn fmt_set(set: &[usize]) -> String {
    set.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
}

impl OracleTables {
    /// Plain-text report with one CSV block per table.
    pub fn render(&self) -> String {
        let n = self.problem.n;
        let code = |c: usize| bits_of(n, c).iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        let mut out = String::new();
        let _ = writeln!(out, "# problem n={} k={}", n, self.problem.k);
        let _ = writeln!(out, "# tables\ndecision,dependencies,index,value");
        for (j, table) in self.problem.tables.iter().enumerate() {
            for (idx, v) in table.iter().enumerate() {
                let _ = writeln!(out, "{j},{},{idx},{v}", fmt_set(&self.problem.deps[j]));
            }
        }
        let _ = writeln!(out, "# performance\nconfig,subset,performance");
        for row in &self.performance {
            let _ = writeln!(out, "{},{},{}", code(row.config), fmt_set(&row.subset), row.performance);
        }
        let _ = writeln!(
            out,
            "# optimum\nconfig,performance\n{},{}",
            code(self.optimum_config),
            self.optimum_performance
        );
        let _ = writeln!(out, "# utility_offers\nconfig,owned,argmin,min_price");
        for row in &self.utility_offers {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                code(row.config.unwrap_or(0)),
                fmt_set(&row.owned),
                fmt_set(&row.argmin),
                row.min_price
            );
        }
        let _ = writeln!(out, "# interdependence_offers\nowned,argmin,min_price");
        for row in &self.interdependence_offers {
            let _ = writeln!(out, "{},{},{}", fmt_set(&row.owned), fmt_set(&row.argmin), row.min_price);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn guard() {
        let mut r = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(OracleProblem::random(25, 1, &mut r), Err(Error::TooLarge { .. })));
        assert!(OracleProblem::random(3, 3, &mut r).is_err());
    }

    #[test]
    fn two_decision_table_by_hand() {
        let problem = OracleProblem {
            n: 2,
            k: 1,
            deps: vec![vec![1], vec![0]],
            tables: vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.5, 0.6, 0.7, 0.8]],
            p: vec![vec![1; 2]; 2],
            q: vec![vec![1; 2]; 2],
        };
        let t = enumerate(problem);
        let full: Vec<f64> = t
            .performance
            .iter()
            .filter(|r| r.subset == vec![0, 1])
            .map(|r| r.performance)
            .collect();
        // 00: f0[00]=.1 f1[00]=.5 ; 01: f0[01]=.2 f1[10]=.7 ; 10: f0[10]=.3 f1[01]=.6 ; 11: .4 .8
        assert_eq!(full, vec![(0.1 + 0.5) / 2.0, (0.2 + 0.7) / 2.0, (0.3 + 0.6) / 2.0, (0.4 + 0.8) / 2.0]);
        assert_eq!(t.optimum_config, 0b11);
        assert_eq!(t.interdependence_offers[0].argmin, vec![0, 1]);
        assert!(t.render().contains("# optimum\nconfig,performance\n11,"));
    }
}
