//! Planted-block citation matrices for testing and demos.
//!
//! Journals in block `k` cite every member of their own block (themselves
//! included) at `intra_rate` and every member of other blocks at
//! `inter_rate`. Bridge journal `b` joins blocks `b mod (B-1)` and
//! `b mod (B-1) + 1`. Members of both blocks cite the bridge at
//! `bridge_rate`, which makes the two blocks partly alike. The bridge cites
//! like the mean of the two blocks' standardized rows, so it correlates
//! equally with both. Counts are Poisson draws around these expectations.
//!
//! A bridge can only correlate strongly with two blocks that are themselves
//! somewhat correlated: if the blocks' rows correlate at `rho`, the bridge
//! reaches `sqrt((1 + rho) / 2)` with each. With [`BridgeRate::Auto`] the
//! rate is solved so that `rho` averages [`AUTO_BLOCK_CORRELATION`] over
//! bridged block pairs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

use crate::ingest::CitationMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Invalid(String),
}

/// Target mean correlation between bridged blocks for [`BridgeRate::Auto`].
pub const AUTO_BLOCK_CORRELATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BridgeRate {
    Auto,
    Fixed(f64),
}

impl FromStr for BridgeRate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(BridgeRate::Auto);
        }
        s.parse()
            .map(BridgeRate::Fixed)
            .map_err(|_| format!("expected `auto` or a number, got {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub blocks: Vec<usize>,
    pub intra_rate: f64,
    pub inter_rate: f64,
    pub bridge_journals: usize,
    pub bridge_rate: BridgeRate,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            blocks: vec![15, 15, 15],
            intra_rate: 50.0,
            inter_rate: 0.0,
            bridge_journals: 2,
            bridge_rate: BridgeRate::Auto,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Invalid(m));
        if self.blocks.is_empty() {
            return bad("at least one block is required".into());
        }
        if let Some(s) = self.blocks.iter().find(|&&s| s < 3) {
            return bad(format!("block size {s} below 3"));
        }
        if !(self.intra_rate > 0.0 && self.intra_rate.is_finite()) {
            return bad("intra_rate must be positive".into());
        }
        if !(self.inter_rate >= 0.0 && self.inter_rate.is_finite()) {
            return bad("inter_rate must be non-negative".into());
        }
        if self.bridge_journals > 0 {
            if self.blocks.len() < 2 {
                return bad("bridges need at least two blocks".into());
            }
            if let BridgeRate::Fixed(r) = self.bridge_rate {
                if !(r > 0.0 && r.is_finite()) {
                    return bad("bridge_rate must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// The two blocks joined by bridge `b`.
    pub fn bridge_blocks(&self, b: usize) -> (usize, usize) {
        let k = b % (self.blocks.len() - 1);
        (k, k + 1)
    }

    /// Index of the first journal of each block, and of the first bridge.
    pub fn offsets(&self) -> (Vec<usize>, usize) {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut at = 0;
        for &s in &self.blocks {
            offsets.push(at);
            at += s;
        }
        (offsets, at)
    }

    /// Planted block of each journal; bridges map to `None`.
    pub fn membership(&self) -> Vec<Option<usize>> {
        let mut out = Vec::new();
        for (k, &s) in self.blocks.iter().enumerate() {
            out.extend(std::iter::repeat_n(Some(k), s));
        }
        out.extend(std::iter::repeat_n(None, self.bridge_journals));
        out
    }
}

/// Expected citing row of a member of block `k`.
fn block_row(spec: &SyntheticSpec, k: usize, n: usize, bridge_rate: f64) -> Vec<f64> {
    let (offsets, bridge_start) = spec.offsets();
    let mut row = vec![spec.inter_rate; n];
    for (b, r) in row.iter_mut().enumerate().skip(bridge_start) {
        let (p, q) = spec.bridge_blocks(b - bridge_start);
        *r = if p == k || q == k { bridge_rate } else { 0.0 };
    }
    for r in row.iter_mut().skip(offsets[k]).take(spec.blocks[k]) {
        *r = spec.intra_rate;
    }
    row
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let ((ma, sa), (mb, sb)) = (mean_sd(a), mean_sd(b));
    let cov = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / a.len() as f64;
    cov / (sa * sb)
}

/// Mean expected correlation between bridged blocks at `rate`.
fn bridged_block_correlation(spec: &SyntheticSpec, n: usize, rate: f64) -> f64 {
    let rows: Vec<Vec<f64>> = (0..spec.blocks.len())
        .map(|k| block_row(spec, k, n, rate))
        .collect();
    let total: f64 = (0..spec.bridge_journals)
        .map(|b| {
            let (p, q) = spec.bridge_blocks(b);
            correlation(&rows[p], &rows[q])
        })
        .sum();
    total / spec.bridge_journals as f64
}

/// The bridge rate `spec` resolves to for a matrix of `n` journals.
pub fn resolve_bridge_rate(spec: &SyntheticSpec) -> f64 {
    let (_, bridge_start) = spec.offsets();
    let n = bridge_start + spec.bridge_journals;
    match spec.bridge_rate {
        BridgeRate::Fixed(r) => r,
        BridgeRate::Auto if spec.bridge_journals == 0 => 0.0,
        BridgeRate::Auto => {
            let target = AUTO_BLOCK_CORRELATION;
            let mut hi = spec.intra_rate;
            while bridged_block_correlation(spec, n, hi) < target && hi < 1e9 {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..100 {
                let mid = (lo + hi) / 2.0;
                if bridged_block_correlation(spec, n, mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        }
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<CitationMatrix, SynthError> {
    spec.validate()?;
    let (_, bridge_start) = spec.offsets();
    let n = bridge_start + spec.bridge_journals;
    let rate = resolve_bridge_rate(spec);
    let block_rows: Vec<Vec<f64>> = (0..spec.blocks.len())
        .map(|k| block_row(spec, k, n, rate))
        .collect();

    let mut labels = Vec::with_capacity(n);
    let mut expected: Vec<&[f64]> = Vec::with_capacity(n);
    let mut bridge_rows = Vec::with_capacity(spec.bridge_journals);
    for (k, &s) in spec.blocks.iter().enumerate() {
        for m in 0..s {
            labels.push(format!("B{}-{:02}", k + 1, m + 1));
        }
    }
    for b in 0..spec.bridge_journals {
        labels.push(format!("X{}", b + 1));
        let (p, q) = spec.bridge_blocks(b);
        let (rp, rq) = (&block_rows[p], &block_rows[q]);
        let (sp, sq) = (mean_sd(rp).1, mean_sd(rq).1);
        let mixed: Vec<f64> = rp.iter().zip(rq).map(|(a, b)| a / sp + b / sq).collect();
        // Scale to the mean citing volume of the two blocks.
        let volume = (rp.iter().sum::<f64>() + rq.iter().sum::<f64>()) / 2.0;
        let scale = volume / mixed.iter().sum::<f64>();
        bridge_rows.push(mixed.into_iter().map(|x| x * scale).collect::<Vec<f64>>());
    }
    for (k, &s) in spec.blocks.iter().enumerate() {
        expected.extend(std::iter::repeat_n(block_rows[k].as_slice(), s));
    }
    expected.extend(bridge_rows.iter().map(Vec::as_slice));

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut entries = Vec::new();
    for (i, row) in expected.iter().enumerate() {
        for (j, &rate) in row.iter().enumerate() {
            if rate <= 0.0 {
                continue;
            }
            let c = Poisson::new(rate)
                .expect("positive finite rate")
                .sample(&mut rng) as u64;
            if c > 0 {
                entries.push((i, j, c));
            }
        }
    }
    Ok(CitationMatrix::from_entries(labels, entries).expect("generated labels are unique"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_from_seed() {
        let spec = SyntheticSpec::default();
        assert_eq!(
            generate_synthetic(&spec).unwrap(),
            generate_synthetic(&spec).unwrap()
        );
        let other = SyntheticSpec {
            seed: 2,
            ..spec.clone()
        };
        assert_ne!(
            generate_synthetic(&spec).unwrap(),
            generate_synthetic(&other).unwrap()
        );
    }

    #[test]
    fn layout_of_blocks_and_bridges() {
        let spec = SyntheticSpec::default();
        let m = generate_synthetic(&spec).unwrap();
        assert_eq!(m.n(), 47);
        assert_eq!(m.label(0), "B1-01");
        assert_eq!(m.label(45), "X1");
        assert_eq!(spec.bridge_blocks(0), (0, 1));
        assert_eq!(spec.bridge_blocks(1), (1, 2));
        // Zero inter rate: block 1 never cites block 3.
        assert!(m.row(0).iter().all(|&(j, _)| (j as usize) < 15 || j == 45));
    }

    #[test]
    fn validation() {
        let bad = SyntheticSpec {
            blocks: vec![2],
            ..SyntheticSpec::default()
        };
        assert!(generate_synthetic(&bad).is_err());
        let bad = SyntheticSpec {
            blocks: vec![5],
            bridge_journals: 1,
            ..SyntheticSpec::default()
        };
        assert!(generate_synthetic(&bad).is_err());
        let ok = SyntheticSpec {
            blocks: vec![5],
            bridge_journals: 0,
            ..SyntheticSpec::default()
        };
        assert_eq!(generate_synthetic(&ok).unwrap().n(), 5);
    }
}
