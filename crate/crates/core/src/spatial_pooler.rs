//! Spatial pooling: top-k column selection over proximal connections, plus
//! Hebbian permanence learning on the winning columns.

use fixedbitset::FixedBitSet;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sdr::Sdr;

/// Proximal permanences between every input bit and every column.
///
/// Stored input-major (`i * n_columns + j`) so scoring a sparse input touches
/// only the rows of its active bits. Entries outside a column's potential pool
/// stay at zero and are never learned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximalMatrix {
    n_inputs: usize,
    n_columns: usize,
    permanences: Vec<f32>,
    #[serde(with = "crate::sdr::bitset_serde")]
    potential: FixedBitSet,
    connect_threshold: f32,
    potential_fraction: f64,
}

impl ProximalMatrix {
    /// Random potential pools covering `potential_fraction` of the input per
    /// column, with permanences spread uniformly within 0.1 of the threshold.
    pub fn random<R: Rng + ?Sized>(
        n_inputs: usize,
        n_columns: usize,
        potential_fraction: f64,
        connect_threshold: f32,
        rng: &mut R,
    ) -> Result<Self> {
        if n_inputs == 0 || n_columns == 0 {
            return Err(Error::Config("pooler dimensions must be positive".into()));
        }
        if !(potential_fraction > 0.0 && potential_fraction <= 1.0) {
            return Err(Error::Config(format!("potential_fraction must be in (0, 1], got {potential_fraction}")));
        }
        if !(connect_threshold > 0.0 && connect_threshold < 1.0) {
            return Err(Error::Config(format!("connect_threshold must be in (0, 1), got {connect_threshold}")));
        }
        let pool_size = ((n_inputs as f64 * potential_fraction).round() as usize).clamp(1, n_inputs);
        let mut permanences = vec![0.0f32; n_inputs * n_columns];
        let mut potential = FixedBitSet::with_capacity(n_inputs * n_columns);
        for col in 0..n_columns {
            for input in rand::seq::index::sample(rng, n_inputs, pool_size) {
                let at = input * n_columns + col;
                potential.insert(at);
                let p = connect_threshold + rng.random_range(-0.1f32..0.1f32);
                permanences[at] = p.clamp(0.0, 1.0);
            }
        }
        Ok(ProximalMatrix { n_inputs, n_columns, permanences, potential, connect_threshold, potential_fraction })
    }

    /// Builds a matrix from explicit per-column potential pools, given as
    /// `(input, permanence)` pairs.
    pub fn from_pools(n_inputs: usize, pools: &[Vec<(usize, f32)>], connect_threshold: f32) -> Result<Self> {
        let n_columns = pools.len();
        let mut permanences = vec![0.0f32; n_inputs * n_columns];
        let mut potential = FixedBitSet::with_capacity(n_inputs * n_columns);
        let mut total = 0usize;
        for (col, pool) in pools.iter().enumerate() {
            for &(input, p) in pool {
                if input >= n_inputs {
                    return Err(Error::Dimension { expected: n_inputs, actual: input + 1 });
                }
                let at = input * n_columns + col;
                potential.insert(at);
                permanences[at] = p.clamp(0.0, 1.0);
                total += 1;
            }
        }
        Ok(ProximalMatrix {
            n_inputs,
            n_columns,
            permanences,
            potential,
            connect_threshold,
            potential_fraction: total as f64 / (n_inputs * n_columns.max(1)) as f64,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn connect_threshold(&self) -> f32 {
        self.connect_threshold
    }

    pub fn potential_fraction(&self) -> f64 {
        self.potential_fraction
    }

    pub fn permanence(&self, input: usize, column: usize) -> f32 {
        self.permanences[input * self.n_columns + column]
    }

    pub fn in_pool(&self, input: usize, column: usize) -> bool {
        self.potential.contains(input * self.n_columns + column)
    }

    /// Binary connection bit: permanence at or above the threshold.
    pub fn connected(&self, input: usize, column: usize) -> bool {
        self.in_pool(input, column) && self.permanence(input, column) >= self.connect_threshold
    }

    /// Number of inputs in each column's potential pool.
    pub fn pool_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_columns];
        for at in self.potential.ones() {
            sizes[at % self.n_columns] += 1;
        }
        sizes
    }

    /// Product of the input with the binary connection matrix: per column,
    /// the number of connected synapses onto active input bits.
    pub fn column_scores(&self, x: &Sdr) -> Result<Vec<u32>> {
        if x.size() != self.n_inputs {
            return Err(Error::Dimension { expected: self.n_inputs, actual: x.size() });
        }
        let mut scores = vec![0u32; self.n_columns];
        for &input in x.active() {
            let row = input as usize * self.n_columns;
            let perms = &self.permanences[row..row + self.n_columns];
            for (col, (&p, score)) in perms.iter().zip(scores.iter_mut()).enumerate() {
                if p >= self.connect_threshold && self.potential.contains(row + col) {
                    *score += 1;
                }
            }
        }
        Ok(scores)
    }
}

/// Columns selected for one input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnActivation {
    active: Vec<u32>,
    n_columns: usize,
    k: usize,
}

impl ColumnActivation {
    /// Explicit activation, mainly for driving temporal memory directly.
    pub fn new(n_columns: usize, k: usize, columns: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut active: Vec<u32> = Vec::new();
        for c in columns {
            if c >= n_columns {
                return Err(Error::Dimension { expected: n_columns, actual: c + 1 });
            }
            active.push(c as u32);
        }
        active.sort_unstable();
        active.dedup();
        if active.len() > k {
            return Err(Error::Domain(format!("{} active columns exceed k = {k}", active.len())));
        }
        Ok(ColumnActivation { active, n_columns, k })
    }

    /// Sorted active column indices.
    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn contains(&self, column: usize) -> bool {
        self.active.binary_search(&(column as u32)).is_ok()
    }
}

/// Top-`k` columns by score. Zero-score columns never activate; ties go to
/// the lower column index.
pub fn compute_columns(x: &Sdr, pool: &ProximalMatrix, k: usize) -> Result<ColumnActivation> {
    if k == 0 || k > pool.n_columns {
        return Err(Error::Domain(format!("k must be in 1..={}, got {k}", pool.n_columns)));
    }
    let scores = pool.column_scores(x)?;
    let mut ranked: Vec<(u32, u32)> =
        scores.iter().enumerate().filter(|(_, &s)| s > 0).map(|(c, &s)| (s, c as u32)).collect();
    let order = |a: &(u32, u32), b: &(u32, u32)| b.0.cmp(&a.0).then(a.1.cmp(&b.1));
    if ranked.len() > k {
        ranked.select_nth_unstable_by(k - 1, order);
        ranked.truncate(k);
    }
    let mut active: Vec<u32> = ranked.into_iter().map(|(_, c)| c).collect();
    active.sort_unstable();
    Ok(ColumnActivation { active, n_columns: pool.n_columns, k })
}

/// Hebbian update on the active columns' potential pools: `+inc` towards
/// active input bits, `-dec` towards inactive ones, clamped to [0, 1].
pub fn learn_proximal(
    x: &Sdr,
    activated: &ColumnActivation,
    pool: &mut ProximalMatrix,
    inc: f32,
    dec: f32,
) -> Result<()> {
    if x.size() != pool.n_inputs {
        return Err(Error::Dimension { expected: pool.n_inputs, actual: x.size() });
    }
    if activated.n_columns != pool.n_columns {
        return Err(Error::Dimension { expected: pool.n_columns, actual: activated.n_columns });
    }
    if inc < 0.0 || dec < 0.0 {
        return Err(Error::Config("learning rates must be non-negative".into()));
    }
    if inc == 0.0 && dec == 0.0 {
        return Ok(());
    }
    let input_bits = x.packed();
    for &col in activated.active() {
        let col = col as usize;
        for input in 0..pool.n_inputs {
            let at = input * pool.n_columns + col;
            if !pool.potential.contains(at) {
                continue;
            }
            let p = &mut pool.permanences[at];
            *p = if input_bits.contains(input) { (*p + inc).min(1.0) } else { (*p - dec).max(0.0) };
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialPoolerConfig {
    pub n_columns: usize,
    pub k: usize,
    pub connect_threshold: f32,
    pub potential_fraction: f64,
    pub inc: f32,
    pub dec: f32,
    /// Reserved; boosting is not implemented and must stay off.
    pub boosting: bool,
}

impl Default for SpatialPoolerConfig {
    fn default() -> Self {
        SpatialPoolerConfig {
            n_columns: 2048,
            k: 40,
            connect_threshold: 0.5,
            potential_fraction: 0.5,
            inc: 0.05,
            dec: 0.008,
            boosting: false,
        }
    }
}

/// Pooler instance: configuration plus its learned proximal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialPooler {
    config: SpatialPoolerConfig,
    matrix: ProximalMatrix,
}

impl SpatialPooler {
    pub fn new<R: Rng + ?Sized>(n_inputs: usize, config: SpatialPoolerConfig, rng: &mut R) -> Result<Self> {
        if config.boosting {
            return Err(Error::Config("boosting is not supported".into()));
        }
        if config.k == 0 || config.k > config.n_columns {
            return Err(Error::Config(format!("k must be in 1..={}, got {}", config.n_columns, config.k)));
        }
        let matrix = ProximalMatrix::random(
            n_inputs,
            config.n_columns,
            config.potential_fraction,
            config.connect_threshold,
            rng,
        )?;
        Ok(SpatialPooler { config, matrix })
    }

    pub fn config(&self) -> &SpatialPoolerConfig {
        &self.config
    }

    pub fn matrix(&self) -> &ProximalMatrix {
        &self.matrix
    }

    pub fn compute(&mut self, x: &Sdr, learn: bool) -> Result<ColumnActivation> {
        let cols = compute_columns(x, &self.matrix, self.config.k)?;
        if learn {
            learn_proximal(x, &cols, &mut self.matrix, self.config.inc, self.config.dec)?;
        }
        Ok(cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// c0 = {0,1}, c1 = {2,3}, c2 = {1,2}, all connected.
    fn toy() -> ProximalMatrix {
        let c = |ins: &[usize]| ins.iter().map(|&i| (i, 0.6f32)).collect::<Vec<_>>();
        ProximalMatrix::from_pools(4, &[c(&[0, 1]), c(&[2, 3]), c(&[1, 2])], 0.5).unwrap()
    }

    #[test]
    fn top_k_of_manual_product() {
        let pool = toy();
        let x = Sdr::new(4, [0, 1]).unwrap();
        assert_eq!(pool.column_scores(&x).unwrap(), vec![2, 0, 1]);
        let cols = compute_columns(&x, &pool, 1).unwrap();
        assert_eq!(cols.active(), &[0]);
        // Zero-score column 1 stays off even with k = 3.
        assert_eq!(compute_columns(&x, &pool, 3).unwrap().active(), &[0, 2]);
    }

    #[test]
    fn empty_input_activates_nothing() {
        let cols = compute_columns(&Sdr::empty(4).unwrap(), &toy(), 2).unwrap();
        assert!(cols.is_empty());
    }

    #[test]
    fn all_columns_when_k_is_n() {
        let x = Sdr::new(4, [0, 1, 2, 3]).unwrap();
        assert_eq!(compute_columns(&x, &toy(), 3).unwrap().active(), &[0, 1, 2]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let x = Sdr::new(4, [1, 2]).unwrap();
        // Scores: c0 = 1, c1 = 1, c2 = 2.
        assert_eq!(compute_columns(&x, &toy(), 2).unwrap().active(), &[0, 2]);
    }

    #[test]
    fn dimension_mismatch() {
        let x = Sdr::new(5, [0]).unwrap();
        assert!(matches!(compute_columns(&x, &toy(), 1), Err(Error::Dimension { .. })));
        assert!(compute_columns(&Sdr::new(4, [0]).unwrap(), &toy(), 0).is_err());
    }

    #[test]
    fn learning_examples() {
        let mut pool = ProximalMatrix::from_pools(3, &[vec![(0, 0.45), (1, 0.98), (2, 0.3)]], 0.5).unwrap();
        let x = Sdr::new(3, [0, 1]).unwrap();
        let cols = compute_columns(&x, &pool, 1).unwrap();
        let before = pool.clone();
        learn_proximal(&x, &cols, &mut pool, 0.0, 0.0).unwrap();
        assert_eq!(pool, before);

        assert!(!pool.connected(0, 0));
        learn_proximal(&x, &cols, &mut pool, 0.1, 0.05).unwrap();
        assert!((pool.permanence(0, 0) - 0.55).abs() < 1e-6);
        assert!(pool.connected(0, 0));
        assert_eq!(pool.permanence(1, 0), 1.0);
        assert!((pool.permanence(2, 0) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn inactive_columns_untouched() {
        let mut pool = toy();
        let x = Sdr::new(4, [0, 1]).unwrap();
        let cols = compute_columns(&x, &pool, 1).unwrap();
        let before = pool.clone();
        learn_proximal(&x, &cols, &mut pool, 0.1, 0.1).unwrap();
        for input in 0..4 {
            assert_eq!(pool.permanence(input, 1), before.permanence(input, 1));
            assert_eq!(pool.permanence(input, 2), before.permanence(input, 2));
        }
    }

    #[test]
    fn random_pools_cover_half_the_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pool = ProximalMatrix::random(400, 64, 0.5, 0.5, &mut rng).unwrap();
        assert!(pool.pool_sizes().iter().all(|&s| s == 200));
    }

    proptest! {
        #[test]
        fn sparsity_and_bounds(seed in 0u64..200, start in 0usize..380) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sp = SpatialPooler::new(400, SpatialPoolerConfig { n_columns: 256, k: 5, ..Default::default() }, &mut rng).unwrap();
            let x = Sdr::new(400, start..start + 21).unwrap();
            let again = compute_columns(&x, sp.matrix(), 5).unwrap();
            let cols = sp.compute(&x, true).unwrap();
            prop_assert_eq!(&cols, &again);
            prop_assert!(cols.len() <= 5);
            for _ in 0..20 {
                sp.compute(&x, true).unwrap();
            }
            prop_assert!(sp.matrix().permanences.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }
}
