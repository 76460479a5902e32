//! Sequence memory over mini-columns.
//!
//! Each of the `N` columns holds `M` cells; cell `(i, j)` has the flat id
//! `j * M + i`. Cells own distal segments whose synapses point at other cells.
//! One step runs the fixed cycle
//!
//! 1. [`TemporalMemory::activate`]: active columns plus the previous predictive
//!    state give the active cells. Predicted cells fire alone; an active column
//!    with no predicted cell bursts (all `M` cells fire).
//! 2. [`TemporalMemory::learn_distal`]: Hebbian update. Segments that predicted
//!    correctly are reinforced towards the previously active cells, segments
//!    that predicted a column which stayed silent are weakened at the slower
//!    `punish` rate, and bursting columns grow or reinforce a segment on their
//!    winner cell.
//! 3. [`TemporalMemory::predict`]: a cell becomes predictive when one of its
//!    segments has strictly more than `activation_threshold` connected
//!    synapses onto currently active cells.

use fixedbitset::FixedBitSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial_pooler::ColumnActivation;

/// Binary cell-state matrix of shape `M x N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellMatrix {
    cells_per_column: usize,
    n_columns: usize,
    #[serde(with = "crate::sdr::bitset_serde")]
    bits: FixedBitSet,
}

impl CellMatrix {
    pub fn new(cells_per_column: usize, n_columns: usize) -> Self {
        CellMatrix { cells_per_column, n_columns, bits: FixedBitSet::with_capacity(cells_per_column * n_columns) }
    }

    pub fn cells_per_column(&self) -> usize {
        self.cells_per_column
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    /// State of cell `i` in column `j`.
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits.contains(j * self.cells_per_column + i)
    }

    pub fn set(&mut self, i: usize, j: usize, on: bool) {
        self.bits.set(j * self.cells_per_column + i, on);
    }

    pub fn contains_cell(&self, cell: u32) -> bool {
        self.bits.contains(cell as usize)
    }

    /// Whether any cell of column `j` is set.
    pub fn column_any(&self, j: usize) -> bool {
        let start = j * self.cells_per_column;
        self.bits.contains_any_in_range(start..start + self.cells_per_column)
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Flat ids of set cells in increasing order.
    pub fn cells(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.ones().map(|c| c as u32)
    }

    pub fn same_shape(&self, other: &CellMatrix) -> bool {
        self.cells_per_column == other.cells_per_column && self.n_columns == other.n_columns
    }

    fn insert(&mut self, cell: u32) {
        self.bits.insert(cell as usize);
    }

    fn clear(&mut self) {
        self.bits.clear();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningRates {
    pub inc: f32,
    pub dec: f32,
    pub punish: f32,
}

impl LearningRates {
    /// Wrong predictions must be forgotten more slowly than unused synapses
    /// decay: `punish < dec`, unless both are zero.
    pub fn validate(&self) -> Result<()> {
        if self.inc < 0.0 || self.dec < 0.0 || self.punish < 0.0 {
            return Err(Error::Config("distal learning rates must be non-negative".into()));
        }
        if self.punish >= self.dec && !(self.punish == 0.0 && self.dec == 0.0) {
            return Err(Error::Config(format!("punish ({}) must be smaller than dec ({})", self.punish, self.dec)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalMemoryConfig {
    pub cells_per_column: usize,
    /// A segment predicts when its connected active synapse count exceeds this.
    pub activation_threshold: u32,
    /// Minimum active synapse count (any permanence) for a segment to match.
    pub learning_threshold: u32,
    pub connect_threshold: f32,
    pub initial_permanence: f32,
    pub rates: LearningRates,
    pub max_segments_per_cell: usize,
    pub max_synapses_per_segment: usize,
    pub sample_size: usize,
    /// When false, no new segments or synapses are created.
    pub growth: bool,
    pub seed: u64,
}

impl Default for TemporalMemoryConfig {
    fn default() -> Self {
        TemporalMemoryConfig {
            cells_per_column: 32,
            activation_threshold: 13,
            learning_threshold: 10,
            connect_threshold: 0.5,
            initial_permanence: 0.21,
            rates: LearningRates { inc: 0.1, dec: 0.05, punish: 0.01 },
            max_segments_per_cell: 128,
            max_synapses_per_segment: 40,
            sample_size: 20,
            growth: true,
            seed: 42,
        }
    }
}

impl TemporalMemoryConfig {
    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        if self.cells_per_column == 0 {
            return Err(Error::Config("cells_per_column must be positive".into()));
        }
        if self.max_segments_per_cell == 0 || self.max_synapses_per_segment == 0 {
            return Err(Error::Config("segment and synapse caps must be positive".into()));
        }
        for (name, v) in
            [("connect_threshold", self.connect_threshold), ("initial_permanence", self.initial_permanence)]
        {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Synapse {
    presyn: u32,
    segment: u32,
    permanence: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Segment {
    cell: u32,
    synapses: Vec<u32>,
    last_used: u64,
    alive: bool,
}

/// Read-only view of one distal segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentView {
    pub id: u32,
    pub cell: u32,
    /// `(presynaptic cell, permanence)` pairs.
    pub synapses: Vec<(u32, f32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Learning {
    /// Predicted segment whose cell became active.
    Reinforce { segment: u32, potential: u32 },
    /// Best matching segment of a bursting column.
    Matching { segment: u32, potential: u32 },
    /// Bursting column without a matching segment.
    NewSegment { cell: u32 },
}

/// Outcome of one activation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActivationSummary {
    pub active_columns: usize,
    pub predicted_columns: usize,
    pub bursting_columns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalMemory {
    config: TemporalMemoryConfig,
    n_columns: usize,

    segments: Vec<Segment>,
    free_segments: Vec<u32>,
    synapses: Vec<Synapse>,
    free_synapses: Vec<u32>,
    cell_segments: Vec<Vec<u32>>,
    presyn_index: Vec<Vec<u32>>,

    active: CellMatrix,
    prev_active: CellMatrix,
    predictive: CellMatrix,
    prev_predictive: CellMatrix,
    winners: Vec<u32>,
    prev_winners: Vec<u32>,
    /// Segments over threshold at the last prediction, sorted by (cell, id).
    active_segments: Vec<u32>,
    /// `(segment, active potential synapses)` at the last prediction.
    matching_segments: Vec<(u32, u32)>,
    /// Segments whose predicted column stayed silent this step.
    punished: Vec<u32>,
    pending: Vec<Learning>,

    iteration: u64,
    rng: ChaCha8Rng,

    #[serde(skip)]
    scratch_potential: Vec<u32>,
    #[serde(skip)]
    scratch_connected: Vec<u32>,
}

impl TemporalMemory {
    pub fn new(n_columns: usize, config: TemporalMemoryConfig) -> Result<Self> {
        config.validate()?;
        if n_columns == 0 {
            return Err(Error::Config("n_columns must be positive".into()));
        }
        let m = config.cells_per_column;
        let n_cells = m * n_columns;
        Ok(TemporalMemory {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            n_columns,
            segments: Vec::new(),
            free_segments: Vec::new(),
            synapses: Vec::new(),
            free_synapses: Vec::new(),
            cell_segments: vec![Vec::new(); n_cells],
            presyn_index: vec![Vec::new(); n_cells],
            active: CellMatrix::new(m, n_columns),
            prev_active: CellMatrix::new(m, n_columns),
            predictive: CellMatrix::new(m, n_columns),
            prev_predictive: CellMatrix::new(m, n_columns),
            winners: Vec::new(),
            prev_winners: Vec::new(),
            active_segments: Vec::new(),
            matching_segments: Vec::new(),
            punished: Vec::new(),
            pending: Vec::new(),
            iteration: 0,
            scratch_potential: Vec::new(),
            scratch_connected: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &TemporalMemoryConfig {
        &self.config
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn cells_per_column(&self) -> usize {
        self.config.cells_per_column
    }

    /// Current activation A(t).
    pub fn active_cells(&self) -> &CellMatrix {
        &self.active
    }

    /// Predictive state computed at the end of the current step, Π(t).
    pub fn predictive_cells(&self) -> &CellMatrix {
        &self.predictive
    }

    /// Predictive state that was used to activate the current step, Π(t-1).
    pub fn previous_predictive_cells(&self) -> &CellMatrix {
        &self.prev_predictive
    }

    pub fn winner_cells(&self) -> &[u32] {
        &self.winners
    }

    pub fn segment_count(&self) -> usize {
        self.segments.iter().filter(|s| s.alive).count()
    }

    pub fn synapse_count(&self) -> usize {
        self.segments.iter().filter(|s| s.alive).map(|s| s.synapses.len()).sum()
    }

    pub fn segments_of(&self, cell: u32) -> Vec<SegmentView> {
        self.cell_segments[cell as usize].iter().map(|&id| self.segment_view(id)).collect()
    }

    pub fn segment_view(&self, id: u32) -> SegmentView {
        let seg = &self.segments[id as usize];
        SegmentView {
            id,
            cell: seg.cell,
            synapses: seg
                .synapses
                .iter()
                .map(|&s| {
                    let syn = &self.synapses[s as usize];
                    (syn.presyn, syn.permanence)
                })
                .collect(),
        }
    }

    fn n_cells(&self) -> usize {
        self.config.cells_per_column * self.n_columns
    }

    fn check_cell(&self, cell: u32) -> Result<()> {
        if cell as usize >= self.n_cells() {
            return Err(Error::Dimension { expected: self.n_cells(), actual: cell as usize + 1 });
        }
        Ok(())
    }

    /// Adds a segment on `cell` with explicit `(presynaptic cell, permanence)`
    /// synapses. Evicts the least recently used segment when the cell is full.
    pub fn grow_segment(&mut self, cell: u32, synapses: &[(u32, f32)]) -> Result<u32> {
        self.check_cell(cell)?;
        for &(pre, _) in synapses {
            self.check_cell(pre)?;
        }
        let id = self.create_segment(cell);
        for &(pre, p) in synapses {
            self.create_synapse(id, pre, p.clamp(0.0, 1.0));
        }
        Ok(id)
    }

    /// Sets the current activation directly, bypassing column activation.
    pub fn set_active_cells(&mut self, cells: &[u32]) -> Result<()> {
        for &c in cells {
            self.check_cell(c)?;
        }
        self.active.clear();
        for &c in cells {
            self.active.insert(c);
        }
        Ok(())
    }

    fn create_segment(&mut self, cell: u32) -> u32 {
        if self.cell_segments[cell as usize].len() >= self.config.max_segments_per_cell {
            let victim = *self.cell_segments[cell as usize]
                .iter()
                .min_by_key(|&&s| (self.segments[s as usize].last_used, s))
                .expect("cell at capacity has segments");
            self.destroy_segment(victim);
        }
        let seg = Segment { cell, synapses: Vec::new(), last_used: self.iteration, alive: true };
        let id = match self.free_segments.pop() {
            Some(id) => {
                self.segments[id as usize] = seg;
                id
            }
            None => {
                self.segments.push(seg);
                (self.segments.len() - 1) as u32
            }
        };
        self.cell_segments[cell as usize].push(id);
        id
    }

    fn destroy_segment(&mut self, id: u32) {
        let syns = std::mem::take(&mut self.segments[id as usize].synapses);
        for s in syns {
            self.unlink_presyn(s);
            self.free_synapses.push(s);
        }
        let seg = &mut self.segments[id as usize];
        seg.alive = false;
        let cell = seg.cell as usize;
        self.cell_segments[cell].retain(|&s| s != id);
        self.free_segments.push(id);
    }

    fn create_synapse(&mut self, segment: u32, presyn: u32, permanence: f32) {
        let syn = Synapse { presyn, segment, permanence };
        let id = match self.free_synapses.pop() {
            Some(id) => {
                self.synapses[id as usize] = syn;
                id
            }
            None => {
                self.synapses.push(syn);
                (self.synapses.len() - 1) as u32
            }
        };
        self.segments[segment as usize].synapses.push(id);
        self.presyn_index[presyn as usize].push(id);
    }

    fn unlink_presyn(&mut self, syn: u32) {
        let pre = self.synapses[syn as usize].presyn as usize;
        let list = &mut self.presyn_index[pre];
        if let Some(pos) = list.iter().position(|&s| s == syn) {
            list.swap_remove(pos);
        }
    }

    fn destroy_synapse(&mut self, syn: u32) {
        self.unlink_presyn(syn);
        let seg = self.synapses[syn as usize].segment as usize;
        let list = &mut self.segments[seg].synapses;
        if let Some(pos) = list.iter().position(|&s| s == syn) {
            list.swap_remove(pos);
        }
        self.free_synapses.push(syn);
    }

    /// Applies the activation rule for one step and records the learning plan.
    ///
    /// Returns how many active columns were predicted and how many burst.
    pub fn activate(&mut self, cols: &ColumnActivation) -> Result<ActivationSummary> {
        if cols.n_columns() != self.n_columns {
            return Err(Error::Dimension { expected: self.n_columns, actual: cols.n_columns() });
        }
        let m = self.config.cells_per_column;
        self.iteration += 1;

        std::mem::swap(&mut self.prev_active, &mut self.active);
        std::mem::swap(&mut self.prev_winners, &mut self.winners);
        std::mem::swap(&mut self.prev_predictive, &mut self.predictive);
        self.active.clear();
        self.predictive.clear();
        self.winners.clear();
        self.pending.clear();
        self.punished.clear();

        let mut summary = ActivationSummary { active_columns: cols.len(), ..Default::default() };

        // Both segment lists are sorted by owning cell, hence by column.
        let column_of = |seg: &Segment| seg.cell as usize / m;
        let mut a = 0usize;
        let mut mt = 0usize;
        let active_cols = cols.active();
        let mut ci = 0usize;

        // Walk columns in order, merging against the active and matching lists.
        // Punishment covers active segments of columns that stayed silent.
        while a < self.active_segments.len() || ci < active_cols.len() {
            let next_seg_col = self.active_segments.get(a).map(|&s| column_of(&self.segments[s as usize]));
            let next_col = active_cols.get(ci).map(|&c| c as usize);
            match (next_seg_col, next_col) {
                (Some(sc), Some(c)) if sc < c => {
                    self.punished.push(self.active_segments[a]);
                    a += 1;
                }
                (Some(_), None) => {
                    self.punished.push(self.active_segments[a]);
                    a += 1;
                }
                (_, Some(c)) => {
                    let seg_start = a;
                    while a < self.active_segments.len()
                        && column_of(&self.segments[self.active_segments[a] as usize]) == c
                    {
                        a += 1;
                    }
                    while mt < self.matching_segments.len()
                        && column_of(&self.segments[self.matching_segments[mt].0 as usize]) < c
                    {
                        mt += 1;
                    }
                    let match_start = mt;
                    while mt < self.matching_segments.len()
                        && column_of(&self.segments[self.matching_segments[mt].0 as usize]) == c
                    {
                        mt += 1;
                    }
                    if a > seg_start {
                        summary.predicted_columns += 1;
                        self.activate_predicted(seg_start..a, match_start..mt);
                    } else {
                        summary.bursting_columns += 1;
                        self.burst(c, match_start..mt);
                    }
                    ci += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Ok(summary)
    }

    fn potential_of(&self, matching: std::ops::Range<usize>, seg: u32) -> u32 {
        self.matching_segments[matching].iter().find(|(s, _)| *s == seg).map_or(0, |&(_, p)| p)
    }

    fn activate_predicted(&mut self, segs: std::ops::Range<usize>, matching: std::ops::Range<usize>) {
        let mut last_cell = u32::MAX;
        for idx in segs {
            let seg = self.active_segments[idx];
            let cell = self.segments[seg as usize].cell;
            if cell != last_cell {
                self.active.insert(cell);
                self.winners.push(cell);
                last_cell = cell;
            }
            let potential = self.potential_of(matching.clone(), seg);
            self.pending.push(Learning::Reinforce { segment: seg, potential });
        }
    }

    fn burst(&mut self, column: usize, matching: std::ops::Range<usize>) {
        let m = self.config.cells_per_column;
        let first = (column * m) as u32;
        for cell in first..first + m as u32 {
            self.active.insert(cell);
        }
        // Best matching segment: most active potential synapses, then the cell
        // with fewer segments, then the lower cell index, then lower segment id.
        let best = self.matching_segments[matching]
            .iter()
            .map(|&(seg, pot)| {
                let cell = self.segments[seg as usize].cell;
                (seg, pot, cell, self.cell_segments[cell as usize].len())
            })
            .min_by(|x, y| y.1.cmp(&x.1).then(x.3.cmp(&y.3)).then(x.2.cmp(&y.2)).then(x.0.cmp(&y.0)));
        match best {
            Some((segment, potential, cell, _)) => {
                self.winners.push(cell);
                self.pending.push(Learning::Matching { segment, potential });
            }
            None => {
                let cell = (first..first + m as u32)
                    .min_by_key(|&c| (self.cell_segments[c as usize].len(), c))
                    .expect("column has cells");
                self.winners.push(cell);
                self.pending.push(Learning::NewSegment { cell });
            }
        }
    }

    /// Hebbian update for the step just activated, with the configured rates.
    pub fn learn(&mut self) -> Result<()> {
        let rates = self.config.rates;
        self.learn_distal(rates)
    }

    /// Hebbian update for the step just activated.
    ///
    /// Correct predictions: `+inc` to synapses from previously active cells,
    /// `-dec` to the rest, then growth towards previous winners. Wrong
    /// predictions: `-punish` on every synapse. Bursting columns reinforce
    /// their best matching segment or grow a new one.
    pub fn learn_distal(&mut self, rates: LearningRates) -> Result<()> {
        rates.validate()?;
        let pending = std::mem::take(&mut self.pending);
        let punished = std::mem::take(&mut self.punished);

        for plan in &pending {
            if let Learning::Reinforce { segment, .. } | Learning::Matching { segment, .. } = *plan {
                self.adapt_segment(segment, rates.inc, rates.dec);
                self.segments[segment as usize].last_used = self.iteration;
            }
        }
        if rates.punish > 0.0 {
            for &segment in &punished {
                if self.segments[segment as usize].alive {
                    self.weaken_segment(segment, rates.punish);
                }
            }
        }
        if self.config.growth && !self.prev_winners.is_empty() {
            let sample = self.config.sample_size;
            // Existing segments first: creating segments may evict and recycle ids.
            for plan in &pending {
                if let Learning::Reinforce { segment, potential } | Learning::Matching { segment, potential } = *plan {
                    let want = sample.saturating_sub(potential as usize);
                    self.grow_synapses(segment, want);
                }
            }
            for plan in &pending {
                if let Learning::NewSegment { cell } = *plan {
                    let segment = self.create_segment(cell);
                    self.grow_synapses(segment, sample);
                }
            }
        }
        self.pending = pending;
        self.punished = punished;
        Ok(())
    }

    fn adapt_segment(&mut self, segment: u32, inc: f32, dec: f32) {
        if inc == 0.0 && dec == 0.0 {
            return;
        }
        let mut dead = Vec::new();
        for &s in &self.segments[segment as usize].synapses {
            let syn = &mut self.synapses[s as usize];
            syn.permanence = if self.prev_active.contains_cell(syn.presyn) {
                (syn.permanence + inc).min(1.0)
            } else {
                (syn.permanence - dec).max(0.0)
            };
            if syn.permanence <= 0.0 {
                dead.push(s);
            }
        }
        for s in dead {
            self.destroy_synapse(s);
        }
    }

    fn weaken_segment(&mut self, segment: u32, amount: f32) {
        let mut dead = Vec::new();
        for &s in &self.segments[segment as usize].synapses {
            let syn = &mut self.synapses[s as usize];
            syn.permanence = (syn.permanence - amount).max(0.0);
            if syn.permanence <= 0.0 {
                dead.push(s);
            }
        }
        for s in dead {
            self.destroy_synapse(s);
        }
    }

    fn grow_synapses(&mut self, segment: u32, want: usize) {
        let want = want.min(self.config.max_synapses_per_segment);
        if want == 0 {
            return;
        }
        let existing: Vec<u32> =
            self.segments[segment as usize].synapses.iter().map(|&s| self.synapses[s as usize].presyn).collect();
        let candidates: Vec<u32> = self.prev_winners.iter().copied().filter(|c| !existing.contains(c)).collect();
        if candidates.is_empty() {
            return;
        }
        let chosen: Vec<u32> = if candidates.len() <= want {
            candidates
        } else {
            let mut picked: Vec<u32> = rand::seq::index::sample(&mut self.rng, candidates.len(), want)
                .into_iter()
                .map(|i| candidates[i])
                .collect();
            picked.sort_unstable();
            picked
        };
        let overflow = (existing.len() + chosen.len()).saturating_sub(self.config.max_synapses_per_segment);
        if overflow > 0 {
            let mut weakest: Vec<(f32, u32, u32)> = self.segments[segment as usize]
                .synapses
                .iter()
                .map(|&s| {
                    let syn = &self.synapses[s as usize];
                    (syn.permanence, syn.presyn, s)
                })
                .collect();
            weakest.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            for &(_, _, s) in weakest.iter().take(overflow) {
                self.destroy_synapse(s);
            }
        }
        let p = self.config.initial_permanence;
        for pre in chosen {
            self.create_synapse(segment, pre, p);
        }
    }

    /// Computes the predictive state Π(t) from the current activation.
    pub fn predict(&mut self) -> &CellMatrix {
        let n_segments = self.segments.len();
        self.scratch_potential.clear();
        self.scratch_potential.resize(n_segments, 0);
        self.scratch_connected.clear();
        self.scratch_connected.resize(n_segments, 0);
        let mut touched: Vec<u32> = Vec::new();
        let threshold = self.config.connect_threshold;
        for cell in self.active.cells() {
            for &s in &self.presyn_index[cell as usize] {
                let syn = &self.synapses[s as usize];
                let seg = syn.segment as usize;
                if self.scratch_potential[seg] == 0 {
                    touched.push(syn.segment);
                }
                self.scratch_potential[seg] += 1;
                if syn.permanence >= threshold {
                    self.scratch_connected[seg] += 1;
                }
            }
        }
        touched.sort_unstable_by_key(|&s| (self.segments[s as usize].cell, s));
        self.active_segments.clear();
        self.matching_segments.clear();
        self.predictive.clear();
        for seg in touched {
            let connected = self.scratch_connected[seg as usize];
            let potential = self.scratch_potential[seg as usize];
            if connected > self.config.activation_threshold {
                self.active_segments.push(seg);
                self.predictive.insert(self.segments[seg as usize].cell);
            }
            if potential >= self.config.learning_threshold {
                self.matching_segments.push((seg, potential));
            }
        }
        &self.predictive
    }

    /// One full step: activate, optionally learn, then predict.
    pub fn compute(&mut self, cols: &ColumnActivation, learn: bool) -> Result<ActivationSummary> {
        let summary = self.activate(cols)?;
        if learn {
            self.learn()?;
        }
        self.predict();
        Ok(summary)
    }

    /// Clears all activity; learned segments are kept.
    pub fn reset(&mut self) {
        self.active.clear();
        self.prev_active.clear();
        self.predictive.clear();
        self.prev_predictive.clear();
        self.winners.clear();
        self.prev_winners.clear();
        self.active_segments.clear();
        self.matching_segments.clear();
        self.punished.clear();
        self.pending.clear();
    }
}
