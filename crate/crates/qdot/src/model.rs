//! Device models and the generator they induce on the density matrix.
//!
//! A device is a list of occupation [`Configuration`]s (states excluded by
//! charging energy are simply not listed), coherent hopping amplitudes
//! between configurations, and incoherent tunneling channels to and from the
//! reservoirs. [`RateModel::liouvillian`] turns such a description into the
//! linear operator governing dσ/dt, including the transfer of coherences
//! between pairs of states that undergo the same reservoir transition.

use nalgebra::DMatrix;
use std::fmt;
use thiserror::Error;

/// Index of a single-electron site (a dot level or the detector level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteIndex(pub usize);

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Occupation pattern of every site, one bit per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    occ: Vec<bool>,
}

impl Configuration {
    pub fn new(occ: Vec<bool>) -> Self {
        Self { occ }
    }

    /// Build from 0/1 flags; anything nonzero counts as occupied.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self {
            occ: bits.iter().map(|&b| b != 0).collect(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.occ.len()
    }

    pub fn occupied(&self, site: SiteIndex) -> bool {
        self.occ[site.0]
    }

    pub fn total_occupancy(&self) -> usize {
        self.occ.iter().filter(|&&o| o).count()
    }

    /// Sites at which the two patterns disagree.
    pub fn differing_sites(&self, other: &Self) -> Vec<SiteIndex> {
        self.occ
            .iter()
            .zip(&other.occ)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| SiteIndex(i))
            .collect()
    }

    /// The single site at which the two patterns disagree, if there is
    /// exactly one.
    pub fn single_toggle(&self, other: &Self) -> Option<SiteIndex> {
        let diff = self.differing_sites(other);
        match diff.as_slice() {
            [site] => Some(*site),
            _ => None,
        }
    }

    /// Copy of the pattern with one site flipped.
    pub fn toggled(&self, site: SiteIndex) -> Self {
        let mut occ = self.occ.clone();
        occ[site.0] = !occ[site.0];
        Self { occ }
    }
}

/// The explicit list of many-electron basis states of a device.
///
/// Only listed states take part in the dynamics; configurations forbidden by
/// charging energy are excluded by omission rather than by an energy penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    n_sites: usize,
    states: Vec<Configuration>,
    labels: Vec<String>,
}

impl StateSpace {
    /// Space with auto-generated labels `s0`, `s1`, ...
    pub fn new(n_sites: usize, states: Vec<Configuration>) -> Self {
        let labels = (0..states.len()).map(|i| format!("s{i}")).collect();
        Self {
            n_sites,
            states,
            labels,
        }
    }

    /// Space with human-readable state labels.
    pub fn with_labels(n_sites: usize, states: Vec<Configuration>, labels: Vec<String>) -> Self {
        Self {
            n_sites,
            states,
            labels,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &Configuration {
        &self.states[i]
    }

    pub fn states(&self) -> &[Configuration] {
        &self.states
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Coherent hopping between two configurations: one electron moves between
/// two sites, leaving the total occupancy unchanged. The amplitude is real
/// and enters the generator symmetrically for both orderings of the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentCoupling {
    pub a: usize,
    pub b: usize,
    pub omega: f64,
}

/// Whether a reservoir transition fills or empties the toggled site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Fill,
    Empty,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Fill => write!(f, "fill"),
            Direction::Empty => write!(f, "empty"),
        }
    }
}

/// One-directional incoherent tunneling channel between two listed states.
///
/// The transition toggles exactly one site; `site` and `direction` record
/// which one and whether it fills or empties. Channels with rate zero are
/// legal and contribute nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncoherentChannel {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
    pub site: SiteIndex,
    pub direction: Direction,
}

impl IncoherentChannel {
    /// Build a channel between two states of `space`, inferring the toggled
    /// site and direction. Fails if the states do not differ in exactly one
    /// site.
    pub fn between(
        space: &StateSpace,
        from: usize,
        to: usize,
        rate: f64,
    ) -> Result<Self, ModelError> {
        let site = space
            .state(from)
            .single_toggle(space.state(to))
            .ok_or(ModelError::NotSingleTransition { from, to })?;
        let direction = if space.state(to).occupied(site) {
            Direction::Fill
        } else {
            Direction::Empty
        };
        Ok(Self {
            from,
            to,
            rate,
            site,
            direction,
        })
    }
}

/// Complete description of a device: states, level energies, coherent
/// couplings, and reservoir channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RateModel {
    pub space: StateSpace,
    pub energies: Vec<f64>,
    pub couplings: Vec<CoherentCoupling>,
    pub channels: Vec<IncoherentChannel>,
}

/// A single consistency problem found in a [`RateModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Which part of the model is at fault, e.g. `channels[3]`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Outcome of validating a [`RateModel`]; empty means the model is usable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "model is valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
    #[error("states {from} and {to} do not differ in exactly one site")]
    NotSingleTransition { from: usize, to: usize },
}

impl RateModel {
    /// Check every structural invariant and report all violations at once.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut push = |location: String, message: String| {
            violations.push(Violation { location, message });
        };

        let n = self.space.len();
        let n_sites = self.space.n_sites();

        if n == 0 {
            push("space".into(), "state list is empty".into());
        }
        for (i, cfg) in self.space.states().iter().enumerate() {
            if cfg.n_sites() != n_sites {
                push(
                    format!("space.states[{i}]"),
                    format!(
                        "configuration has {} sites, space declares {n_sites}",
                        cfg.n_sites()
                    ),
                );
            }
            for (j, other) in self.space.states().iter().enumerate().skip(i + 1) {
                if cfg == other {
                    push(
                        format!("space.states[{j}]"),
                        format!("duplicate of state {i}"),
                    );
                }
            }
        }
        if self.space.labels().len() != n {
            push(
                "space.labels".into(),
                format!("{} labels for {n} states", self.space.labels().len()),
            );
        } else {
            for (i, label) in self.space.labels().iter().enumerate() {
                if self.space.labels()[..i].contains(label) {
                    push(
                        format!("space.labels[{i}]"),
                        format!("duplicate label {label:?}"),
                    );
                }
            }
        }

        if self.energies.len() != n {
            push(
                "energies".into(),
                format!("{} energies for {n} states", self.energies.len()),
            );
        }
        for (i, e) in self.energies.iter().enumerate() {
            if !e.is_finite() {
                push(format!("energies[{i}]"), format!("not finite ({e})"));
            }
        }

        for (k, c) in self.couplings.iter().enumerate() {
            let loc = format!("couplings[{k}]");
            if c.a >= n || c.b >= n {
                push(loc, format!("state index out of range ({} ↔ {})", c.a, c.b));
                continue;
            }
            if c.a == c.b {
                push(loc.clone(), format!("couples state {} to itself", c.a));
                continue;
            }
            if !c.omega.is_finite() {
                push(loc.clone(), format!("amplitude not finite ({})", c.omega));
            }
            let sa = self.space.state(c.a);
            let sb = self.space.state(c.b);
            if sa.total_occupancy() != sb.total_occupancy() || sa.differing_sites(sb).len() != 2 {
                push(
                    loc.clone(),
                    format!(
                        "states {} and {} are not related by moving one electron",
                        c.a, c.b
                    ),
                );
            }
            for (k2, c2) in self.couplings.iter().enumerate().skip(k + 1) {
                if (c2.a, c2.b) == (c.a, c.b) || (c2.a, c2.b) == (c.b, c.a) {
                    push(
                        format!("couplings[{k2}]"),
                        format!("duplicate coupling for states {} ↔ {}", c.a, c.b),
                    );
                }
            }
        }

        for (k, ch) in self.channels.iter().enumerate() {
            let loc = format!("channels[{k}]");
            if ch.from >= n || ch.to >= n {
                push(
                    loc,
                    format!("state index out of range ({} → {})", ch.from, ch.to),
                );
                continue;
            }
            if ch.from == ch.to {
                push(loc.clone(), format!("connects state {} to itself", ch.from));
                continue;
            }
            if !(ch.rate.is_finite() && ch.rate >= 0.0) {
                push(
                    loc.clone(),
                    format!("rate must be finite and ≥ 0 (got {})", ch.rate),
                );
            }
            let from = self.space.state(ch.from);
            let to = self.space.state(ch.to);
            match from.single_toggle(to) {
                Some(site) if site == ch.site => {
                    let expect = if to.occupied(site) {
                        Direction::Fill
                    } else {
                        Direction::Empty
                    };
                    if expect != ch.direction {
                        push(
                            loc.clone(),
                            format!(
                                "direction {} inconsistent with occupancies (expected {expect})",
                                ch.direction
                            ),
                        );
                    }
                }
                Some(site) => push(
                    loc.clone(),
                    format!("toggled site is {site}, channel declares {}", ch.site),
                ),
                None => push(
                    loc.clone(),
                    format!(
                        "states {} and {} do not differ in exactly one site",
                        ch.from, ch.to
                    ),
                ),
            }
            for (k2, ch2) in self.channels.iter().enumerate().skip(k + 1) {
                if (ch2.from, ch2.to) == (ch.from, ch.to) {
                    push(
                        format!("channels[{k2}]"),
                        format!("duplicate channel {} → {}", ch.from, ch.to),
                    );
                }
            }
        }

        ValidationReport { violations }
    }

    /// Assemble the generator of dσ/dt for this model.
    ///
    /// Fails with the full validation report if the model is inconsistent.
    pub fn liouvillian(&self) -> Result<Liouvillian, ModelError> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        Ok(assemble(self))
    }

    /// Enumerate the coherence-transfer terms of this model.
    ///
    /// A pair of distinct channels `u → s` and `v → t` that toggle the same
    /// site in the same direction describes one reservoir event that acts on
    /// both sides of a coherence: it moves σ_uv into σ_st with coefficient
    /// (Γ_{u→s} + Γ_{v→t})/2. Pairs are reported once, oriented so that
    /// `source.0 < source.1`, in channel declaration order.
    pub fn coherence_transfer_pairs(&self) -> Vec<TransferPair> {
        let mut pairs = Vec::new();
        for (i, ci) in self.channels.iter().enumerate() {
            for cj in self.channels.iter().skip(i + 1) {
                if ci.site != cj.site || ci.direction != cj.direction {
                    continue;
                }
                let (first, second) = if ci.from < cj.from {
                    (ci, cj)
                } else {
                    (cj, ci)
                };
                pairs.push(TransferPair {
                    source: (first.from, second.from),
                    target: (first.to, second.to),
                    left_rate: first.rate,
                    right_rate: second.rate,
                });
            }
        }
        pairs
    }
}

/// One coherence-transfer term: σ_{source} feeds σ_{target} because a single
/// reservoir event converts both member states at once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferPair {
    /// Ordered so that `source.0 < source.1`.
    pub source: (usize, usize),
    /// Images of the two source states under the shared transition.
    pub target: (usize, usize),
    /// Rate of the channel `source.0 → target.0`.
    pub left_rate: f64,
    /// Rate of the channel `source.1 → target.1`.
    pub right_rate: f64,
}

impl TransferPair {
    /// Coefficient multiplying σ_{source} in the equation for σ_{target}.
    pub fn coefficient(&self) -> f64 {
        0.5 * (self.left_rate + self.right_rate)
    }
}

// --- real coordinate layout -------------------------------------------------
//
// A Hermitian n×n matrix is stored as n² real coordinates: the n diagonal
// entries first, then (Re σ_ab, Im σ_ab) for every index pair a < b in
// lexicographic order. The generator is a real matrix on these coordinates,
// which keeps Hermiticity exact by construction.

/// Coordinate slot of the diagonal entry σ_aa.
pub fn diag_slot(_n: usize, a: usize) -> usize {
    a
}

/// Coordinate slots `(re, im)` of the off-diagonal entry σ_ab, `a < b`.
pub fn pair_slots(n: usize, a: usize, b: usize) -> (usize, usize) {
    assert!(a < b && b < n, "pair_slots requires a < b < n");
    let rank = a * (2 * n - a - 1) / 2 + (b - a - 1);
    let x = n + 2 * rank;
    (x, x + 1)
}

/// Total number of real coordinates for an n-state space.
pub fn coord_dim(n: usize) -> usize {
    n * n
}

/// Linear generator of the density-matrix evolution dσ/dt = L[σ].
///
/// Stored as a real `n² × n²` matrix acting on the coordinate layout defined
/// by [`diag_slot`] and [`pair_slots`].
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    n: usize,
    mat: DMatrix<f64>,
}

impl Liouvillian {
    /// Wrap a raw coordinate matrix. The matrix must be `n² × n²`.
    pub fn from_matrix(n: usize, mat: DMatrix<f64>) -> Self {
        assert_eq!(mat.nrows(), coord_dim(n));
        assert_eq!(mat.ncols(), coord_dim(n));
        Self { n, mat }
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    /// Dimension of the real coordinate space (n²).
    pub fn dim(&self) -> usize {
        coord_dim(self.n)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Largest absolute row sum; used to scale tolerances.
    pub fn norm_inf(&self) -> f64 {
        (0..self.mat.nrows())
            .map(|i| self.mat.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Incremental writer of generator entries in the real coordinate layout.
///
/// Each method adds the real-coordinate image of one algebraic term of the
/// equations of motion. Both the generic assembler and the hand-transcribed
/// preset matrices are written with these primitives, so that the same
/// physical term always produces bit-identical floating-point entries and
/// the two construction routes can be compared exactly.
#[derive(Debug, Clone)]
pub struct LiouvillianBuilder {
    n: usize,
    mat: DMatrix<f64>,
}

impl LiouvillianBuilder {
    pub fn new(n: usize) -> Self {
        let d = coord_dim(n);
        Self {
            n,
            mat: DMatrix::zeros(d, d),
        }
    }

    /// dσ_to,to += rate · σ_from,from
    pub fn population_gain(&mut self, to: usize, from: usize, rate: f64) {
        let n = self.n;
        self.mat[(diag_slot(n, to), diag_slot(n, from))] += rate;
    }

    /// dσ_ss −= total · σ_ss
    pub fn population_loss(&mut self, s: usize, total: f64) {
        let n = self.n;
        self.mat[(diag_slot(n, s), diag_slot(n, s))] -= total;
    }

    /// dσ_aa += iΩ(σ_ab − σ_ba) and dσ_bb += iΩ(σ_ba − σ_ab).
    pub fn coupling_population(&mut self, a: usize, b: usize, omega: f64) {
        let n = self.n;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (_, y) = pair_slots(n, lo, hi);
        // iΩ(σ_lo,hi − σ_hi,lo) = −2Ω·Im σ_lo,hi
        self.mat[(diag_slot(n, lo), y)] -= 2.0 * omega;
        self.mat[(diag_slot(n, hi), y)] += 2.0 * omega;
    }

    /// dσ_ab += i(e_b − e_a)σ_ab, for a stored pair a < b.
    pub fn pair_detuning(&mut self, a: usize, b: usize, e_a: f64, e_b: f64) {
        let (x, y) = pair_slots(self.n, a, b);
        let eps = e_b - e_a;
        self.mat[(x, y)] -= eps;
        self.mat[(y, x)] += eps;
    }

    /// dσ_ab −= ½(out_a + out_b)σ_ab, with the total escape rates of the two
    /// member states.
    pub fn pair_loss(&mut self, a: usize, b: usize, out_a: f64, out_b: f64) {
        self.pair_loss_total(a, b, out_a + out_b);
    }

    /// dσ_ab −= ½·total·σ_ab, for transcriptions whose printed damping is not
    /// a plain sum of the two escape rates.
    pub fn pair_loss_total(&mut self, a: usize, b: usize, total: f64) {
        let (x, y) = pair_slots(self.n, a, b);
        let g = 0.5 * total;
        self.mat[(x, x)] -= g;
        self.mat[(y, y)] -= g;
    }

    /// dσ_ab += iΩ(σ_aa − σ_bb), the coupling term of the coupled pair itself.
    pub fn pair_coupling_populations(&mut self, a: usize, b: usize, omega: f64) {
        assert!(a < b);
        let n = self.n;
        let (_, y) = pair_slots(n, a, b);
        self.mat[(y, diag_slot(n, a))] += omega;
        self.mat[(y, diag_slot(n, b))] -= omega;
    }

    /// Coupling term connecting the stored pair (a, b) to another coherence:
    /// dσ_ab += +iΩ σ_uv when the source shares the left index (u == a), and
    /// dσ_ab += −iΩ σ_uv when it shares the right index (v == b).
    pub fn pair_coupling(&mut self, target: (usize, usize), source: (usize, usize), omega: f64) {
        let (a, b) = target;
        let (u, v) = source;
        assert!(a < b, "target must be a stored pair");
        assert!(source != target && u != v);
        let sign = if u == a {
            1.0
        } else if v == b {
            -1.0
        } else {
            panic!("coupling source must share one index with the target");
        };
        let (x, y) = pair_slots(self.n, a, b);
        let (sx, sy, conj) = self.source_slots(u, v);
        // d(X + iY) += sign · iΩ · (Re σ_uv + i Im σ_uv)
        self.mat[(x, sy)] -= sign * conj * omega;
        self.mat[(y, sx)] += sign * omega;
    }

    /// dσ_ab += ½(left_rate + right_rate) σ_uv: one reservoir event converts
    /// the source pair (u, v) into the target pair (a, b).
    pub fn coherence_transfer(
        &mut self,
        target: (usize, usize),
        source: (usize, usize),
        left_rate: f64,
        right_rate: f64,
    ) {
        self.coherence_transfer_total(target, source, left_rate + right_rate);
    }

    /// dσ_ab += ½·total·σ_uv, for transcriptions whose printed gain is not a
    /// plain sum of the two channel rates.
    pub fn coherence_transfer_total(
        &mut self,
        target: (usize, usize),
        source: (usize, usize),
        total: f64,
    ) {
        let (a, b) = target;
        let (u, v) = source;
        assert!(a < b, "target must be a stored pair");
        assert!(u != v && source != target);
        let coef = 0.5 * total;
        let (x, y) = pair_slots(self.n, a, b);
        let (sx, sy, conj) = self.source_slots(u, v);
        self.mat[(x, sx)] += coef;
        self.mat[(y, sy)] += conj * coef;
    }

    /// Resolve an ordered source pair (u, v) to its stored slots. Returns
    /// (re_slot, im_slot, conj) with `Im σ_uv = conj · coordinate`.
    fn source_slots(&self, u: usize, v: usize) -> (usize, usize, f64) {
        if u < v {
            let (x, y) = pair_slots(self.n, u, v);
            (x, y, 1.0)
        } else {
            let (x, y) = pair_slots(self.n, v, u);
            (x, y, -1.0)
        }
    }

    pub fn finish(self) -> Liouvillian {
        Liouvillian {
            n: self.n,
            mat: self.mat,
        }
    }
}

/// Generic assembly from the channel rules. Assumes a validated model.
fn assemble(model: &RateModel) -> Liouvillian {
    let n = model.space.len();
    let mut b = LiouvillianBuilder::new(n);

    // Total escape rate of each state, accumulated in declaration order so
    // the sums match the transcribed matrices bit for bit.
    let mut out = vec![0.0f64; n];
    for ch in &model.channels {
        out[ch.from] += ch.rate;
    }

    // Populations: gains from each channel, one total loss per state.
    for ch in &model.channels {
        b.population_gain(ch.to, ch.from, ch.rate);
    }
    for (s, &loss) in out.iter().enumerate() {
        b.population_loss(s, loss);
    }
    for c in &model.couplings {
        b.coupling_population(c.a, c.b, c.omega);
    }

    // Coherences: detuning and damping for every stored pair, then the
    // coupling terms that link pairs to populations and to other pairs.
    for a in 0..n {
        for bb in (a + 1)..n {
            b.pair_detuning(a, bb, model.energies[a], model.energies[bb]);
            b.pair_loss(a, bb, out[a], out[bb]);
            for c in &model.couplings {
                let (m, nn, omega) = (c.a, c.b, c.omega);
                if (a == m && bb == nn) || (a == nn && bb == m) {
                    b.pair_coupling_populations(a, bb, omega);
                    continue;
                }
                if bb == m && nn != a {
                    b.pair_coupling((a, bb), (a, nn), omega);
                }
                if bb == nn && m != a {
                    b.pair_coupling((a, bb), (a, m), omega);
                }
                if a == m && nn != bb {
                    b.pair_coupling((a, bb), (nn, bb), omega);
                }
                if a == nn && m != bb {
                    b.pair_coupling((a, bb), (m, bb), omega);
                }
            }
        }
    }

    // Coherence transfer between pairs that share a reservoir event.
    for tp in model.coherence_transfer_pairs() {
        let (u, v) = tp.source;
        let (s, t) = tp.target;
        if s < t {
            b.coherence_transfer((s, t), (u, v), tp.left_rate, tp.right_rate);
        } else {
            // Store the conjugate orientation of the same term.
            b.coherence_transfer((t, s), (v, u), tp.right_rate, tp.left_rate);
        }
    }

    b.finish()
}
