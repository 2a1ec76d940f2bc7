//! Transport observables evaluated on density matrices and trajectories.
//!
//! Currents are weighted sums of populations over collector channels.
//! The detector partial trace reduces the full device state to the measured
//! subsystem, which is how decoherence induced by the detector becomes
//! visible as shrinking reduced coherences.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::model::{Configuration, SiteIndex, StateSpace};
use crate::solver::{Complex64, DensityMatrix, Trajectory};

#[derive(Debug, Error)]
pub enum ObservableError {
    #[error("collector references state {state}, but the density matrix has {n} states")]
    StateOutOfRange { state: usize, n: usize },
    #[error("{0}")]
    Mismatch(String),
}

/// States that drain into one reservoir, each with its tunneling rate.
///
/// The current through the reservoir is Σ σ_cc · Γ_c over the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectorSpec {
    entries: Vec<(usize, f64)>,
}

impl CollectorSpec {
    pub fn new(entries: Vec<(usize, f64)>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }
}

/// Current into the collector: Σ σ_cc · Γ_c.
pub fn current(state: &DensityMatrix, collector: &CollectorSpec) -> Result<f64, ObservableError> {
    let n = state.n_states();
    let mut total = 0.0;
    for &(s, rate) in collector.entries() {
        if s >= n {
            return Err(ObservableError::StateOutOfRange { state: s, n });
        }
        total += state.occupation(s) * rate;
    }
    Ok(total)
}

/// Grouping of the full state space by the configuration of everything
/// except the detector site.
///
/// Full states that differ only in the detector occupation share a reduced
/// index; summing σ over matching detector occupations yields the state of
/// the measured subsystem alone.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorPartition {
    detector_site: SiteIndex,
    reduced: Vec<Configuration>,
    labels: Vec<String>,
    /// Full state index → reduced state index.
    map: Vec<usize>,
    /// Detector occupation of each full state.
    det_occ: Vec<bool>,
}

impl DetectorPartition {
    /// Partition `space` by stripping `detector_site` from every
    /// configuration. Reduced states are numbered in order of first
    /// appearance and take the label of the first full state that maps to
    /// them.
    pub fn by_site(space: &StateSpace, detector_site: SiteIndex) -> Result<Self, ObservableError> {
        if detector_site.0 >= space.n_sites() {
            return Err(ObservableError::Mismatch(format!(
                "detector site {detector_site} out of range for {} sites",
                space.n_sites()
            )));
        }
        let strip = |cfg: &Configuration| -> Configuration {
            let bits: Vec<bool> = (0..cfg.n_sites())
                .filter(|&s| s != detector_site.0)
                .map(|s| cfg.occupied(SiteIndex(s)))
                .collect();
            Configuration::new(bits)
        };
        let mut reduced: Vec<Configuration> = Vec::new();
        let mut labels: Vec<String> = Vec::new();
        let mut map = Vec::with_capacity(space.len());
        let mut det_occ = Vec::with_capacity(space.len());
        for i in 0..space.len() {
            let r = strip(space.state(i));
            let idx = match reduced.iter().position(|c| *c == r) {
                Some(idx) => idx,
                None => {
                    reduced.push(r);
                    labels.push(space.label(i).to_string());
                    reduced.len() - 1
                }
            };
            map.push(idx);
            det_occ.push(space.state(i).occupied(detector_site));
        }
        Ok(Self {
            detector_site,
            reduced,
            labels,
            map,
            det_occ,
        })
    }

    pub fn detector_site(&self) -> SiteIndex {
        self.detector_site
    }

    pub fn n_full(&self) -> usize {
        self.map.len()
    }

    pub fn n_reduced(&self) -> usize {
        self.reduced.len()
    }

    pub fn reduced_index(&self, full_state: usize) -> usize {
        self.map[full_state]
    }

    pub fn reduced_label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn reduced_states(&self) -> &[Configuration] {
        &self.reduced
    }
}

/// Partial trace over the detector: σ̄_kl = Σ_d ⟨k, d|σ|l, d⟩.
///
/// Only entries whose detector occupation matches on both sides contribute,
/// so coherences between different detector charges are discarded, exactly
/// as a measurement of the detector demands.
pub fn trace_out_detector(
    state: &DensityMatrix,
    partition: &DetectorPartition,
) -> Result<DensityMatrix, ObservableError> {
    let n = state.n_states();
    if partition.n_full() != n {
        return Err(ObservableError::Mismatch(format!(
            "partition covers {} states, density matrix has {n}",
            partition.n_full()
        )));
    }
    let m = partition.n_reduced();
    let mut reduced = DMatrix::<Complex64>::zeros(m, m);
    for a in 0..n {
        for b in 0..n {
            if partition.det_occ[a] != partition.det_occ[b] {
                continue;
            }
            reduced[(partition.map[a], partition.map[b])] += state.entry(a, b);
        }
    }
    Ok(DensityMatrix::try_from_matrix(reduced).expect("partial trace preserves Hermiticity"))
}

/// Magnitude of one coherence, |σ_ab|.
pub fn coherence_magnitude(state: &DensityMatrix, a: usize, b: usize) -> f64 {
    state.entry(a, b).norm()
}

/// Charge accumulated in the collector along a trajectory, by trapezoidal
/// integration of the current. The first entry is always 0.
pub fn accumulated_charge(
    trajectory: &Trajectory,
    collector: &CollectorSpec,
) -> Result<Vec<f64>, ObservableError> {
    let mut charge = Vec::with_capacity(trajectory.len());
    let mut q = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..trajectory.len() {
        let t = trajectory.time(i);
        let current_now = current(trajectory.state(i), collector)?;
        if let Some((t0, i0)) = prev {
            q += 0.5 * (i0 + current_now) * (t - t0);
        }
        charge.push(q);
        prev = Some((t, current_now));
    }
    Ok(charge)
}
