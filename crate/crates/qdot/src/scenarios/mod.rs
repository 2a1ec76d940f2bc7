//! Device presets, transcribed generators, and closed-form currents.
//!
//! Two devices are built here. The first is a single dot beside a
//! point-contact detector dot; its dynamics are purely classical rate
//! equations. The second is a pair of coherently coupled dots whose near dot
//! controls the detector transparency; here the interplay of coherence and
//! measurement back-action appears.
//!
//! The detector couples to the device through Coulomb blockade, and the
//! position of the left Fermi level relative to the shifted detector level
//! selects one of three [`FermiRegime`]s: fully blocked by any nearby
//! electron, open only when the far dot is occupied, or never blocked.
//!
//! Every generator can be produced two ways: generically from the channel
//! rules ([`crate::model`]) or from matrices transcribed by hand, state by
//! state ([`literal_liouvillian`]). The two routes agree exactly for the
//! single dot and the blocked double dot; in the partially open regime they
//! differ in two coefficients, a discrepancy that is deliberately preserved
//! and surfaced rather than patched over (see [`literal`]).

mod literal;

pub use literal::{literal_liouvillian, LiteralSystem};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::model::{
    CoherentCoupling, Configuration, IncoherentChannel, ModelError, RateModel, SiteIndex,
    StateSpace, ValidationReport, Violation,
};
use crate::observables::{
    coherence_magnitude, current, trace_out_detector, CollectorSpec, DetectorPartition,
    ObservableError,
};
use crate::solver::{steady_state_direct, SolverError};

/// Rates and energies of the measured devices.
///
/// Unprimed detector and reservoir rates apply when the detector sees no
/// nearby electron; primed values apply when it does. `epsilon` is the
/// energy offset of the far dot relative to the near dot, and `delta_u` the
/// extra electrostatic shift of the far level while the detector is
/// occupied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub gamma0: f64,
    pub gamma0p: f64,
    pub gamma0pp: f64,
    #[serde(rename = "gammaL")]
    pub gamma_l: f64,
    #[serde(rename = "gammaLp")]
    pub gamma_lp: f64,
    #[serde(rename = "gammaR")]
    pub gamma_r: f64,
    #[serde(rename = "gammaRp")]
    pub gamma_rp: f64,
    pub omega: f64,
    pub omegap: f64,
    pub epsilon: f64,
    #[serde(rename = "deltaU")]
    pub delta_u: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            gamma0: 1.0,
            gamma0p: 1.0,
            gamma0pp: 1.0,
            gamma_l: 1.0,
            gamma_lp: 1.0,
            gamma_r: 1.0,
            gamma_rp: 1.0,
            omega: 1.0,
            omegap: 1.0,
            epsilon: 0.0,
            delta_u: 0.0,
        }
    }
}

impl ScenarioParams {
    /// Check every field. Tunneling rates must be finite and nonnegative;
    /// the coupling amplitudes and the energies `epsilon` and `delta_u` only
    /// need to be finite, since both signs are physical.
    pub fn violations(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let rates = [
            ("gamma0", self.gamma0),
            ("gamma0p", self.gamma0p),
            ("gamma0pp", self.gamma0pp),
            ("gammaL", self.gamma_l),
            ("gammaLp", self.gamma_lp),
            ("gammaR", self.gamma_r),
            ("gammaRp", self.gamma_rp),
        ];
        for (name, value) in rates {
            if !(value.is_finite() && value >= 0.0) {
                violations.push(Violation {
                    location: name.into(),
                    message: format!("rate must be finite and ≥ 0 (got {value})"),
                });
            }
        }
        for (name, value) in [
            ("omega", self.omega),
            ("omegap", self.omegap),
            ("epsilon", self.epsilon),
            ("deltaU", self.delta_u),
        ] {
            if !value.is_finite() {
                violations.push(Violation {
                    location: name.into(),
                    message: format!("must be finite (got {value})"),
                });
            }
        }
        ValidationReport { violations }
    }
}

/// Position of the left Fermi level relative to the detector level under the
/// possible electrostatic shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FermiRegime {
    /// Any electron near the detector blocks it completely.
    #[default]
    Blocked,
    /// The detector stays open when only the far dot is occupied.
    Partial,
    /// The detector is never blocked.
    Open,
}

impl fmt::Display for FermiRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FermiRegime::Blocked => write!(f, "blocked"),
            FermiRegime::Partial => write!(f, "partial"),
            FermiRegime::Open => write!(f, "open"),
        }
    }
}

/// Which construction route produces the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AssemblyMode {
    /// Assemble from the channel rules.
    #[default]
    Generic,
    /// Use the hand-transcribed matrix for the preset.
    Literal,
}

impl fmt::Display for AssemblyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssemblyMode::Generic => write!(f, "generic"),
            AssemblyMode::Literal => write!(f, "literal"),
        }
    }
}

/// Inputs of the quasiclassical barrier-penetration estimate: the detector
/// barrier of height `v` is crossed by an electron of energy `e1`, the
/// nearby charge raises the barrier by `u`, and `s` is the dimensionless
/// tunneling action of the unperturbed barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamowParams {
    pub u: f64,
    pub e1: f64,
    pub v: f64,
    pub s: f64,
}

impl GamowParams {
    pub fn violations(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (name, value) in [("u", self.u), ("e1", self.e1), ("v", self.v), ("s", self.s)] {
            if !value.is_finite() {
                violations.push(Violation {
                    location: name.into(),
                    message: format!("must be finite (got {value})"),
                });
            }
        }
        if violations.is_empty() {
            let mut push = |location: &str, message: String| {
                violations.push(Violation {
                    location: location.into(),
                    message,
                });
            };
            if self.e1 <= 0.0 {
                push(
                    "e1",
                    format!("level energy must be positive (got {})", self.e1),
                );
            }
            if self.v <= self.e1 {
                push(
                    "v",
                    format!(
                        "barrier height must exceed e1 = {} (got {})",
                        self.e1, self.v
                    ),
                );
            }
            if self.u < 0.0 {
                push("u", format!("shift must be ≥ 0 (got {})", self.u));
            }
            if self.s <= 0.0 {
                push("s", format!("action must be positive (got {})", self.s));
            }
        }
        ValidationReport { violations }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario parameters:\n{0}")]
    InvalidParams(ValidationReport),
    #[error("no transcribed matrix is defined for {0}")]
    NoLiteralForm(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
}

/// A preset device bundled with everything needed to measure it: collector
/// definitions, the detector partition, and bookkeeping for the reduced
/// coherence of interest.
#[derive(Debug, Clone)]
pub struct ScenarioModel {
    pub model: RateModel,
    /// Collector entries for the detector current.
    pub detector_collector: CollectorSpec,
    /// Collector entries for the source current through the measured device.
    pub system_collector: CollectorSpec,
    pub partition: DetectorPartition,
    /// Reduced-state indices of the coherently coupled pair, when the device
    /// has one.
    pub reduced_pair: Option<(usize, usize)>,
    /// Conventional starting state (everything empty).
    pub initial_state: usize,
    /// Hand-transcribed form of this preset, when one exists.
    pub literal: Option<LiteralSystem>,
}

/// Single dot monitored by the detector.
///
/// Four states: both empty, detector only, dot only, both occupied. The
/// detector fills and empties at Γ0 while the dot is empty; with the dot
/// occupied the blocked detector can only empty, at total rate 2Γ′0 of which
/// Γ′0 reaches the collector. The dot itself fills at ΓL (Γ′L with the
/// detector occupied) and drains at ΓR (Γ′R).
pub fn single_dot_model(p: &ScenarioParams) -> ScenarioModel {
    let space = StateSpace::with_labels(
        2,
        vec![
            Configuration::from_bits(&[0, 0]),
            Configuration::from_bits(&[1, 0]),
            Configuration::from_bits(&[0, 1]),
            Configuration::from_bits(&[1, 1]),
        ],
        vec!["empty".into(), "det".into(), "dot".into(), "det+dot".into()],
    );
    let ch = |from, to, rate| {
        IncoherentChannel::between(&space, from, to, rate)
            .expect("preset states differ in one site")
    };
    // Channel order is load-bearing: escape-rate sums accumulate in this
    // order and the transcribed matrices spell out the same sums, so the
    // exact-equality cross-checks depend on it.
    let channels = vec![
        ch(0, 1, p.gamma0),
        ch(1, 0, p.gamma0),
        ch(3, 2, 2.0 * p.gamma0p),
        ch(0, 2, p.gamma_l),
        ch(1, 3, p.gamma_lp),
        ch(2, 0, p.gamma_r),
        ch(3, 1, p.gamma_rp),
    ];
    let partition =
        DetectorPartition::by_site(&space, SiteIndex(0)).expect("preset detector site exists");
    ScenarioModel {
        model: RateModel {
            space,
            energies: vec![0.0; 4],
            couplings: vec![],
            channels,
        },
        detector_collector: CollectorSpec::new(vec![(1, p.gamma0), (3, p.gamma0p)]),
        system_collector: CollectorSpec::new(vec![(2, p.gamma_r), (3, p.gamma_rp)]),
        partition,
        reduced_pair: None,
        initial_state: 0,
        literal: Some(LiteralSystem::SingleDot),
    }
}

/// Coupled double dot monitored by the detector, in the given regime.
///
/// Six states: empty (a), detector only (b), near dot only (c), far dot
/// only (d), detector with near dot (e), detector with far dot (f). The
/// near dot couples coherently to the far dot at Ω (Ω′ while the detector is
/// occupied), with detuning ε, raised to ε + ΔU while the detector holds an
/// electron. The detector channels depend on the regime; the dot reservoirs
/// fill the near dot (ΓL / Γ′L) and drain the far dot (ΓR / Γ′R).
pub fn double_dot_model(p: &ScenarioParams, regime: FermiRegime) -> ScenarioModel {
    let space = StateSpace::with_labels(
        3,
        vec![
            Configuration::from_bits(&[0, 0, 0]),
            Configuration::from_bits(&[1, 0, 0]),
            Configuration::from_bits(&[0, 1, 0]),
            Configuration::from_bits(&[0, 0, 1]),
            Configuration::from_bits(&[1, 1, 0]),
            Configuration::from_bits(&[1, 0, 1]),
        ],
        vec![
            "empty".into(),
            "det".into(),
            "dot1".into(),
            "dot2".into(),
            "det+dot1".into(),
            "det+dot2".into(),
        ],
    );
    let energies = vec![0.0, 0.0, 0.0, p.epsilon, 0.0, p.epsilon + p.delta_u];
    let couplings = vec![
        CoherentCoupling {
            a: 2,
            b: 3,
            omega: p.omega,
        },
        CoherentCoupling {
            a: 4,
            b: 5,
            omega: p.omegap,
        },
    ];
    let ch = |from, to, rate| {
        IncoherentChannel::between(&space, from, to, rate)
            .expect("preset states differ in one site")
    };
    // Channel order is load-bearing; see single_dot_model.
    let channels = match regime {
        // A blocked detector can be emptied but never filled while either
        // dot electron sits nearby; the total escape rate doubles because
        // both reservoirs accept the electron.
        FermiRegime::Blocked => vec![
            ch(0, 1, p.gamma0),
            ch(1, 0, p.gamma0),
            ch(4, 2, 2.0 * p.gamma0p),
            ch(5, 3, 2.0 * p.gamma0pp),
            ch(0, 2, p.gamma_l),
            ch(1, 4, p.gamma_lp),
            ch(3, 0, p.gamma_r),
            ch(5, 1, p.gamma_rp),
        ],
        // With only the far dot occupied the detector level sits below the
        // left Fermi sea: it drains to the collector at Γ″0 and refills from
        // the emitter at Γ″0.
        FermiRegime::Partial => vec![
            ch(0, 1, p.gamma0),
            ch(1, 0, p.gamma0),
            ch(4, 2, 2.0 * p.gamma0p),
            ch(5, 3, p.gamma0pp),
            ch(3, 5, p.gamma0pp),
            ch(0, 2, p.gamma_l),
            ch(1, 4, p.gamma_lp),
            ch(3, 0, p.gamma_r),
            ch(5, 1, p.gamma_rp),
        ],
        // Transparent detector: fills and empties at Γ0 regardless of the
        // device configuration.
        FermiRegime::Open => vec![
            ch(0, 1, p.gamma0),
            ch(1, 0, p.gamma0),
            ch(2, 4, p.gamma0),
            ch(4, 2, p.gamma0),
            ch(3, 5, p.gamma0),
            ch(5, 3, p.gamma0),
            ch(0, 2, p.gamma_l),
            ch(1, 4, p.gamma_lp),
            ch(3, 0, p.gamma_r),
            ch(5, 1, p.gamma_rp),
        ],
    };
    let detector_collector = match regime {
        FermiRegime::Blocked | FermiRegime::Partial => {
            CollectorSpec::new(vec![(1, p.gamma0), (4, p.gamma0p), (5, p.gamma0pp)])
        }
        FermiRegime::Open => CollectorSpec::new(vec![(1, p.gamma0), (4, p.gamma0), (5, p.gamma0)]),
    };
    let partition =
        DetectorPartition::by_site(&space, SiteIndex(0)).expect("preset detector site exists");
    let literal = match regime {
        FermiRegime::Blocked => Some(LiteralSystem::DoubleDotBlocked),
        FermiRegime::Partial => Some(LiteralSystem::DoubleDotPartial),
        FermiRegime::Open => None,
    };
    ScenarioModel {
        model: RateModel {
            space,
            energies,
            couplings,
            channels,
        },
        detector_collector,
        system_collector: CollectorSpec::new(vec![(3, p.gamma_r), (5, p.gamma_rp)]),
        partition,
        reduced_pair: Some((1, 2)),
        initial_state: 0,
        literal,
    }
}

// --- closed-form currents ----------------------------------------------------

/// Currents of the two reference devices with no interaction between them:
/// a detector filled and drained at Γ0 carries I = Γ0/2, a single level
/// filled at ΓL and drained at ΓR carries I = ΓLΓR/(ΓL+ΓR).
pub fn analytic_baseline(gamma0: f64, gamma_l: f64, gamma_r: f64) -> (f64, f64) {
    (0.5 * gamma0, gamma_l * gamma_r / (gamma_l + gamma_r))
}

/// Source current through the monitored single dot and the detector-to-source
/// current ratio, in the limit of a detector much faster than the dot.
///
/// With Γ′L = ΓL this reduces bit-for-bit to the noninteracting value
/// ΓLΓR/(ΓL+ΓR): a fast detector alone does not change the dot current.
pub fn analytic_single_dot(p: &ScenarioParams) -> (f64, f64) {
    let fill = p.gamma_l + p.gamma_lp;
    let i_s = p.gamma_r * fill / (fill + 2.0 * p.gamma_r);
    (i_s, p.gamma0 / fill)
}

/// Relative increase of the detector rate when the nearby charge raises the
/// barrier by `u`: the quasiclassical penetration factor shifts by
/// u/(2·e1) + s·u/(v − e1).
pub fn gamow_distortion(g: &GamowParams) -> f64 {
    g.u / (2.0 * g.e1) + g.s * g.u / (g.v - g.e1)
}

/// Resonant source current of the double dot with a noninvasive detector
/// (no electrostatic back-action, ΔU = 0).
pub fn analytic_double_dot(p: &ScenarioParams) -> f64 {
    let w = p.omega * p.omega;
    p.gamma_r * w
        / (p.epsilon * p.epsilon + p.gamma_r * p.gamma_r / 4.0 + w * (2.0 + p.gamma_r / p.gamma_l))
}

/// First-order correction to the resonant current when the occupied detector
/// shifts the far level by ΔU. Valid asymptotically for detector widths far
/// above every system scale.
pub fn analytic_distorted(p: &ScenarioParams) -> f64 {
    let i_s0 = analytic_double_dot(p);
    let four_g0 = 4.0 * p.gamma0;
    let alpha = p.delta_u * (p.delta_u + p.epsilon) / (four_g0 * four_g0);
    i_s0 * (1.0 - alpha * i_s0 / p.gamma0)
}

/// Resonant source current when the partially open detector dephases the
/// dot coherence, with both detector widths equal to Γ′0. With Γ′0 = 0 this
/// reduces bit-for-bit to [`analytic_double_dot`].
pub fn analytic_dephased(p: &ScenarioParams) -> f64 {
    let w = p.omega * p.omega;
    let broadened = p.gamma_r + p.gamma0p;
    p.gamma_r * w
        / (p.epsilon * p.epsilon * (p.gamma_r / broadened)
            + p.gamma_r * broadened / 4.0
            + w * (2.0 + p.gamma_r / p.gamma_l))
}

/// One steady-state solve of [`fermi_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSweepPoint {
    pub regime: FermiRegime,
    pub source_current: f64,
    pub detector_current: f64,
    /// |σ̄| between the two dot states after tracing out the detector.
    pub reduced_coherence: f64,
}

/// Steady currents and reduced coherence of the double dot across Fermi-level
/// regimes, in the given order.
///
/// Regimes with a transcribed matrix are solved from it; the open regime has
/// none (nothing is printed for it), so its generator comes from the channel
/// rules, which are its defining description.
pub fn fermi_sweep(
    p: &ScenarioParams,
    regimes: &[FermiRegime],
) -> Result<Vec<RegimeSweepPoint>, ScenarioError> {
    let report = p.violations();
    if !report.is_valid() {
        return Err(ScenarioError::InvalidParams(report));
    }
    regimes
        .iter()
        .map(|&regime| {
            let scenario = double_dot_model(p, regime);
            let lv = match scenario.literal {
                Some(which) => literal_liouvillian(p, which),
                None => scenario.model.liouvillian()?,
            };
            let steady = steady_state_direct(&lv)?;
            let source_current = current(&steady, &scenario.system_collector)?;
            let detector_current = current(&steady, &scenario.detector_collector)?;
            let reduced = trace_out_detector(&steady, &scenario.partition)?;
            let reduced_coherence = match scenario.reduced_pair {
                Some((a, b)) => coherence_magnitude(&reduced, a, b),
                None => 0.0,
            };
            Ok(RegimeSweepPoint {
                regime,
                source_current,
                detector_current,
                reduced_coherence,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_examples() {
        let (i_d, _) = analytic_baseline(3.0, 1.0, 1.0);
        assert_eq!(i_d, 1.5);
        let (_, i_s) = analytic_baseline(1.0, 1.0, 1.0);
        assert_eq!(i_s, 0.5);
        // A very fast source reservoir saturates the current at the drain rate.
        let (_, i_s) = analytic_baseline(1.0, 1e12, 2.0);
        assert!((i_s - 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_dot_formula_reduces_to_baseline() {
        let p = ScenarioParams {
            gamma_l: 0.7,
            gamma_lp: 0.7,
            gamma_r: 1.9,
            ..Default::default()
        };
        let (i_s, _) = analytic_single_dot(&p);
        let (_, i_s0) = analytic_baseline(p.gamma0, p.gamma_l, p.gamma_r);
        assert_eq!(i_s, i_s0);
    }

    #[test]
    fn single_dot_formula_examples() {
        let mut p = ScenarioParams {
            gamma0: 10.0,
            ..Default::default()
        };
        let (i_s, ratio) = analytic_single_dot(&p);
        assert_eq!(i_s, 0.5);
        assert_eq!(ratio, 5.0);
        p.gamma_lp = 0.0;
        let (i_s, _) = analytic_single_dot(&p);
        assert!((i_s - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gamow_distortion_examples() {
        let g = GamowParams {
            u: 0.1,
            e1: 1.0,
            v: 5.0,
            s: 3.0,
        };
        assert!(g.violations().is_valid());
        assert_eq!(gamow_distortion(&g), 0.125);
        let zero = GamowParams { u: 0.0, ..g };
        assert_eq!(gamow_distortion(&zero), 0.0);
        let doubled = GamowParams { u: 0.2, ..g };
        assert_eq!(gamow_distortion(&doubled), 2.0 * gamow_distortion(&g));
    }

    #[test]
    fn gamow_params_are_checked() {
        let g = GamowParams {
            u: 0.1,
            e1: 1.0,
            v: 0.5,
            s: 3.0,
        };
        let report = g.violations();
        assert!(!report.is_valid());
        assert!(report.violations[0].location.contains('v'));
    }

    #[test]
    fn double_dot_formula_examples() {
        let p = ScenarioParams::default();
        assert!((analytic_double_dot(&p) - 1.0 / 3.25).abs() < 1e-16);
        let detuned = ScenarioParams { epsilon: 10.0, ..p };
        assert!((analytic_double_dot(&detuned) - 1.0 / 103.25).abs() < 1e-16);
        let decoupled = ScenarioParams { omega: 0.0, ..p };
        assert_eq!(analytic_double_dot(&decoupled), 0.0);
    }

    #[test]
    fn distorted_formula_examples() {
        let p = ScenarioParams {
            gamma0: 10.0,
            delta_u: 0.4,
            ..ScenarioParams::default()
        };
        let i_s0 = analytic_double_dot(&p);
        let i_s = analytic_distorted(&p);
        let alpha = 1e-4;
        assert!((i_s - i_s0 * (1.0 - alpha * i_s0 / 10.0)).abs() < 1e-18);
        // No shift, or a shift that cancels the detuning, leaves the current
        // untouched.
        let flat = ScenarioParams { delta_u: 0.0, ..p };
        assert_eq!(analytic_distorted(&flat), analytic_double_dot(&flat));
        let cancel = ScenarioParams {
            epsilon: 0.4,
            delta_u: -0.4,
            ..p
        };
        assert_eq!(analytic_distorted(&cancel), analytic_double_dot(&cancel));
    }

    #[test]
    fn dephased_formula_examples() {
        let p = ScenarioParams {
            gamma0p: 0.0,
            epsilon: 0.35,
            ..ScenarioParams::default()
        };
        assert_eq!(analytic_dephased(&p), analytic_double_dot(&p));
        let strong = ScenarioParams {
            gamma0p: 100.0,
            epsilon: 0.0,
            ..ScenarioParams::default()
        };
        assert!((analytic_dephased(&strong) - 1.0 / 28.25).abs() < 1e-16);
        let extreme = ScenarioParams {
            gamma0p: 1e9,
            ..strong
        };
        assert!(analytic_dephased(&extreme) < 1e-8);
    }

    #[test]
    fn params_validation_flags_bad_rates() {
        let p = ScenarioParams {
            gamma_r: -1.0,
            epsilon: f64::NAN,
            ..ScenarioParams::default()
        };
        let report = p.violations();
        assert_eq!(report.violations.len(), 2);
        assert_eq!(report.violations[0].location, "gammaR");
        assert_eq!(report.violations[1].location, "epsilon");
        // Negative detuning is allowed; it is an energy, not a rate.
        let detuned = ScenarioParams {
            epsilon: -2.0,
            ..ScenarioParams::default()
        };
        assert!(detuned.violations().is_valid());
    }

    #[test]
    fn preset_shapes() {
        let p = ScenarioParams::default();
        let single = single_dot_model(&p);
        assert_eq!(single.model.space.len(), 4);
        assert!(single.model.validate().is_valid());
        assert!(single.model.couplings.is_empty());
        assert_eq!(single.partition.n_reduced(), 2);
        assert_eq!(single.reduced_pair, None);

        for regime in [
            FermiRegime::Blocked,
            FermiRegime::Partial,
            FermiRegime::Open,
        ] {
            let double = double_dot_model(&p, regime);
            assert_eq!(double.model.space.len(), 6);
            assert!(double.model.validate().is_valid(), "{regime}");
            assert_eq!(double.partition.n_reduced(), 3);
            assert_eq!(double.reduced_pair, Some((1, 2)));
            assert_eq!(double.partition.reduced_label(1), "dot1");
            assert_eq!(double.partition.reduced_label(2), "dot2");
        }
    }

    #[test]
    fn blocked_detector_cannot_fill_past_occupied_dots() {
        let double = double_dot_model(&ScenarioParams::default(), FermiRegime::Blocked);
        for ch in &double.model.channels {
            assert!(
                !(ch.from == 2 && ch.to == 4),
                "detector must not fill from the near-dot state"
            );
            assert!(
                !(ch.from == 3 && ch.to == 5),
                "detector must not fill from the far-dot state"
            );
        }
    }

    #[test]
    fn open_regime_transfers_run_both_ways() {
        let double = double_dot_model(&ScenarioParams::default(), FermiRegime::Open);
        let pairs = double.model.coherence_transfer_pairs();
        let has = |source: (usize, usize), target: (usize, usize)| {
            pairs
                .iter()
                .any(|tp| tp.source == source && tp.target == target)
        };
        assert!(
            has((2, 3), (4, 5)),
            "dot coherence must feed the detector-occupied copy"
        );
        assert!(
            has((4, 5), (2, 3)),
            "and flow back when the detector empties"
        );
    }

    #[test]
    fn fermi_sweep_shows_the_dip() {
        let p = ScenarioParams {
            gamma0p: 100.0,
            gamma0pp: 100.0,
            ..ScenarioParams::default()
        };
        let points = fermi_sweep(
            &p,
            &[
                FermiRegime::Blocked,
                FermiRegime::Partial,
                FermiRegime::Open,
            ],
        )
        .unwrap();
        assert_eq!(points.len(), 3);
        let [blocked, partial, open] = [&points[0], &points[1], &points[2]];
        assert!((blocked.source_current - 1.0 / 3.25).abs() < 1e-8);
        assert!((partial.source_current - 1.0 / 28.25).abs() < 1e-8);
        assert!((open.source_current - blocked.source_current).abs() < 1e-6);
        assert!(
            partial.reduced_coherence < blocked.reduced_coherence,
            "measurement in the partial regime must damp the dot coherence"
        );
        assert!(partial.reduced_coherence > 0.0);
    }

    #[test]
    fn fermi_sweep_rejects_bad_params() {
        let p = ScenarioParams {
            gamma0: -2.0,
            ..ScenarioParams::default()
        };
        assert!(matches!(
            fermi_sweep(&p, &[FermiRegime::Blocked]),
            Err(ScenarioError::InvalidParams(_))
        ));
    }
}
