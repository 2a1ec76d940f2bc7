//! Hand-transcribed generators for the preset devices.
//!
//! Each function writes the equations of motion out coefficient by
//! coefficient, one state and one pair at a time, with no help from the
//! channel-rule assembler. The transcriptions exist as an independent route
//! to the same matrices: if the generic engine and a transcription disagree,
//! one of them is wrong, and the validation suite compares them entry by
//! entry.
//!
//! Both routes place terms through the same [`LiouvillianBuilder`]
//! primitives, computing each coefficient from the same parameter atoms in
//! the same order, so agreement is exact floating-point equality rather than
//! agreement to a tolerance.
//!
//! Two conventions differ between the routes and are intentional:
//!
//! * The double-dot transcriptions use the detector-empty rates ΓL, ΓR, Ω
//!   for the detector-occupied sector as well (the reference form treats the
//!   distortion of those rates as negligible). They reproduce the generic
//!   matrices exactly when Γ′L = ΓL, Γ′R = ΓR, Ω′ = Ω.
//! * In the partially open regime the transcription keeps two coefficients
//!   that do not follow from the channel rules: the dot-coherence gain
//!   ½(Γ′0 + Γ″0) where the rules give ½(2Γ′0 + Γ″0), and the raised-pair
//!   decay ½(ΓR + Γ′0 + 2Γ″0) where the rules give ½(2Γ′0 + Γ″0 + ΓR). The
//!   transcribed form closes exactly under the detector partial trace (the
//!   reduced dot coherence sees pure extra dephasing at Γ″0/2); the
//!   rule-derived form does not close. Neither is silently preferred: both
//!   can be built, and `qdot validate` reports their difference.

use std::fmt;

use super::ScenarioParams;
use crate::model::{Liouvillian, LiouvillianBuilder};

/// Which transcription to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiteralSystem {
    /// Monitored single dot, four states.
    SingleDot,
    /// Monitored double dot with a fully blocked detector, six states.
    DoubleDotBlocked,
    /// Monitored double dot with the detector open past the far dot.
    DoubleDotPartial,
}

impl fmt::Display for LiteralSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiteralSystem::SingleDot => write!(f, "single dot"),
            LiteralSystem::DoubleDotBlocked => write!(f, "double dot (blocked)"),
            LiteralSystem::DoubleDotPartial => write!(f, "double dot (partial)"),
        }
    }
}

/// Build the transcribed generator for a preset device.
pub fn literal_liouvillian(p: &ScenarioParams, which: LiteralSystem) -> Liouvillian {
    match which {
        LiteralSystem::SingleDot => single_dot(p),
        LiteralSystem::DoubleDotBlocked => double_dot_blocked(p),
        LiteralSystem::DoubleDotPartial => double_dot_partial(p),
    }
}

/// States: a = 0 (empty), b = 1 (detector), c = 2 (dot), d = 3 (both).
fn single_dot(p: &ScenarioParams) -> Liouvillian {
    let g0 = p.gamma0;
    let g0p = p.gamma0p;
    let gl = p.gamma_l;
    let glp = p.gamma_lp;
    let gr = p.gamma_r;
    let grp = p.gamma_rp;
    let mut b = LiouvillianBuilder::new(4);

    // dσ_aa = −(Γ0 + ΓL)σ_aa + Γ0σ_bb + ΓRσ_cc
    b.population_loss(0, g0 + gl);
    b.population_gain(0, 1, g0);
    b.population_gain(0, 2, gr);
    // dσ_bb = Γ0σ_aa − (Γ0 + Γ′L)σ_bb + Γ′Rσ_dd
    b.population_gain(1, 0, g0);
    b.population_loss(1, g0 + glp);
    b.population_gain(1, 3, grp);
    // dσ_cc = ΓLσ_aa − ΓRσ_cc + 2Γ′0σ_dd
    b.population_gain(2, 0, gl);
    b.population_loss(2, gr);
    b.population_gain(2, 3, 2.0 * g0p);
    // dσ_dd = Γ′Lσ_bb − (2Γ′0 + Γ′R)σ_dd
    b.population_gain(3, 1, glp);
    b.population_loss(3, 2.0 * g0p + grp);

    // No coherent couplings and all energies equal: the pair rows damp at
    // half the summed escape rates and receive the transfer terms of the
    // reservoir events their states share.
    b.pair_loss(0, 1, g0 + gl, g0 + glp);
    b.pair_loss(0, 2, g0 + gl, gr);
    b.pair_loss(0, 3, g0 + gl, 2.0 * g0p + grp);
    b.pair_loss(1, 2, g0 + glp, gr);
    b.pair_loss(1, 3, g0 + glp, 2.0 * g0p + grp);
    b.pair_loss(2, 3, gr, 2.0 * g0p + grp);
    // Detector emptying acts on b → a and d → c together.
    b.coherence_transfer((0, 2), (1, 3), g0, 2.0 * g0p);
    // Dot filling acts on a → c and b → d together.
    b.coherence_transfer((2, 3), (0, 1), gl, glp);
    // Dot draining acts on c → a and d → b together.
    b.coherence_transfer((0, 1), (2, 3), gr, grp);

    b.finish()
}

/// States: a = 0 (empty), b = 1 (detector), c = 2 (near dot), d = 3 (far
/// dot), e = 4 (detector + near), f = 5 (detector + far).
///
/// Escape rates: a, b lose Γ0 + ΓL; c loses nothing (a near electron blocks
/// the detector and has nowhere else to go); d loses ΓR; e loses 2Γ′0;
/// f loses 2Γ″0 + ΓR.
fn double_dot_blocked(p: &ScenarioParams) -> Liouvillian {
    let g0 = p.gamma0;
    let g0p = p.gamma0p;
    let g0pp = p.gamma0pp;
    let gl = p.gamma_l;
    let gr = p.gamma_r;
    let om = p.omega;
    let eps = p.epsilon;
    let du = p.delta_u;
    let mut b = LiouvillianBuilder::new(6);

    // dσ_aa = −(Γ0 + ΓL)σ_aa + Γ0σ_bb + ΓRσ_dd
    b.population_loss(0, g0 + gl);
    b.population_gain(0, 1, g0);
    b.population_gain(0, 3, gr);
    // dσ_bb = Γ0σ_aa − (Γ0 + ΓL)σ_bb + ΓRσ_ff
    b.population_gain(1, 0, g0);
    b.population_loss(1, g0 + gl);
    b.population_gain(1, 5, gr);
    // dσ_cc = ΓLσ_aa + 2Γ′0σ_ee + iΩ(σ_cd − σ_dc)   (with its mirror in dσ_dd)
    b.population_gain(2, 0, gl);
    b.population_gain(2, 4, 2.0 * g0p);
    b.coupling_population(2, 3, om);
    // dσ_dd = −ΓRσ_dd + 2Γ″0σ_ff − iΩ(σ_cd − σ_dc)
    b.population_loss(3, gr);
    b.population_gain(3, 5, 2.0 * g0pp);
    // dσ_ee = ΓLσ_bb − 2Γ′0σ_ee + iΩ(σ_ef − σ_fe)
    b.population_gain(4, 1, gl);
    b.population_loss(4, 2.0 * g0p);
    b.coupling_population(4, 5, om);
    // dσ_ff = −(2Γ″0 + ΓR)σ_ff − iΩ(σ_ef − σ_fe)
    b.population_loss(5, 2.0 * g0pp + gr);

    // dσ_ab = −(Γ0 + ΓL)σ_ab + ΓRσ_df
    b.pair_loss(0, 1, g0 + gl, g0 + gl);
    b.coherence_transfer((0, 1), (3, 5), gr, gr);
    // dσ_ac = −½(Γ0 + ΓL)σ_ac + iΩσ_ad + ½(Γ0 + 2Γ′0)σ_be
    b.pair_loss(0, 2, g0 + gl, 0.0);
    b.pair_coupling((0, 2), (0, 3), om);
    b.coherence_transfer((0, 2), (1, 4), g0, 2.0 * g0p);
    // dσ_ad = iεσ_ad − ½(Γ0 + ΓL + ΓR)σ_ad + iΩσ_ac + ½(Γ0 + 2Γ″0)σ_bf
    b.pair_detuning(0, 3, 0.0, eps);
    b.pair_loss(0, 3, g0 + gl, gr);
    b.pair_coupling((0, 3), (0, 2), om);
    b.coherence_transfer((0, 3), (1, 5), g0, 2.0 * g0pp);
    // dσ_ae = −½(Γ0 + ΓL + 2Γ′0)σ_ae + iΩσ_af
    b.pair_loss(0, 4, g0 + gl, 2.0 * g0p);
    b.pair_coupling((0, 4), (0, 5), om);
    // dσ_af = i(ε + ΔU)σ_af − ½(Γ0 + ΓL + 2Γ″0 + ΓR)σ_af + iΩσ_ae
    b.pair_detuning(0, 5, 0.0, eps + du);
    b.pair_loss(0, 5, g0 + gl, 2.0 * g0pp + gr);
    b.pair_coupling((0, 5), (0, 4), om);
    // dσ_bc = −½(Γ0 + ΓL)σ_bc + iΩσ_bd
    b.pair_loss(1, 2, g0 + gl, 0.0);
    b.pair_coupling((1, 2), (1, 3), om);
    // dσ_bd = iεσ_bd − ½(Γ0 + ΓL + ΓR)σ_bd + iΩσ_bc
    b.pair_detuning(1, 3, 0.0, eps);
    b.pair_loss(1, 3, g0 + gl, gr);
    b.pair_coupling((1, 3), (1, 2), om);
    // dσ_be = −½(Γ0 + ΓL + 2Γ′0)σ_be + iΩσ_bf
    b.pair_loss(1, 4, g0 + gl, 2.0 * g0p);
    b.pair_coupling((1, 4), (1, 5), om);
    // dσ_bf = i(ε + ΔU)σ_bf − ½(Γ0 + ΓL + 2Γ″0 + ΓR)σ_bf + iΩσ_be
    b.pair_detuning(1, 5, 0.0, eps + du);
    b.pair_loss(1, 5, g0 + gl, 2.0 * g0pp + gr);
    b.pair_coupling((1, 5), (1, 4), om);
    // dσ_cd = iεσ_cd + iΩ(σ_cc − σ_dd) − ½ΓRσ_cd + (Γ′0 + Γ″0)σ_ef
    b.pair_detuning(2, 3, 0.0, eps);
    b.pair_loss(2, 3, 0.0, gr);
    b.pair_coupling_populations(2, 3, om);
    b.coherence_transfer((2, 3), (4, 5), 2.0 * g0p, 2.0 * g0pp);
    // dσ_ce = −Γ′0σ_ce − iΩσ_de + iΩσ_cf + ΓLσ_ab
    b.pair_loss(2, 4, 0.0, 2.0 * g0p);
    b.pair_coupling((2, 4), (3, 4), om);
    b.pair_coupling((2, 4), (2, 5), om);
    b.coherence_transfer((2, 4), (0, 1), gl, gl);
    // dσ_cf = i(ε + ΔU)σ_cf − ½(2Γ″0 + ΓR)σ_cf − iΩσ_df + iΩσ_ce
    b.pair_detuning(2, 5, 0.0, eps + du);
    b.pair_loss(2, 5, 0.0, 2.0 * g0pp + gr);
    b.pair_coupling((2, 5), (3, 5), om);
    b.pair_coupling((2, 5), (2, 4), om);
    // dσ_de = −iεσ_de − ½(ΓR + 2Γ′0)σ_de − iΩσ_ce + iΩσ_df
    b.pair_detuning(3, 4, eps, 0.0);
    b.pair_loss(3, 4, gr, 2.0 * g0p);
    b.pair_coupling((3, 4), (2, 4), om);
    b.pair_coupling((3, 4), (3, 5), om);
    // dσ_df = iΔUσ_df − ½(ΓR + 2Γ″0 + ΓR)σ_df − iΩσ_cf + iΩσ_de
    b.pair_detuning(3, 5, eps, eps + du);
    b.pair_loss(3, 5, gr, 2.0 * g0pp + gr);
    b.pair_coupling((3, 5), (2, 5), om);
    b.pair_coupling((3, 5), (3, 4), om);
    // dσ_ef = i(ε + ΔU)σ_ef + iΩ(σ_ee − σ_ff) − (Γ′0 + Γ″0 + ½ΓR)σ_ef
    b.pair_detuning(4, 5, 0.0, eps + du);
    b.pair_loss(4, 5, 2.0 * g0p, 2.0 * g0pp + gr);
    b.pair_coupling_populations(4, 5, om);

    b.finish()
}

/// Same state layout as [`double_dot_blocked`]; the detector now conducts
/// past an occupied far dot, draining and refilling at Γ″0 each way.
///
/// Escape rates: d and f both lose Γ″0 + ΓR. The two deliberately preserved
/// reference coefficients live in the σ_cd and σ_ef rows; see the module
/// docs.
fn double_dot_partial(p: &ScenarioParams) -> Liouvillian {
    let g0 = p.gamma0;
    let g0p = p.gamma0p;
    let g0pp = p.gamma0pp;
    let gl = p.gamma_l;
    let gr = p.gamma_r;
    let om = p.omega;
    let eps = p.epsilon;
    let du = p.delta_u;
    let mut b = LiouvillianBuilder::new(6);

    // dσ_aa = −(Γ0 + ΓL)σ_aa + Γ0σ_bb + ΓRσ_dd
    b.population_loss(0, g0 + gl);
    b.population_gain(0, 1, g0);
    b.population_gain(0, 3, gr);
    // dσ_bb = Γ0σ_aa − (Γ0 + ΓL)σ_bb + ΓRσ_ff
    b.population_gain(1, 0, g0);
    b.population_loss(1, g0 + gl);
    b.population_gain(1, 5, gr);
    // dσ_cc = ΓLσ_aa + 2Γ′0σ_ee + iΩ(σ_cd − σ_dc)
    b.population_gain(2, 0, gl);
    b.population_gain(2, 4, 2.0 * g0p);
    b.coupling_population(2, 3, om);
    // dσ_dd = −(Γ″0 + ΓR)σ_dd + Γ″0σ_ff − iΩ(σ_cd − σ_dc)
    b.population_loss(3, g0pp + gr);
    b.population_gain(3, 5, g0pp);
    // dσ_ee = ΓLσ_bb − 2Γ′0σ_ee + iΩ(σ_ef − σ_fe)
    b.population_gain(4, 1, gl);
    b.population_loss(4, 2.0 * g0p);
    b.coupling_population(4, 5, om);
    // dσ_ff = Γ″0σ_dd − (Γ″0 + ΓR)σ_ff − iΩ(σ_ef − σ_fe)
    b.population_gain(5, 3, g0pp);
    b.population_loss(5, g0pp + gr);

    // dσ_ab = −(Γ0 + ΓL)σ_ab + ΓRσ_df
    b.pair_loss(0, 1, g0 + gl, g0 + gl);
    b.coherence_transfer((0, 1), (3, 5), gr, gr);
    // dσ_ac = −½(Γ0 + ΓL)σ_ac + iΩσ_ad + ½(Γ0 + 2Γ′0)σ_be
    b.pair_loss(0, 2, g0 + gl, 0.0);
    b.pair_coupling((0, 2), (0, 3), om);
    b.coherence_transfer((0, 2), (1, 4), g0, 2.0 * g0p);
    // dσ_ad = iεσ_ad − ½(Γ0 + ΓL + Γ″0 + ΓR)σ_ad + iΩσ_ac + ½(Γ0 + Γ″0)σ_bf
    b.pair_detuning(0, 3, 0.0, eps);
    b.pair_loss(0, 3, g0 + gl, g0pp + gr);
    b.pair_coupling((0, 3), (0, 2), om);
    b.coherence_transfer((0, 3), (1, 5), g0, g0pp);
    // dσ_ae = −½(Γ0 + ΓL + 2Γ′0)σ_ae + iΩσ_af
    b.pair_loss(0, 4, g0 + gl, 2.0 * g0p);
    b.pair_coupling((0, 4), (0, 5), om);
    // dσ_af = i(ε + ΔU)σ_af − ½(Γ0 + ΓL + Γ″0 + ΓR)σ_af + iΩσ_ae
    b.pair_detuning(0, 5, 0.0, eps + du);
    b.pair_loss(0, 5, g0 + gl, g0pp + gr);
    b.pair_coupling((0, 5), (0, 4), om);
    // dσ_bc = −½(Γ0 + ΓL)σ_bc + iΩσ_bd
    b.pair_loss(1, 2, g0 + gl, 0.0);
    b.pair_coupling((1, 2), (1, 3), om);
    // dσ_bd = iεσ_bd − ½(Γ0 + ΓL + Γ″0 + ΓR)σ_bd + iΩσ_bc
    b.pair_detuning(1, 3, 0.0, eps);
    b.pair_loss(1, 3, g0 + gl, g0pp + gr);
    b.pair_coupling((1, 3), (1, 2), om);
    // dσ_be = −½(Γ0 + ΓL + 2Γ′0)σ_be + iΩσ_bf
    b.pair_loss(1, 4, g0 + gl, 2.0 * g0p);
    b.pair_coupling((1, 4), (1, 5), om);
    // dσ_bf = i(ε + ΔU)σ_bf − ½(Γ0 + ΓL + Γ″0 + ΓR)σ_bf + iΩσ_be + ½(Γ0 + Γ″0)σ_ad
    b.pair_detuning(1, 5, 0.0, eps + du);
    b.pair_loss(1, 5, g0 + gl, g0pp + gr);
    b.pair_coupling((1, 5), (1, 4), om);
    b.coherence_transfer((1, 5), (0, 3), g0, g0pp);
    // dσ_cd = iεσ_cd + iΩ(σ_cc − σ_dd) − ½(Γ″0 + ΓR)σ_cd + ½(Γ′0 + Γ″0)σ_ef
    //
    // Reference coefficient: the channel rules would give ½(2Γ′0 + Γ″0) on
    // the σ_ef gain.
    b.pair_detuning(2, 3, 0.0, eps);
    b.pair_loss(2, 3, 0.0, g0pp + gr);
    b.pair_coupling_populations(2, 3, om);
    b.coherence_transfer_total((2, 3), (4, 5), g0p + g0pp);
    // dσ_ce = −Γ′0σ_ce − iΩσ_de + iΩσ_cf + ΓLσ_ab
    b.pair_loss(2, 4, 0.0, 2.0 * g0p);
    b.pair_coupling((2, 4), (3, 4), om);
    b.pair_coupling((2, 4), (2, 5), om);
    b.coherence_transfer((2, 4), (0, 1), gl, gl);
    // dσ_cf = i(ε + ΔU)σ_cf − ½(Γ″0 + ΓR)σ_cf − iΩσ_df + iΩσ_ce
    b.pair_detuning(2, 5, 0.0, eps + du);
    b.pair_loss(2, 5, 0.0, g0pp + gr);
    b.pair_coupling((2, 5), (3, 5), om);
    b.pair_coupling((2, 5), (2, 4), om);
    // dσ_de = −iεσ_de − ½(Γ″0 + ΓR + 2Γ′0)σ_de − iΩσ_ce + iΩσ_df
    b.pair_detuning(3, 4, eps, 0.0);
    b.pair_loss(3, 4, g0pp + gr, 2.0 * g0p);
    b.pair_coupling((3, 4), (2, 4), om);
    b.pair_coupling((3, 4), (3, 5), om);
    // dσ_df = iΔUσ_df − (Γ″0 + ΓR)σ_df − iΩσ_cf + iΩσ_de
    b.pair_detuning(3, 5, eps, eps + du);
    b.pair_loss(3, 5, g0pp + gr, g0pp + gr);
    b.pair_coupling((3, 5), (2, 5), om);
    b.pair_coupling((3, 5), (3, 4), om);
    // dσ_ef = i(ε + ΔU)σ_ef + iΩ(σ_ee − σ_ff) − ½(ΓR + Γ′0 + 2Γ″0)σ_ef
    //
    // Reference coefficient: the channel rules would give ½(2Γ′0 + Γ″0 + ΓR).
    b.pair_detuning(4, 5, 0.0, eps + du);
    b.pair_loss_total(4, 5, gr + g0p + 2.0 * g0pp);
    b.pair_coupling_populations(4, 5, om);

    b.finish()
}
