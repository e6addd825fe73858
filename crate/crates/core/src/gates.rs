//! Two-qubit gate constructions on polarization-encoded photons.
//!
//! * [`cphase_pi`]: heralded controlled-sign gate built from one
//!   polarization-dependent beam splitter (`T_H = 1`, `T_V = 1/3`). On the
//!   one-photon-per-path subspace it acts as `diag(1, 1/sqrt3, 1/sqrt3, -1/3)`
//!   in the `HH, HV, VH, VV` basis (signal first).
//! * [`cphase_tunable`]: heralded phase gate with state-dependent success
//!   amplitudes `1, sqrt(A_C), sqrt(A_C), A_C e^{i phi}` depending on how many
//!   V photons enter the interaction interferometer.
//! * [`qnd_herald`]: black-box presence detector, success amplitude `1/sqrt2`.
//! * [`ppg`]: the programmable-phase gate realised as a single PBS followed
//!   by a one-photon herald on the control path.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::circuit::{apply_element, ConditionalMap, HeraldRule, Step};
use crate::elements::{hwp, pbs, pdbs, OpticalElement};
use crate::error::{Error, Result};
use crate::fock::{ModeRegistry, Pattern, StateVector};

/// Optimal linear-optics success probability of a c-phase gate with phase
/// `phi` in `[0, pi]` using vacuum ancillae.
pub fn p_c(phi: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&phi) {
        return Err(Error::domain("phi", phi, "[0, pi]"));
    }
    let s = (phi / 2.0).sin().abs();
    let denom = 1.0 + 2.0 * s + 2f64.powf(1.5) * ((PI - phi) / 4.0).sin() * s.sqrt();
    Ok(denom.powi(-2))
}

/// Phase and success amplitude of a tunable c-phase gate; `a_c^2 = p_c(phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunableGateParams {
    phi: f64,
    a_c: f64,
}

impl TunableGateParams {
    pub fn new(phi: f64) -> Result<Self> {
        let a_c = p_c(phi)?.sqrt();
        Ok(TunableGateParams { phi, a_c })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn a_c(&self) -> f64 {
        self.a_c
    }

    /// Heralded action on `HH, HV, VH, VV` (signal polarization first).
    pub fn heralded_matrix(&self) -> Matrix4<Complex64> {
        let r = self.a_c.sqrt();
        Matrix4::from_diagonal(&nalgebra::Vector4::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(r, 0.0),
            Complex64::new(r, 0.0),
            Complex64::from_polar(self.a_c, self.phi),
        ))
    }
}

/// Fixed controlled-sign gate between the signal and control paths.
/// Success is heralded later by one photon per path (see [`qnd_herald`]).
pub fn cphase_pi(registry: &ModeRegistry, signal: &str, control: &str) -> Result<Vec<Step>> {
    Ok(vec![Step::Element(pdbs(
        1.0,
        1.0 / 3.0,
        registry,
        signal,
        control,
    )?)])
}

/// Tunable c-phase gate as a conditional amplitude map on the V modes of
/// the two paths (the photons that enter the interaction interferometer).
pub fn cphase_tunable(
    params: &TunableGateParams,
    registry: &ModeRegistry,
    signal: &str,
    control: &str,
) -> Result<ConditionalMap> {
    let (_, sv) = registry.path(signal)?;
    let (_, cv) = registry.path(control)?;
    let one = Complex64::new(1.0, 0.0);
    let half = Complex64::new(params.a_c.sqrt(), 0.0);
    Ok(ConditionalMap {
        name: format!(
            "cphase({:.4}deg;{signal},{control})",
            params.phi.to_degrees()
        ),
        modes: (sv, cv),
        factors: [
            [one, half],
            [half, Complex64::from_polar(params.a_c, params.phi)],
        ],
    })
}

/// Presence check on a path: one photon summed over H and V, polarization
/// untouched, success amplitude `1/sqrt2`.
pub fn qnd_herald(registry: &ModeRegistry, path: &str) -> Result<HeraldRule> {
    let (h, v) = registry.path(path)?;
    Ok(
        HeraldRule::new(format!("qnd({path})"), Pattern::new().total(&[h, v], 1))
            .with_success_amplitude(FRAC_1_SQRT_2),
    )
}

/// PBS between signal and control paths, heralded on exactly one photon
/// leaving by the control path. With the signal elsewhere this projects the
/// control onto H.
pub fn ppg(registry: &ModeRegistry, signal: &str, control: &str) -> Result<Vec<Step>> {
    let (h, v) = registry.path(control)?;
    Ok(vec![
        Step::Element(pbs(registry, signal, control)?),
        Step::Herald(HeraldRule::new(
            format!("ppg({control})"),
            Pattern::new().total(&[h, v], 1),
        )),
    ])
}

/// Wave plate taking `H -> (sqrt(A_C) H + V) / sqrt(1 + A_C)`.
pub fn rebalance_h(
    params: &TunableGateParams,
    registry: &ModeRegistry,
    path: &str,
) -> Result<OpticalElement> {
    hwp(0.5 * 1f64.atan2(params.a_c.sqrt()), registry, path)
}

/// Wave plate taking `V -> (sqrt(A_C) H - V) / sqrt(1 + A_C)`.
pub fn rebalance_v(
    params: &TunableGateParams,
    registry: &ModeRegistry,
    path: &str,
) -> Result<OpticalElement> {
    hwp(0.5 * params.a_c.sqrt().atan2(1.0), registry, path)
}

/// Heralded two-qubit matrix of a gate sub-circuit: every basis input
/// `|p_s, p_c>` is propagated and projected onto one photon per path.
/// Rows and columns are ordered `HH, HV, VH, VV` (signal first).
pub fn heralded_matrix(
    steps: &[Step],
    registry: &Arc<ModeRegistry>,
    signal: &str,
    control: &str,
) -> Result<Matrix4<Complex64>> {
    let (sh, sv) = registry.path(signal)?;
    let (ch, cv) = registry.path(control)?;
    let pols = [(sh, ch), (sh, cv), (sv, ch), (sv, cv)];
    let herald = Pattern::new().total(&[sh, sv], 1).total(&[ch, cv], 1);
    let mut m = Matrix4::zeros();
    for (col, &(s, c)) in pols.iter().enumerate() {
        let mut state = StateVector::vacuum(registry.clone())?
            .create(s)?
            .create(c)?;
        for step in steps {
            state = match step {
                Step::Element(e) => apply_element(&state, e)?,
                Step::Map(map) => map.apply(&state)?,
                _ => {
                    return Err(Error::Circuit(format!(
                        "step {step} is not allowed inside a gate"
                    )))
                }
            };
        }
        let (kept, _) = state.project(&herald)?;
        for (row, &(s2, c2)) in pols.iter().enumerate() {
            m[(row, col)] = kept.amplitude_of(&[(s2, 1), (c2, 1)]);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reg() -> Arc<ModeRegistry> {
        Arc::new(ModeRegistry::with_paths(&["1", "2", "c"]).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn p_c_values() {
        assert_relative_eq!(p_c(0.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(p_c(PI).unwrap(), 1.0 / 9.0, epsilon = 1e-12);
        assert!(matches!(p_c(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(p_c(PI + 1e-9), Err(Error::Domain { .. })));
    }

    #[test]
    fn p_c_bounded() {
        for k in 0..=1000 {
            let p = p_c(PI * k as f64 / 1000.0).unwrap();
            assert!(p > 0.0 && p <= 1.0);
        }
    }

    #[test]
    fn tunable_params() {
        let p = TunableGateParams::new(PI).unwrap();
        assert_relative_eq!(p.a_c(), 1.0 / 3.0, epsilon = 1e-12);
        let p = TunableGateParams::new(0.0).unwrap();
        assert_relative_eq!(p.a_c(), 1.0, epsilon = 1e-12);
        let m = p.heralded_matrix();
        assert!((m - Matrix4::identity()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn cphase_pi_is_controlled_sign() {
        let r = reg();
        let steps = cphase_pi(&r, "1", "c").unwrap();
        let m = heralded_matrix(&steps, &r, "1", "c").unwrap();
        let s3 = 1.0 / 3f64.sqrt();
        let expect = [c(1.0, 0.0), c(s3, 0.0), c(s3, 0.0), c(-1.0 / 3.0, 0.0)];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { expect[i] } else { c(0.0, 0.0) };
                assert!(
                    (m[(i, j)] - want).norm() < 1e-12,
                    "({i},{j}) = {}",
                    m[(i, j)]
                );
            }
        }
    }

    #[test]
    fn tunable_map_matches_listed_amplitudes() {
        let r = reg();
        let phi = PI / 2.0;
        let params = TunableGateParams::new(phi).unwrap();
        let a = params.a_c();
        assert_relative_eq!(a, p_c(phi).unwrap().sqrt(), epsilon = 1e-15);
        let gate = cphase_tunable(&params, &r, "1", "c").unwrap();
        let m = heralded_matrix(&[Step::Map(gate)], &r, "1", "c").unwrap();
        assert!((m - params.heralded_matrix())
            .iter()
            .all(|z| z.norm() < 1e-15));
        assert_relative_eq!(m[(1, 1)].re, a.sqrt(), epsilon = 1e-15);

        // photon in the other arm: V2 Vc -> sqrt(A) V2 Vc, V2 Hc unchanged
        let (_, v2) = r.path("2").unwrap();
        let (hc, vc) = r.path("c").unwrap();
        let gate = cphase_tunable(&params, &r, "1", "c").unwrap();
        let vac = StateVector::vacuum(r.clone()).unwrap();
        let s = vac.create(v2).unwrap().create(vc).unwrap();
        assert_relative_eq!(
            gate.apply(&s).unwrap().amplitude_of(&[(v2, 1), (vc, 1)]).re,
            a.sqrt()
        );
        let s = vac.create(v2).unwrap().create(hc).unwrap();
        assert_relative_eq!(
            gate.apply(&s).unwrap().amplitude_of(&[(v2, 1), (hc, 1)]).re,
            1.0
        );
    }

    #[test]
    fn tunable_at_pi_agrees_with_fixed_gate_phases() {
        let r = reg();
        let fixed = heralded_matrix(&cphase_pi(&r, "1", "c").unwrap(), &r, "1", "c").unwrap();
        let tunable = TunableGateParams::new(PI).unwrap().heralded_matrix();
        // same phases; amplitudes 1, 1/sqrt3, 1/sqrt3, 1/3 vs 1, sqrt(1/3), sqrt(1/3), 1/3
        for k in 0..4 {
            assert!((fixed[(k, k)] - tunable[(k, k)]).norm() < 1e-12);
        }
    }

    #[test]
    fn tunable_map_is_contraction() {
        for k in 0..=1000 {
            let phi = PI * k as f64 / 1000.0;
            let m = TunableGateParams::new(phi).unwrap().heralded_matrix();
            let smax = m
                .singular_values()
                .iter()
                .fold(0.0f64, |acc, &s| acc.max(s));
            assert!(smax <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn tunable_domain() {
        assert!(TunableGateParams::new(4.0).is_err());
    }

    #[test]
    fn qnd_scales_probability() {
        let r = reg();
        let (hc, vc) = r.path("c").unwrap();
        let vac = StateVector::vacuum(r.clone()).unwrap();
        let ctl = vac
            .create(hc)
            .unwrap()
            .scale(c(0.6, 0.0))
            .add(&vac.create(vc).unwrap().scale(c(0.0, 0.8)))
            .unwrap();
        let q = qnd_herald(&r, "c").unwrap();
        let (once, p) = crate::circuit::run_heralded(&ctl, &q).unwrap();
        assert_relative_eq!(p, 0.5, epsilon = 1e-15);
        let fid = ctl.inner(&once).unwrap().norm_sqr() / (p * ctl.norm_sqr());
        assert_relative_eq!(fid, 1.0, epsilon = 1e-14);
        let (_, p2) = crate::circuit::run_heralded(&once, &q).unwrap();
        assert_relative_eq!(p2, 0.25, epsilon = 1e-15);
        let (_, p0) = crate::circuit::run_heralded(&vac, &q).unwrap();
        assert_eq!(p0, 0.0);
    }

    #[test]
    fn ppg_keeps_horizontal_control() {
        let r = reg();
        let (hc, vc) = r.path("c").unwrap();
        let (h1, _) = r.path("1").unwrap();
        let vac = StateVector::vacuum(r.clone()).unwrap();
        let s = FRAC_1_SQRT_2;
        // signal parked in path 1, control diagonal
        let state = vac
            .create(hc)
            .unwrap()
            .add(&vac.create(vc).unwrap())
            .unwrap()
            .scale(c(s, 0.0))
            .create(h1)
            .unwrap();
        let circuit = crate::circuit::Circuit::new(r.clone(), ppg(&r, "2", "c").unwrap());
        let out = circuit.run(&state).unwrap();
        let b = &out.branches[0];
        assert_relative_eq!(b.probability(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(
            b.state.amplitude_of(&[(h1, 1), (hc, 1)]).re,
            s,
            epsilon = 1e-15
        );

        let only_v = vac.create(vc).unwrap().create(h1).unwrap();
        assert_eq!(circuit.run(&only_v).unwrap().success_probability(), 0.0);
    }

    #[test]
    fn rebalancing_plates() {
        let r = reg();
        let params = TunableGateParams::new(2.0).unwrap();
        let a = params.a_c();
        let n = (1.0 + a).sqrt();
        let e = rebalance_h(&params, &r, "1").unwrap();
        assert_relative_eq!(e.matrix()[(0, 0)].re, a.sqrt() / n, epsilon = 1e-15);
        assert_relative_eq!(e.matrix()[(1, 0)].re, 1.0 / n, epsilon = 1e-15);
        let e = rebalance_v(&params, &r, "2").unwrap();
        assert_relative_eq!(e.matrix()[(0, 1)].re, a.sqrt() / n, epsilon = 1e-15);
        assert_relative_eq!(e.matrix()[(1, 1)].re, -1.0 / n, epsilon = 1e-15);
    }
}
