//! Linear-optical elements as mode-coupling matrices.
//!
//! An element maps the creation operator of each input mode to a linear
//! combination of output-mode creation operators:
//! `a_in[j]^† -> sum_i matrix[(i, j)] a_out[i]^†`.
//!
//! Polarization elements use Jones matrices in the `(H, V)` basis with the
//! wave-plate angle measured from the horizontal axis. Beam splitters use the
//! symmetric convention `t = sqrt(T)`, `r = i sqrt(1 - T)`. A polarizing beam
//! splitter transmits H and exchanges the V modes of its two paths with
//! reflection amplitude `+1` on both sides.
//!
//! Lossy elements (filters) are isometries into extra scalar loss modes that
//! the circuit runner pins to vacuum when it heralds.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{Mode, ModeRegistry};

const PHYSICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalElement {
    name: String,
    inputs: Vec<Mode>,
    outputs: Vec<Mode>,
    matrix: DMatrix<Complex64>,
    loss_modes: Vec<Mode>,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn distinct(modes: &[Mode]) -> bool {
    let set: HashSet<_> = modes.iter().collect();
    set.len() == modes.len()
}

fn check_transmissivity(name: &'static str, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) || t.is_nan() {
        return Err(Error::domain(name, t, "[0, 1]"));
    }
    Ok(())
}

impl OpticalElement {
    /// Builds an element and checks that it is physical: no singular value
    /// above one, unitary when lossless, an isometry when loss modes are
    /// listed.
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<Mode>,
        outputs: Vec<Mode>,
        matrix: DMatrix<Complex64>,
        loss_modes: Vec<Mode>,
    ) -> Result<Self> {
        let name = name.into();
        let unphysical = |reason: String| Error::Unphysical {
            name: name.clone(),
            reason,
        };
        if matrix.nrows() != outputs.len() || matrix.ncols() != inputs.len() {
            return Err(unphysical(format!(
                "matrix is {}x{} for {} outputs and {} inputs",
                matrix.nrows(),
                matrix.ncols(),
                outputs.len(),
                inputs.len()
            )));
        }
        if !distinct(&inputs) || !distinct(&outputs) {
            return Err(Error::BadModes(format!("{name}: repeated mode")));
        }
        if loss_modes.iter().any(|m| !outputs.contains(m)) {
            return Err(Error::BadModes(format!(
                "{name}: loss mode is not an output"
            )));
        }

        let sigma_max = matrix
            .clone()
            .singular_values()
            .iter()
            .fold(0.0f64, |a, &s| a.max(s));
        if sigma_max > 1.0 + PHYSICAL_TOL {
            return Err(unphysical(format!("largest singular value {sigma_max}")));
        }
        let gram = matrix.adjoint() * &matrix;
        let identity = DMatrix::<Complex64>::identity(inputs.len(), inputs.len());
        let dev = (gram - identity)
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()));
        if dev > PHYSICAL_TOL {
            return Err(unphysical(format!("not an isometry (deviation {dev:e})")));
        }
        if loss_modes.is_empty() && matrix.nrows() != matrix.ncols() {
            return Err(unphysical("lossless element must be square".into()));
        }

        Ok(OpticalElement {
            name,
            inputs,
            outputs,
            matrix,
            loss_modes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[Mode] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Mode] {
        &self.outputs
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn loss_modes(&self) -> &[Mode] {
        &self.loss_modes
    }

    pub fn is_lossless(&self) -> bool {
        self.loss_modes.is_empty()
    }

    /// Same element acting on relabelled modes.
    pub fn relabel(&self, map: impl Fn(Mode) -> Mode) -> OpticalElement {
        OpticalElement {
            name: self.name.clone(),
            inputs: self.inputs.iter().map(|&m| map(m)).collect(),
            outputs: self.outputs.iter().map(|&m| map(m)).collect(),
            matrix: self.matrix.clone(),
            loss_modes: self.loss_modes.iter().map(|&m| map(m)).collect(),
        }
    }
}

fn jones(
    name: String,
    registry: &ModeRegistry,
    spatial: &str,
    m: [[Complex64; 2]; 2],
) -> Result<OpticalElement> {
    let (h, v) = registry.path(spatial)?;
    let matrix = DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]);
    OpticalElement::new(name, vec![h, v], vec![h, v], matrix, vec![])
}

/// Half-wave plate with its optical axis at `angle` radians from horizontal:
/// `[[cos 2a, sin 2a], [sin 2a, -cos 2a]]`.
pub fn hwp(angle: f64, registry: &ModeRegistry, spatial: &str) -> Result<OpticalElement> {
    let (s, c) = (2.0 * angle).sin_cos();
    jones(
        format!("hwp({:.4}deg)", angle.to_degrees()),
        registry,
        spatial,
        [[re(c), re(s)], [re(s), re(-c)]],
    )
}

/// Quarter-wave plate with its fast axis at `angle` radians from horizontal:
/// `R(-a) diag(1, i) R(a)`.
pub fn qwp(angle: f64, registry: &ModeRegistry, spatial: &str) -> Result<OpticalElement> {
    let (s, c) = angle.sin_cos();
    let i = Complex64::i();
    let off = (re(1.0) - i) * s * c;
    jones(
        format!("qwp({:.4}deg)", angle.to_degrees()),
        registry,
        spatial,
        [[re(c * c) + i * s * s, off], [off, re(s * s) + i * c * c]],
    )
}

/// Polarizing beam splitter between two paths: H passes, V changes path.
pub fn pbs(registry: &ModeRegistry, path_a: &str, path_b: &str) -> Result<OpticalElement> {
    let (ah, av) = registry.path(path_a)?;
    let (bh, bv) = registry.path(path_b)?;
    let modes = vec![ah, av, bh, bv];
    let one = re(1.0);
    let zero = re(0.0);
    #[rustfmt::skip]
    let matrix = DMatrix::from_row_slice(4, 4, &[
        one,  zero, zero, zero,
        zero, zero, zero, one,
        zero, zero, one,  zero,
        zero, one,  zero, zero,
    ]);
    OpticalElement::new(
        format!("pbs({path_a},{path_b})"),
        modes.clone(),
        modes,
        matrix,
        vec![],
    )
}

/// Polarization-dependent beam splitter with intensity transmissivities
/// `t_h` and `t_v`.
pub fn pdbs(
    t_h: f64,
    t_v: f64,
    registry: &ModeRegistry,
    path_a: &str,
    path_b: &str,
) -> Result<OpticalElement> {
    check_transmissivity("T_H", t_h)?;
    check_transmissivity("T_V", t_v)?;
    let (ah, av) = registry.path(path_a)?;
    let (bh, bv) = registry.path(path_b)?;
    let modes = vec![ah, av, bh, bv];
    let mut matrix = DMatrix::from_element(4, 4, re(0.0));
    for (k, t) in [(0usize, t_h), (1usize, t_v)] {
        let tt = re(t.sqrt());
        let rr = Complex64::new(0.0, (1.0 - t).sqrt());
        let (a, b) = (k, k + 2);
        matrix[(a, a)] = tt;
        matrix[(b, b)] = tt;
        matrix[(b, a)] = rr;
        matrix[(a, b)] = rr;
    }
    OpticalElement::new(
        format!("pdbs({t_h:.6},{t_v:.6};{path_a},{path_b})"),
        modes.clone(),
        modes,
        matrix,
        vec![],
    )
}

/// Polarization-independent beam splitter.
pub fn beam_splitter(
    t: f64,
    registry: &ModeRegistry,
    path_a: &str,
    path_b: &str,
) -> Result<OpticalElement> {
    let mut e = pdbs(t, t, registry, path_a, path_b)?;
    e.name = format!("bs({t:.6};{path_a},{path_b})");
    Ok(e)
}

/// Two-mode beam splitter on scalar (or arbitrary) modes.
pub fn mode_beam_splitter(t: f64, a: Mode, b: Mode) -> Result<OpticalElement> {
    check_transmissivity("T", t)?;
    let tt = re(t.sqrt());
    let rr = Complex64::new(0.0, (1.0 - t).sqrt());
    let matrix = DMatrix::from_row_slice(2, 2, &[tt, rr, rr, tt]);
    OpticalElement::new(
        format!("bs({t:.6})"),
        vec![a, b],
        vec![a, b],
        matrix,
        vec![],
    )
}

/// Neutral-density filter: each filtered mode keeps amplitude `sqrt(T)` and
/// leaks `sqrt(1 - T)` into its own loss mode.
pub fn ndf(t: f64, modes: &[Mode], loss: &[Mode]) -> Result<OpticalElement> {
    check_transmissivity("T", t)?;
    if modes.len() != loss.len() {
        return Err(Error::BadModes(format!(
            "ndf needs one loss mode per filtered mode ({} vs {})",
            modes.len(),
            loss.len()
        )));
    }
    let k = modes.len();
    let mut outputs = modes.to_vec();
    outputs.extend_from_slice(loss);
    let mut matrix = DMatrix::from_element(2 * k, k, re(0.0));
    for j in 0..k {
        matrix[(j, j)] = re(t.sqrt());
        matrix[(k + j, j)] = re((1.0 - t).sqrt());
    }
    OpticalElement::new(
        format!("ndf({t:.6})"),
        modes.to_vec(),
        outputs,
        matrix,
        loss.to_vec(),
    )
}

/// Phase shifter: `a^† -> e^{i phi} a^†`.
pub fn phase_shift(phi: f64, mode: Mode) -> Result<OpticalElement> {
    let matrix = DMatrix::from_element(1, 1, Complex64::from_polar(1.0, phi));
    OpticalElement::new(
        format!("phase({:.4}deg)", phi.to_degrees()),
        vec![mode],
        vec![mode],
        matrix,
        vec![],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Polarization;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn registry() -> ModeRegistry {
        ModeRegistry::with_paths(&["1", "2"]).unwrap()
    }

    fn unitarity_defect(e: &OpticalElement) -> f64 {
        let m = e.matrix();
        let g = m.adjoint() * m;
        let n = g.nrows();
        (g - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .fold(0.0, |a, z| a.max(z.norm()))
    }

    #[test]
    fn hwp_matrices() {
        let reg = registry();
        let e = hwp((-30f64).to_radians(), &reg, "1").unwrap();
        let m = e.matrix();
        // H column
        assert!((m[(0, 0)] - re(0.5)).norm() < 1e-15);
        assert!((m[(1, 0)] - re(-(3f64.sqrt()) / 2.0)).norm() < 1e-15);

        let e = hwp((22.5f64).to_radians(), &reg, "1").unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.matrix()[(0, 0)] - re(s)).norm() < 1e-15);
        assert!((e.matrix()[(1, 0)] - re(s)).norm() < 1e-15);

        let e = hwp(0.0, &reg, "1").unwrap();
        assert!((e.matrix()[(1, 1)] - re(-1.0)).norm() < 1e-15);

        let e = hwp(PI / 4.0, &reg, "1").unwrap();
        assert!((e.matrix()[(1, 0)] - re(1.0)).norm() < 1e-15);
        assert!((e.matrix()[(0, 1)] - re(1.0)).norm() < 1e-15);
        assert!(e.matrix()[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn pbs_routes_v() {
        let reg = registry();
        let e = pbs(&reg, "1", "2").unwrap();
        let (ah, av) = reg.path("1").unwrap();
        let (bh, bv) = reg.path("2").unwrap();
        let col = |m: Mode| e.inputs().iter().position(|&x| x == m).unwrap();
        let row = |m: Mode| e.outputs().iter().position(|&x| x == m).unwrap();
        assert_eq!(e.matrix()[(row(ah), col(ah))], re(1.0));
        assert_eq!(e.matrix()[(row(bv), col(av))].norm(), 1.0);
        assert_eq!(e.matrix()[(row(av), col(bv))].norm(), 1.0);
        assert_eq!(e.matrix()[(row(bh), col(bh))], re(1.0));
    }

    #[test]
    fn pdbs_single_photon_transmission() {
        let reg = registry();
        let e = pdbs(1.0, 1.0 / 3.0, &reg, "1", "2").unwrap();
        let (ah, av) = reg.path("1").unwrap();
        let ia = e.inputs().iter().position(|&m| m == av).unwrap();
        assert!((e.matrix()[(ia, ia)].norm() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let ih = e.inputs().iter().position(|&m| m == ah).unwrap();
        assert_eq!(e.matrix()[(ih, ih)], re(1.0));
    }

    #[test]
    fn transmissivity_domain() {
        let reg = registry();
        assert!(matches!(
            pdbs(1.2, 0.5, &reg, "1", "2"),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            pdbs(1.0, -0.1, &reg, "1", "2"),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            ndf(1.5, &[Mode(0)], &[Mode(1)]),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn unknown_path() {
        let reg = registry();
        assert!(matches!(hwp(0.0, &reg, "c"), Err(Error::UnknownPath(_))));
    }

    #[test]
    fn identities() {
        let reg = registry();
        let e = pdbs(1.0, 1.0, &reg, "1", "2").unwrap();
        let n = e.matrix().nrows();
        assert_eq!(e.matrix(), &DMatrix::<Complex64>::identity(n, n));
        let e = phase_shift(0.0, Mode(0)).unwrap();
        assert_eq!(e.matrix()[(0, 0)], re(1.0));
        let e = phase_shift(PI, Mode(0)).unwrap();
        assert!((e.matrix()[(0, 0)] - re(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn ndf_is_isometry() {
        let e = ndf(0.5, &[Mode(0), Mode(1)], &[Mode(2), Mode(3)]).unwrap();
        assert_eq!(e.matrix().shape(), (4, 2));
        assert!(unitarity_defect(&e) < 1e-12);
        assert!(!e.is_lossless());
    }

    #[test]
    fn rejects_amplifying_matrix() {
        let m = DMatrix::from_element(1, 1, re(1.1));
        let err = OpticalElement::new("gain", vec![Mode(0)], vec![Mode(0)], m, vec![]);
        assert!(matches!(err, Err(Error::Unphysical { .. })));
    }

    #[test]
    fn rejects_lossy_without_loss_modes() {
        let m = DMatrix::from_element(1, 1, re(0.5));
        let err = OpticalElement::new("absorber", vec![Mode(0)], vec![Mode(0)], m, vec![]);
        assert!(matches!(err, Err(Error::Unphysical { .. })));
    }

    #[test]
    fn qwp_is_unitary() {
        let reg = registry();
        let e = qwp(0.3, &reg, "1").unwrap();
        assert!(unitarity_defect(&e) < 1e-12);
        // fast axis horizontal: V picks up i
        let e = qwp(0.0, &reg, "1").unwrap();
        assert!((e.matrix()[(1, 1)] - Complex64::i()).norm() < 1e-15);
        let _ = Polarization::H;
    }

    proptest! {
        #[test]
        fn lossless_elements_are_unitary(angle in -PI..PI, t_h in 0.0f64..=1.0, t_v in 0.0f64..=1.0) {
            let reg = registry();
            for e in [
                hwp(angle, &reg, "1").unwrap(),
                qwp(angle, &reg, "2").unwrap(),
                pbs(&reg, "1", "2").unwrap(),
                pdbs(t_h, t_v, &reg, "1", "2").unwrap(),
                phase_shift(angle, Mode(3)).unwrap(),
            ] {
                prop_assert!(unitarity_defect(&e) < 1e-12, "{}", e.name());
            }
        }

        #[test]
        fn hwp_is_involutive(angle in -PI..PI) {
            let reg = registry();
            let m = hwp(angle, &reg, "1").unwrap().matrix().clone();
            let sq = &m * &m;
            let dev = (sq - DMatrix::<Complex64>::identity(2, 2)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
            prop_assert!(dev < 1e-12);
        }
    }
}
