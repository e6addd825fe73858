//! Evolution of states through elements, heralds and measurements.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::elements::OpticalElement;
use crate::error::{Error, Result};
use crate::fock::{FockState, Mode, ModeRegistry, Pattern, StateVector};

fn sqrt_factorial(n: u8) -> f64 {
    (2..=n as u32).map(|k| k as f64).product::<f64>().sqrt()
}

/// Substitutes every input creation operator by its image under the element
/// matrix and expands the product.
pub fn apply_element(state: &StateVector, elem: &OpticalElement) -> Result<StateVector> {
    for &m in elem.inputs().iter().chain(elem.outputs()) {
        state.check_mode(m)?;
    }
    // nonzero entries of each column: (output mode, coefficient)
    let columns: Vec<Vec<(Mode, Complex64)>> = (0..elem.inputs().len())
        .map(|j| {
            elem.outputs()
                .iter()
                .enumerate()
                .filter_map(|(i, &m)| {
                    let z = elem.matrix()[(i, j)];
                    (z != Complex64::new(0.0, 0.0)).then_some((m, z))
                })
                .collect()
        })
        .collect();

    let mut out: BTreeMap<FockState, Complex64> = BTreeMap::new();
    for (fock, amp) in state.terms() {
        // |n> = prod (a^†)^n / sqrt(n!) |0>; work with bare monomials
        let norm: f64 = fock
            .occupations()
            .iter()
            .map(|&n| sqrt_factorial(n))
            .product();
        let mut rest = fock.clone();
        for &m in elem.inputs() {
            rest.set(m, 0);
        }
        let mut poly: BTreeMap<FockState, Complex64> = BTreeMap::new();
        poly.insert(rest, amp / norm);

        for (j, &m) in elem.inputs().iter().enumerate() {
            for _ in 0..fock.get(m) {
                let mut next = BTreeMap::new();
                for (mono, coef) in &poly {
                    for &(target, z) in &columns[j] {
                        let mut e = mono.clone();
                        e.set(target, e.get(target) + 1);
                        *next.entry(e).or_insert(Complex64::new(0.0, 0.0)) += coef * z;
                    }
                }
                poly = next;
            }
        }

        for (mono, coef) in poly {
            let f: f64 = mono
                .occupations()
                .iter()
                .map(|&n| sqrt_factorial(n))
                .product();
            *out.entry(mono).or_insert(Complex64::new(0.0, 0.0)) += coef * f;
        }
    }
    Ok(state.replace_terms(out))
}

/// Detection pattern that must be observed for a run to continue.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldRule {
    pub pattern: Pattern,
    pub label: String,
    /// Photon-number-resolving detection. Threshold detectors only see
    /// "click / no click".
    pub resolving: bool,
    /// Extra amplitude factor of a black-box herald (e.g. the success
    /// amplitude of a presence detector).
    pub success_amplitude: f64,
}

impl HeraldRule {
    pub fn new(label: impl Into<String>, pattern: Pattern) -> Self {
        HeraldRule {
            pattern,
            label: label.into(),
            resolving: true,
            success_amplitude: 1.0,
        }
    }

    pub fn threshold(mut self) -> Self {
        self.resolving = false;
        self
    }

    pub fn with_success_amplitude(mut self, amplitude: f64) -> Self {
        self.success_amplitude = amplitude;
        self
    }
}

/// Scalar (loss) modes are always required to stay empty.
fn pin_losses(state: &StateVector) -> Result<StateVector> {
    let loss = loss_modes(state.registry());
    if loss.is_empty() {
        return Ok(state.clone());
    }
    let pattern = loss.iter().fold(Pattern::new(), |p, &m| p.exact(m, 0));
    Ok(state.project(&pattern)?.0)
}

pub fn loss_modes(registry: &ModeRegistry) -> Vec<Mode> {
    registry
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| l.polarization.is_none())
        .map(|(i, _)| Mode(i))
        .collect()
}

/// Post-selects on `herald`. The returned probability is the squared norm of
/// the residual, i.e. the cumulative success probability of the branch.
pub fn run_heralded(state: &StateVector, herald: &HeraldRule) -> Result<(StateVector, f64)> {
    let (kept, _) = state.project_with(&herald.pattern, herald.resolving)?;
    let mut kept = pin_losses(&kept)?;
    if herald.success_amplitude != 1.0 {
        kept = kept.scale(Complex64::new(herald.success_amplitude, 0.0));
    }
    let p = kept.norm_sqr();
    Ok((kept, p))
}

/// Single-photon polarization measurement basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub name: String,
    /// `(label, (u_H, u_V))`: outcome projects onto `u_H |H> + u_V |V>`.
    pub outcomes: Vec<(String, [Complex64; 2])>,
}

impl Basis {
    /// Diagonal / anti-diagonal: `(|H> +- |V>) / sqrt 2`.
    pub fn diagonal() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Basis {
            name: "DA".into(),
            outcomes: vec![("D".into(), [s, s]), ("A".into(), [s, -s])],
        }
    }

    pub fn rectilinear() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Basis {
            name: "HV".into(),
            outcomes: vec![("H".into(), [one, zero]), ("V".into(), [zero, one])],
        }
    }

    pub fn by_name(name: &str) -> Option<Basis> {
        match name {
            "DA" => Some(Basis::diagonal()),
            "HV" => Some(Basis::rectilinear()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub efficiency: f64,
    pub basis: Basis,
}

impl DetectorConfig {
    pub fn new(efficiency: f64, basis: Basis) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::domain("detector efficiency", efficiency, "(0, 1]"));
        }
        Ok(DetectorConfig { efficiency, basis })
    }

    pub fn ideal(basis: Basis) -> Self {
        DetectorConfig {
            efficiency: 1.0,
            basis,
        }
    }
}

/// Feed-forward attached to one measurement outcome. Outcomes without a rule
/// are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRule {
    pub outcome: String,
    pub correction: Vec<OpticalElement>,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub outcome_label: String,
    pub correction: Vec<OpticalElement>,
    pub accepted: bool,
    /// Residual state after detection and correction; its squared norm is
    /// the branch probability.
    pub state: StateVector,
}

impl Branch {
    pub fn probability(&self) -> f64 {
        self.state.norm_sqr()
    }

    pub fn amplitude_weight(&self) -> Complex64 {
        Complex64::new(self.probability().sqrt(), 0.0)
    }
}

/// Detects the single photon in `modes = (H, V)` in the detector basis.
/// The detected photon is absorbed; each branch amplitude carries `sqrt(eta)`.
pub fn measure_and_branch(
    state: &StateVector,
    detector: &DetectorConfig,
    modes: (Mode, Mode),
    rules: &[BranchRule],
) -> Result<Vec<Branch>> {
    let (mh, mv) = modes;
    state.check_mode(mh)?;
    state.check_mode(mv)?;
    for (fock, _) in state.terms() {
        if fock.get(mh) as u32 + fock.get(mv) as u32 != 1 {
            return Err(Error::Detection(format!(
                "expected exactly one photon in {} / {}",
                state.registry().label(mh),
                state.registry().label(mv)
            )));
        }
    }
    let eta = detector.efficiency.sqrt();
    let mut branches = Vec::with_capacity(detector.basis.outcomes.len());
    for (label, u) in &detector.basis.outcomes {
        let mut terms: BTreeMap<FockState, Complex64> = BTreeMap::new();
        for (fock, amp) in state.terms() {
            let overlap = if fock.get(mh) == 1 {
                u[0].conj()
            } else {
                u[1].conj()
            };
            let mut rest = fock.clone();
            rest.set(mh, 0);
            rest.set(mv, 0);
            *terms.entry(rest).or_insert(Complex64::new(0.0, 0.0)) += amp * overlap * eta;
        }
        let mut residual = state.replace_terms(terms);
        let rule = rules.iter().find(|r| &r.outcome == label);
        let correction = rule.map(|r| r.correction.clone()).unwrap_or_default();
        for elem in &correction {
            residual = apply_element(&residual, elem)?;
        }
        branches.push(Branch {
            outcome_label: label.clone(),
            correction,
            accepted: rule.is_some(),
            state: residual,
        });
    }
    Ok(branches)
}

/// Amplitude map conditioned on the photon numbers of two modes, each 0 or 1.
/// `factors[n_a][n_b]`; higher occupations are treated as gate failure.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMap {
    pub name: String,
    pub modes: (Mode, Mode),
    pub factors: [[Complex64; 2]; 2],
}

impl ConditionalMap {
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        state.check_mode(self.modes.0)?;
        state.check_mode(self.modes.1)?;
        let mut terms = BTreeMap::new();
        for (fock, amp) in state.terms() {
            let (a, b) = (fock.get(self.modes.0), fock.get(self.modes.1));
            if a > 1 || b > 1 {
                continue;
            }
            terms.insert(fock.clone(), amp * self.factors[a as usize][b as usize]);
        }
        Ok(state.replace_terms(terms))
    }
}

/// A compiled circuit step.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Element(OpticalElement),
    Herald(HeraldRule),
    Map(ConditionalMap),
    Measure {
        detector: DetectorConfig,
        modes: (Mode, Mode),
        rules: Vec<BranchRule>,
    },
    Checkpoint(String),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Element(e) => write!(f, "{}", e.name()),
            Step::Herald(h) => write!(f, "herald[{}]", h.label),
            Step::Map(m) => write!(f, "{}", m.name),
            Step::Measure { detector, .. } => write!(f, "measure[{}]", detector.basis.name),
            Step::Checkpoint(n) => write!(f, "checkpoint[{n}]"),
        }
    }
}

/// A branch of a circuit run, identified by its sequence of measurement outcomes.
#[derive(Debug, Clone)]
pub struct RunBranch {
    pub outcomes: Vec<String>,
    pub accepted: bool,
    pub state: StateVector,
}

impl RunBranch {
    pub fn probability(&self) -> f64 {
        self.state.norm_sqr()
    }
}

#[derive(Debug, Clone)]
pub struct CheckpointRecord {
    pub name: String,
    pub outcomes: Vec<String>,
    pub state: StateVector,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub branches: Vec<RunBranch>,
    pub checkpoints: Vec<CheckpointRecord>,
}

impl RunOutput {
    pub fn accepted(&self) -> impl Iterator<Item = &RunBranch> {
        self.branches.iter().filter(|b| b.accepted)
    }

    pub fn success_probability(&self) -> f64 {
        self.accepted().map(|b| b.probability()).sum()
    }

    pub fn checkpoint<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a CheckpointRecord> {
        self.checkpoints.iter().filter(move |c| c.name == name)
    }
}

/// Registry plus an ordered list of steps, frozen at build time.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    registry: Arc<ModeRegistry>,
    steps: Vec<Step>,
}

impl Circuit {
    pub fn new(registry: Arc<ModeRegistry>, steps: Vec<Step>) -> Self {
        Circuit { registry, steps }
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Runs every branch through all steps; rejected measurement outcomes
    /// are kept (marked) but not evolved further. Loss modes are pinned to
    /// vacuum at the end.
    pub fn run(&self, input: &StateVector) -> Result<RunOutput> {
        if !(Arc::ptr_eq(input.registry(), &self.registry) || **input.registry() == *self.registry)
        {
            return Err(Error::RegistryMismatch);
        }
        let mut live = vec![RunBranch {
            outcomes: vec![],
            accepted: true,
            state: input.clone(),
        }];
        let mut finished = Vec::new();
        let mut checkpoints = Vec::new();

        for step in &self.steps {
            let mut next = Vec::with_capacity(live.len());
            for branch in live {
                match step {
                    Step::Element(e) => next.push(RunBranch {
                        state: apply_element(&branch.state, e)?,
                        ..branch
                    }),
                    Step::Herald(h) => next.push(RunBranch {
                        state: run_heralded(&branch.state, h)?.0,
                        ..branch
                    }),
                    Step::Map(m) => next.push(RunBranch {
                        state: m.apply(&branch.state)?,
                        ..branch
                    }),
                    Step::Measure {
                        detector,
                        modes,
                        rules,
                    } => {
                        for b in measure_and_branch(&branch.state, detector, *modes, rules)? {
                            let mut outcomes = branch.outcomes.clone();
                            outcomes.push(b.outcome_label);
                            let rb = RunBranch {
                                outcomes,
                                accepted: b.accepted,
                                state: b.state,
                            };
                            if rb.accepted {
                                next.push(rb);
                            } else {
                                finished.push(rb);
                            }
                        }
                    }
                    Step::Checkpoint(name) => {
                        checkpoints.push(CheckpointRecord {
                            name: name.clone(),
                            outcomes: branch.outcomes.clone(),
                            state: pin_losses(&branch.state)?,
                        });
                        next.push(branch);
                    }
                }
            }
            live = next;
        }
        for mut b in live {
            b.state = pin_losses(&b.state)?;
            finished.push(b);
        }
        finished.sort_by(|a, b| a.outcomes.cmp(&b.outcomes));
        Ok(RunOutput {
            branches: finished,
            checkpoints,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{beam_splitter, hwp, mode_beam_splitter, ndf, pbs, pdbs, phase_shift};
    use crate::fock::{ModeLabel, Polarization, Tolerances};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reg() -> Arc<ModeRegistry> {
        let mut r = ModeRegistry::with_paths(&["1", "2", "c"]).unwrap();
        r.push(ModeLabel::scalar("loss0")).unwrap();
        Arc::new(r)
    }

    #[test]
    fn identity_element_leaves_state() {
        let r = reg();
        let h = r.mode("1", Polarization::H).unwrap();
        let s = StateVector::vacuum(r.clone()).unwrap().create(h).unwrap();
        let id = phase_shift(0.0, h).unwrap();
        let out = apply_element(&s, &id).unwrap();
        assert_eq!(out.amplitude_of(&[(h, 1)]), c(1.0, 0.0));
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn hwp_expansion_on_signal() {
        let r = reg();
        let (h, v) = r.path("1").unwrap();
        let alpha = c(0.6, 0.3);
        let s = StateVector::vacuum(r.clone())
            .unwrap()
            .create(h)
            .unwrap()
            .scale(alpha);
        let out = apply_element(&s, &hwp((-30f64).to_radians(), &r, "1").unwrap()).unwrap();
        assert!((out.amplitude_of(&[(h, 1)]) - alpha * 0.5).norm() < 1e-15);
        assert!((out.amplitude_of(&[(v, 1)]) + alpha * (3f64.sqrt() / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel_dip() {
        let r = reg();
        let a = r.mode("1", Polarization::H).unwrap();
        let b = r.mode("2", Polarization::H).unwrap();
        let s = StateVector::vacuum(r.clone())
            .unwrap()
            .create(a)
            .unwrap()
            .create(b)
            .unwrap();
        let out = apply_element(&s, &beam_splitter(0.5, &r, "1", "2").unwrap()).unwrap();
        assert!(out.amplitude_of(&[(a, 1), (b, 1)]).norm() < 1e-15);
        // bunched outputs: amplitude i/sqrt2 each
        assert!((out.amplitude_of(&[(a, 2)]).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.amplitude_of(&[(b, 2)]).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_relative_eq!(out.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn pdbs_two_photon_interference() {
        let r = reg();
        let va = r.mode("1", Polarization::V).unwrap();
        let vb = r.mode("2", Polarization::V).unwrap();
        let s = StateVector::vacuum(r.clone())
            .unwrap()
            .create(va)
            .unwrap()
            .create(vb)
            .unwrap();
        let out = apply_element(&s, &pdbs(1.0, 1.0 / 3.0, &r, "1", "2").unwrap()).unwrap();
        // (sqrt T a + i sqrt R b)(i sqrt R a + sqrt T b): a b coefficient T - R
        assert!((out.amplitude_of(&[(va, 1), (vb, 1)]) - c(-1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ndf_then_herald_on_loss() {
        let r = reg();
        let h = r.mode("1", Polarization::H).unwrap();
        let loss = r.slot(&ModeLabel::scalar("loss0")).unwrap();
        let s = StateVector::vacuum(r.clone()).unwrap().create(h).unwrap();
        let out = apply_element(&s, &ndf(0.5, &[h], &[loss]).unwrap()).unwrap();
        assert_relative_eq!(out.norm_sqr(), 1.0, epsilon = 1e-15);
        let herald = HeraldRule::new("loss", Pattern::new().exact(loss, 0));
        let (kept, p) = run_heralded(&out, &herald).unwrap();
        assert_relative_eq!(p, 0.5, epsilon = 1e-15);
        assert_relative_eq!(
            kept.amplitude_of(&[(h, 1)]).re,
            FRAC_1_SQRT_2,
            epsilon = 1e-15
        );

        let s = StateVector::vacuum(r.clone()).unwrap().create(h).unwrap();
        let out = apply_element(&s, &ndf(1.0 / 3.0, &[h], &[loss]).unwrap()).unwrap();
        assert_relative_eq!(
            run_heralded(&out, &herald).unwrap().1,
            1.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn herald_on_absent_pattern() {
        let r = reg();
        let h = r.mode("1", Polarization::H).unwrap();
        let s = StateVector::vacuum(r.clone()).unwrap();
        let (kept, p) =
            run_heralded(&s, &HeraldRule::new("x", Pattern::new().exact(h, 1))).unwrap();
        assert!(kept.is_empty());
        assert_eq!(p, 0.0);
    }

    #[test]
    fn efficiency_scales_branches() {
        let r = reg();
        let (ch, cv) = r.path("c").unwrap();
        let h1 = r.mode("1", Polarization::H).unwrap();
        let vac = StateVector::vacuum(r.clone()).unwrap();
        let s = vac
            .create(ch)
            .unwrap()
            .scale(c(0.8, 0.0))
            .add(&vac.create(cv).unwrap().scale(c(0.0, 0.6)))
            .unwrap()
            .create(h1)
            .unwrap();
        let rules = vec![
            BranchRule {
                outcome: "D".into(),
                correction: vec![],
            },
            BranchRule {
                outcome: "A".into(),
                correction: vec![],
            },
        ];
        let ideal = measure_and_branch(
            &s,
            &DetectorConfig::ideal(Basis::diagonal()),
            (ch, cv),
            &rules,
        )
        .unwrap();
        let half = measure_and_branch(
            &s,
            &DetectorConfig::new(0.5, Basis::diagonal()).unwrap(),
            (ch, cv),
            &rules,
        )
        .unwrap();
        let total: f64 = ideal.iter().map(|b| b.probability()).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14);
        for (a, b) in ideal.iter().zip(&half) {
            assert_relative_eq!(b.probability(), 0.5 * a.probability(), epsilon = 1e-15);
            let overlap =
                a.state.inner(&b.state).unwrap().norm_sqr() / (a.probability() * b.probability());
            assert_relative_eq!(overlap, 1.0, epsilon = 1e-12);
        }
        // detected photon is absorbed
        for b in &ideal {
            for (fock, _) in b.state.terms() {
                assert_eq!(fock.get(ch) + fock.get(cv), 0);
            }
        }
    }

    #[test]
    fn detector_efficiency_domain() {
        assert!(DetectorConfig::new(0.0, Basis::diagonal()).is_err());
        assert!(DetectorConfig::new(1.2, Basis::diagonal()).is_err());
    }

    #[test]
    fn measurement_requires_single_photon() {
        let r = reg();
        let (ch, cv) = r.path("c").unwrap();
        let s = StateVector::vacuum(r.clone()).unwrap();
        let err = measure_and_branch(&s, &DetectorConfig::ideal(Basis::diagonal()), (ch, cv), &[]);
        assert!(matches!(err, Err(Error::Detection(_))));
    }

    #[test]
    fn rejected_outcomes_are_kept_but_not_evolved() {
        let r = reg();
        let (ch, cv) = r.path("c").unwrap();
        let h1 = r.mode("1", Polarization::H).unwrap();
        let s = StateVector::vacuum(r.clone())
            .unwrap()
            .create(ch)
            .unwrap()
            .create(h1)
            .unwrap();
        let circuit = Circuit::new(
            r.clone(),
            vec![
                Step::Measure {
                    detector: DetectorConfig::ideal(Basis::diagonal()),
                    modes: (ch, cv),
                    rules: vec![BranchRule {
                        outcome: "D".into(),
                        correction: vec![],
                    }],
                },
                Step::Element(hwp(PI / 4.0, &r, "1").unwrap()),
            ],
        );
        let out = circuit.run(&s).unwrap();
        assert_eq!(out.branches.len(), 2);
        assert_relative_eq!(out.success_probability(), 0.5, epsilon = 1e-15);
        let rejected = out.branches.iter().find(|b| !b.accepted).unwrap();
        assert_eq!(rejected.outcomes, vec!["A".to_string()]);
        assert!(rejected.state.amplitude_of(&[(h1, 1)]).norm() > 0.0);
    }

    fn random_circuit_state(
        angles: &[f64],
        r: &Arc<ModeRegistry>,
        tol: Tolerances,
    ) -> Result<StateVector> {
        let (h1, v1) = r.path("1").unwrap();
        let (hc, _) = r.path("c").unwrap();
        let mut s = StateVector::vacuum_with(r.clone(), tol)?
            .create(h1)?
            .add(&StateVector::vacuum_with(r.clone(), tol)?.create(v1)?)?
            .scale(c(FRAC_1_SQRT_2, 0.0))
            .create(hc)?;
        for (k, &a) in angles.iter().enumerate() {
            let e = match k % 4 {
                0 => hwp(a, r, "1")?,
                1 => pdbs((a.sin()).powi(2), (a.cos()).powi(2), r, "1", "c")?,
                2 => pbs(r, "1", "2")?,
                _ => beam_splitter((a.cos()).powi(2), r, "2", "c")?,
            };
            s = apply_element(&s, &e)?;
        }
        Ok(s)
    }

    proptest! {
        #[test]
        fn lossless_circuits_preserve_norm(angles in prop::collection::vec(-PI..PI, 1..10)) {
            let r = reg();
            let s = random_circuit_state(&angles, &r, Tolerances::default()).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn outcome_probabilities_sum_to_norm(angles in prop::collection::vec(-PI..PI, 1..8), eta in 0.05f64..=1.0) {
            let r = reg();
            let (ch, cv) = r.path("c").unwrap();
            let s = random_circuit_state(&angles, &r, Tolerances::default()).unwrap();
            // condition on exactly one photon in c, then measure it
            let (s, p) = s.project(&Pattern::new().total(&[ch, cv], 1)).unwrap();
            for basis in [Basis::diagonal(), Basis::rectilinear()] {
                let det = DetectorConfig::new(eta, basis).unwrap();
                let branches = measure_and_branch(&s, &det, (ch, cv), &[]).unwrap();
                let total: f64 = branches.iter().map(|b| b.probability()).sum();
                prop_assert!((total - eta * p).abs() < 1e-12);
            }
        }

        #[test]
        fn relabelling_commutes_with_elements(angle in -PI..PI, t in 0.0f64..=1.0) {
            // same circuit on a registry with reversed insertion order
            let fwd = Arc::new(ModeRegistry::with_paths(&["1", "2"]).unwrap());
            let rev = Arc::new(ModeRegistry::new(fwd.labels().iter().rev().cloned()).unwrap());
            let map = |m: Mode| rev.slot(fwd.label(m)).unwrap();
            let (h1, _) = fwd.path("1").unwrap();
            let (h2, _) = fwd.path("2").unwrap();
            let elems = [hwp(angle, &fwd, "1").unwrap(), pdbs(t, 1.0 - t, &fwd, "1", "2").unwrap()];
            let mut a = StateVector::vacuum(fwd.clone()).unwrap().create(h1).unwrap().create(h2).unwrap();
            let mut b = StateVector::vacuum(rev.clone()).unwrap().create(map(h1)).unwrap().create(map(h2)).unwrap();
            for e in &elems {
                a = apply_element(&a, e).unwrap();
                b = apply_element(&b, &e.relabel(map)).unwrap();
            }
            prop_assert_eq!(a.len(), b.len());
            for (fock, amp) in a.terms() {
                let photons: Vec<(Mode, u8)> = fock.occupations().iter().enumerate()
                    .filter(|(_, &n)| n > 0).map(|(i, &n)| (map(Mode(i)), n)).collect();
                prop_assert!((b.amplitude_of(&photons) - amp).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn two_mode_splitter_on_scalar_modes() {
        let r =
            Arc::new(ModeRegistry::new([ModeLabel::scalar("a"), ModeLabel::scalar("b")]).unwrap());
        let s = StateVector::vacuum(r.clone())
            .unwrap()
            .create(Mode(0))
            .unwrap();
        let out = apply_element(&s, &mode_beam_splitter(0.25, Mode(0), Mode(1)).unwrap()).unwrap();
        assert_relative_eq!(out.amplitude_of(&[(Mode(0), 1)]).re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(
            out.amplitude_of(&[(Mode(1), 1)]).im,
            0.75f64.sqrt(),
            epsilon = 1e-15
        );
    }
}
