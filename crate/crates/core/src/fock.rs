//! Occupation-number states over a registry of bosonic modes.
//!
//! A [`StateVector`] is a sparse map from [`FockState`] to complex amplitude.
//! States may be sub-normalized: the squared norm of a heralded state is the
//! probability that the herald fired, so success probabilities travel with
//! the state instead of being tracked separately.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Polarization of a spatial mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => write!(f, "H"),
            Polarization::V => write!(f, "V"),
        }
    }
}

/// A (spatial path, polarization) label. Loss modes carry no polarization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub spatial: String,
    pub polarization: Option<Polarization>,
}

impl ModeLabel {
    pub fn polarized(spatial: impl Into<String>, polarization: Polarization) -> Self {
        ModeLabel {
            spatial: spatial.into(),
            polarization: Some(polarization),
        }
    }

    pub fn scalar(spatial: impl Into<String>) -> Self {
        ModeLabel {
            spatial: spatial.into(),
            polarization: None,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarization {
            Some(p) => write!(f, "{}:{}", self.spatial, p),
            None => write!(f, "{}", self.spatial),
        }
    }
}

/// Slot of a mode inside its registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode(pub usize);

/// Ordered set of modes. Slot order is insertion order and never changes.
#[derive(Debug, Clone, Default)]
pub struct ModeRegistry {
    labels: Vec<ModeLabel>,
    index: HashMap<ModeLabel, usize>,
}

impl PartialEq for ModeRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for ModeRegistry {}

impl ModeRegistry {
    pub fn new(labels: impl IntoIterator<Item = ModeLabel>) -> Result<Self> {
        let mut registry = ModeRegistry::default();
        for label in labels {
            registry.push(label)?;
        }
        Ok(registry)
    }

    /// Registry with an H and a V mode for every listed path, in order.
    pub fn with_paths<S: AsRef<str>>(paths: &[S]) -> Result<Self> {
        ModeRegistry::new(paths.iter().flat_map(|p| {
            [
                ModeLabel::polarized(p.as_ref(), Polarization::H),
                ModeLabel::polarized(p.as_ref(), Polarization::V),
            ]
        }))
    }

    pub fn push(&mut self, label: ModeLabel) -> Result<Mode> {
        if self.index.contains_key(&label) {
            return Err(Error::DuplicateMode(label.to_string()));
        }
        let slot = self.labels.len();
        self.index.insert(label.clone(), slot);
        self.labels.push(label);
        Ok(Mode(slot))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn label(&self, mode: Mode) -> &ModeLabel {
        &self.labels[mode.0]
    }

    pub fn slot(&self, label: &ModeLabel) -> Result<Mode> {
        self.index
            .get(label)
            .map(|&i| Mode(i))
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn mode(&self, spatial: &str, polarization: Polarization) -> Result<Mode> {
        self.slot(&ModeLabel::polarized(spatial, polarization))
    }

    /// The `(H, V)` pair of a spatial path.
    pub fn path(&self, spatial: &str) -> Result<(Mode, Mode)> {
        let h = self.mode(spatial, Polarization::H);
        let v = self.mode(spatial, Polarization::V);
        match (h, v) {
            (Ok(h), Ok(v)) => Ok((h, v)),
            _ => Err(Error::UnknownPath(spatial.to_string())),
        }
    }

    pub fn contains(&self, mode: Mode) -> bool {
        mode.0 < self.labels.len()
    }

    /// Concatenation of two registries with disjoint labels.
    pub fn union(&self, other: &ModeRegistry) -> Result<ModeRegistry> {
        ModeRegistry::new(self.labels.iter().chain(other.labels.iter()).cloned())
    }
}

/// Photon count per registered mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState(Vec<u8>);

impl FockState {
    pub fn vacuum(modes: usize) -> Self {
        FockState(vec![0; modes])
    }

    pub fn from_occupations(occupations: Vec<u8>) -> Self {
        FockState(occupations)
    }

    pub fn occupations(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, mode: Mode) -> u8 {
        self.0[mode.0]
    }

    pub(crate) fn set(&mut self, mode: Mode, count: u8) {
        self.0[mode.0] = count;
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Numerical thresholds carried by every state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Amplitudes with magnitude below this are dropped.
    pub prune: f64,
    /// Allowed excess of norm^2 over 1.
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            prune: 1e-15,
            norm: 1e-9,
        }
    }
}

/// One photon-count constraint: the photons summed over `modes` must equal `count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub modes: Vec<Mode>,
    pub count: u32,
}

/// Detection pattern: a conjunction of photon-count constraints.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pattern {
    constraints: Vec<Constraint>,
}

impl Pattern {
    pub fn new() -> Self {
        Pattern::default()
    }

    /// Require exactly `count` photons in a single mode.
    pub fn exact(mut self, mode: Mode, count: u32) -> Self {
        self.constraints.push(Constraint {
            modes: vec![mode],
            count,
        });
        self
    }

    /// Require `count` photons summed over several modes.
    pub fn total(mut self, modes: &[Mode], count: u32) -> Self {
        self.constraints.push(Constraint {
            modes: modes.to_vec(),
            count,
        });
        self
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// With `resolving == false` a nonzero requirement accepts any nonzero count.
    pub fn matches(&self, state: &FockState, resolving: bool) -> bool {
        self.constraints.iter().all(|c| {
            let n: u32 = c.modes.iter().map(|&m| state.get(m) as u32).sum();
            if resolving || c.count == 0 {
                n == c.count
            } else {
                n > 0
            }
        })
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        self.constraints
            .iter()
            .flat_map(|c| c.modes.iter().copied())
    }
}

/// Sparse superposition of Fock states.
#[derive(Debug, Clone)]
pub struct StateVector {
    registry: Arc<ModeRegistry>,
    terms: BTreeMap<FockState, Complex64>,
    tolerances: Tolerances,
}

impl StateVector {
    /// Vacuum with amplitude one.
    pub fn vacuum(registry: Arc<ModeRegistry>) -> Result<Self> {
        StateVector::vacuum_with(registry, Tolerances::default())
    }

    pub fn vacuum_with(registry: Arc<ModeRegistry>, tolerances: Tolerances) -> Result<Self> {
        if registry.is_empty() {
            return Err(Error::EmptyRegistry);
        }
        let mut terms = BTreeMap::new();
        terms.insert(FockState::vacuum(registry.len()), Complex64::new(1.0, 0.0));
        Ok(StateVector {
            registry,
            terms,
            tolerances,
        })
    }

    /// The zero vector on `registry`.
    pub fn zero(registry: Arc<ModeRegistry>, tolerances: Tolerances) -> Self {
        StateVector {
            registry,
            terms: BTreeMap::new(),
            tolerances,
        }
    }

    pub fn from_terms(
        registry: Arc<ModeRegistry>,
        tolerances: Tolerances,
        terms: impl IntoIterator<Item = (FockState, Complex64)>,
    ) -> Result<Self> {
        let mut out = StateVector::zero(registry, tolerances);
        for (fock, amp) in terms {
            if fock.len() != out.registry.len() {
                return Err(Error::BadModes(format!(
                    "Fock state has {} modes, registry has {}",
                    fock.len(),
                    out.registry.len()
                )));
            }
            out.accumulate(fock, amp);
        }
        out.prune();
        Ok(out)
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self.prune();
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockState, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, fock: &FockState) -> Complex64 {
        self.terms.get(fock).copied().unwrap_or_default()
    }

    /// Amplitude of the state with the listed photons and every other mode empty.
    pub fn amplitude_of(&self, photons: &[(Mode, u8)]) -> Complex64 {
        let mut fock = FockState::vacuum(self.registry.len());
        for &(m, n) in photons {
            fock.set(m, fock.get(m) + n);
        }
        self.amplitude(&fock)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Checks the sub-normalization invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.norm_sqr();
        if n > 1.0 + self.tolerances.norm {
            return Err(Error::NormOverflow(n));
        }
        Ok(())
    }

    pub(crate) fn same_registry(&self, other: &StateVector) -> Result<()> {
        if Arc::ptr_eq(&self.registry, &other.registry) || self.registry == other.registry {
            Ok(())
        } else {
            Err(Error::RegistryMismatch)
        }
    }

    pub(crate) fn check_mode(&self, mode: Mode) -> Result<()> {
        if self.registry.contains(mode) {
            Ok(())
        } else {
            Err(Error::UnknownMode(format!("slot {}", mode.0)))
        }
    }

    pub(crate) fn accumulate(&mut self, fock: FockState, amp: Complex64) {
        *self.terms.entry(fock).or_default() += amp;
    }

    pub(crate) fn prune(&mut self) {
        let eps = self.tolerances.prune;
        self.terms.retain(|_, a| {
            let m = a.norm();
            m != 0.0 && m >= eps
        });
    }

    pub(crate) fn empty_like(&self) -> StateVector {
        StateVector::zero(self.registry.clone(), self.tolerances)
    }

    /// Applies the bosonic creation operator: `|n> -> sqrt(n+1) |n+1>`.
    pub fn create(&self, mode: Mode) -> Result<StateVector> {
        self.check_mode(mode)?;
        let mut out = self.empty_like();
        for (fock, amp) in &self.terms {
            let mut next = fock.clone();
            let n = next.get(mode);
            next.set(mode, n + 1);
            out.accumulate(next, amp * ((n as f64) + 1.0).sqrt());
        }
        out.prune();
        Ok(out)
    }

    /// Applies the creation operator of a labelled mode.
    pub fn create_label(&self, label: &ModeLabel) -> Result<StateVector> {
        let mode = self.registry.slot(label)?;
        self.create(mode)
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        let mut out = self.empty_like();
        for (fock, amp) in &self.terms {
            out.accumulate(fock.clone(), amp * factor);
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        self.same_registry(other)?;
        let mut out = self.clone();
        for (fock, amp) in &other.terms {
            out.accumulate(fock.clone(), *amp);
        }
        out.prune();
        Ok(out)
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.same_registry(other)?;
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (&self.terms, &other.terms, true)
        } else {
            (&other.terms, &self.terms, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (fock, a) in small {
            if let Some(b) = large.get(fock) {
                acc += if conj_small {
                    a.conj() * b
                } else {
                    b.conj() * a
                };
            }
        }
        Ok(acc)
    }

    /// Keeps the terms matching `pattern` exactly. Returns the unnormalized
    /// residual and its squared norm.
    pub fn project(&self, pattern: &Pattern) -> Result<(StateVector, f64)> {
        self.project_with(pattern, true)
    }

    pub fn project_with(&self, pattern: &Pattern, resolving: bool) -> Result<(StateVector, f64)> {
        for m in pattern.modes() {
            self.check_mode(m)?;
        }
        let mut out = self.empty_like();
        for (fock, amp) in &self.terms {
            if pattern.matches(fock, resolving) {
                out.terms.insert(fock.clone(), *amp);
            }
        }
        let p = out.norm_sqr();
        Ok((out, p))
    }

    /// Empties `modes` in every term. Each mode must hold the same count in
    /// all terms (i.e. be pinned by an earlier projection).
    pub fn discard(&self, modes: &[Mode]) -> Result<StateVector> {
        for &m in modes {
            self.check_mode(m)?;
            let mut counts = self.terms.keys().map(|f| f.get(m));
            if let Some(first) = counts.next() {
                if counts.any(|c| c != first) {
                    return Err(Error::Detection(format!(
                        "mode {} is not pinned to a single photon count",
                        self.registry.label(m)
                    )));
                }
            }
        }
        let mut out = self.empty_like();
        for (fock, amp) in &self.terms {
            let mut next = fock.clone();
            for &m in modes {
                next.set(m, 0);
            }
            out.accumulate(next, *amp);
        }
        out.prune();
        Ok(out)
    }

    /// Tensor product of states on disjoint registries.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let registry = Arc::new(self.registry.union(&other.registry)?);
        let mut out = StateVector::zero(registry, self.tolerances);
        for (fa, a) in &self.terms {
            for (fb, b) in &other.terms {
                let mut occ = fa.0.clone();
                occ.extend_from_slice(&fb.0);
                out.accumulate(FockState(occ), a * b);
            }
        }
        out.prune();
        Ok(out)
    }

    pub(crate) fn replace_terms(&self, terms: BTreeMap<FockState, Complex64>) -> StateVector {
        let mut out = StateVector {
            registry: self.registry.clone(),
            terms,
            tolerances: self.tolerances,
        };
        out.prune();
        out
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (fock, amp) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)|", amp.re, amp.im)?;
            let mut any = false;
            for (slot, &n) in fock.occupations().iter().enumerate() {
                if n > 0 {
                    if any {
                        write!(f, " ")?;
                    }
                    any = true;
                    let label = self.registry.label(Mode(slot));
                    if n == 1 {
                        write!(f, "{label}")?;
                    } else {
                        write!(f, "{label}^{n}")?;
                    }
                }
            }
            if !any {
                write!(f, "vac")?;
            }
            write!(f, ">")?;
        }
        Ok(())
    }
}
