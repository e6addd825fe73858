//! Line-oriented text format for router topologies.
//!
//! ```text
//! lorouter-circuit 1
//! modes 1 2 c          # spatial paths, each with an H and a V mode
//! signal 1             # path where a signal qubit is injected (repeatable)
//! control c            # path where the control qubit is injected
//! output 1 2           # output ports of the matching signal (repeatable)
//! pbs 1 2
//! hwp -30 1            # angles in degrees
//! cphase-pi 1 c
//! measure c DA D A { hwp 0 2 }
//! ```
//!
//! Step keywords: `pbs A B`, `hwp DEG PATH`, `qwp DEG PATH`,
//! `pdbs TH TV A B`, `bs T A B`, `ndf T TARGET...`, `phase DEG TARGET`,
//! `cphase-pi S C`, `cphase DEG S C`, `rebalance h|v DEG PATH`, `qnd PATH`,
//! `ppg S C`, `herald TARGET=N...`, `measure PATH BASIS OUTCOME...`,
//! `checkpoint NAME`.
//!
//! A target is a path (`2`) or a single mode (`2:V`). Numbers may be written
//! as decimals, as integer ratios (`1/3`) or as the symbol `phi`, which is
//! bound at compile time. Measurement outcomes not listed are rejected; a
//! listed outcome may carry a `{ ... ; ... }` list of correcting elements.
//! Everything after `#` is a comment.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::circuit::{BranchRule, Circuit, DetectorConfig, HeraldRule, Step};
use crate::elements::{beam_splitter, hwp, ndf, pbs, pdbs, phase_shift, qwp, OpticalElement};
use crate::error::{Error, Result};
use crate::fock::{Mode, ModeLabel, ModeRegistry, Pattern, Polarization};
use crate::gates::{
    cphase_pi, cphase_tunable, ppg, qnd_herald, rebalance_h, rebalance_v, TunableGateParams,
};

pub const HEADER: &str = "lorouter-circuit 1";

/// Bundled fixed-gate router document.
pub const FIXED_ROUTER: &str = include_str!("../circuits/fixed_router.circuit");
/// Bundled tunable-gate router document.
pub const TUNABLE_ROUTER: &str = include_str!("../circuits/tunable_router.circuit");

/// Numeric parameter of a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Value(f64),
    Ratio(i64, i64),
    /// The gate phase bound at compile time.
    Phi,
}

impl Param {
    fn number(self, what: &str) -> Result<f64> {
        match self {
            Param::Value(v) => Ok(v),
            Param::Ratio(a, b) => Ok(a as f64 / b as f64),
            Param::Phi => Err(Error::Circuit(format!("'phi' is not allowed as {what}"))),
        }
    }

    /// Angle in radians; literals are read as degrees.
    fn angle(self, bindings: &Bindings) -> Result<f64> {
        match self {
            Param::Phi => bindings
                .phi
                .ok_or_else(|| Error::Circuit("circuit uses 'phi' but no phase was bound".into())),
            p => Ok(p.number("an angle")?.to_radians()),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Value(v) => write!(f, "{v}"),
            Param::Ratio(a, b) => write!(f, "{a}/{b}"),
            Param::Phi => f.write_str("phi"),
        }
    }
}

/// A whole path (both polarizations) or one polarization mode of a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Path(String),
    Mode(String, Polarization),
}

impl Target {
    fn modes(&self, registry: &ModeRegistry) -> Result<Vec<Mode>> {
        match self {
            Target::Path(p) => {
                let (h, v) = registry.path(p)?;
                Ok(vec![h, v])
            }
            Target::Mode(p, pol) => Ok(vec![registry.mode(p, *pol)?]),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Path(p) => f.write_str(p),
            Target::Mode(p, pol) => write!(f, "{p}:{pol}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RebalanceKind {
    H,
    V,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSpec {
    pub label: String,
    pub correction: Vec<StepSpec>,
}

/// One step of a circuit document, before parameters are bound.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSpec {
    Pbs {
        a: String,
        b: String,
    },
    Hwp {
        angle: Param,
        path: String,
    },
    Qwp {
        angle: Param,
        path: String,
    },
    Pdbs {
        t_h: Param,
        t_v: Param,
        a: String,
        b: String,
    },
    Bs {
        t: Param,
        a: String,
        b: String,
    },
    Ndf {
        t: Param,
        targets: Vec<Target>,
    },
    Phase {
        angle: Param,
        target: Target,
    },
    CphasePi {
        signal: String,
        control: String,
    },
    Cphase {
        phi: Param,
        signal: String,
        control: String,
    },
    Rebalance {
        kind: RebalanceKind,
        phi: Param,
        path: String,
    },
    Qnd {
        path: String,
    },
    Ppg {
        signal: String,
        control: String,
    },
    Herald {
        targets: Vec<(Target, u32)>,
    },
    Measure {
        path: String,
        basis: String,
        outcomes: Vec<OutcomeSpec>,
    },
    Checkpoint(String),
}

impl StepSpec {
    fn is_element(&self) -> bool {
        matches!(
            self,
            StepSpec::Pbs { .. }
                | StepSpec::Hwp { .. }
                | StepSpec::Qwp { .. }
                | StepSpec::Pdbs { .. }
                | StepSpec::Bs { .. }
                | StepSpec::Ndf { .. }
                | StepSpec::Phase { .. }
        )
    }

    fn loss_modes_needed(&self, registry: &ModeRegistry) -> Result<usize> {
        Ok(match self {
            StepSpec::Ndf { targets, .. } => {
                let mut n = 0;
                for t in targets {
                    n += t.modes(registry)?.len();
                }
                n
            }
            StepSpec::Measure { outcomes, .. } => {
                let mut n = 0;
                for o in outcomes {
                    for s in &o.correction {
                        n += s.loss_modes_needed(registry)?;
                    }
                }
                n
            }
            _ => 0,
        })
    }
}

impl fmt::Display for StepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSpec::Pbs { a, b } => write!(f, "pbs {a} {b}"),
            StepSpec::Hwp { angle, path } => write!(f, "hwp {angle} {path}"),
            StepSpec::Qwp { angle, path } => write!(f, "qwp {angle} {path}"),
            StepSpec::Pdbs { t_h, t_v, a, b } => write!(f, "pdbs {t_h} {t_v} {a} {b}"),
            StepSpec::Bs { t, a, b } => write!(f, "bs {t} {a} {b}"),
            StepSpec::Ndf { t, targets } => {
                write!(f, "ndf {t}")?;
                for x in targets {
                    write!(f, " {x}")?;
                }
                Ok(())
            }
            StepSpec::Phase { angle, target } => write!(f, "phase {angle} {target}"),
            StepSpec::CphasePi { signal, control } => write!(f, "cphase-pi {signal} {control}"),
            StepSpec::Cphase {
                phi,
                signal,
                control,
            } => write!(f, "cphase {phi} {signal} {control}"),
            StepSpec::Rebalance { kind, phi, path } => {
                let k = match kind {
                    RebalanceKind::H => "h",
                    RebalanceKind::V => "v",
                };
                write!(f, "rebalance {k} {phi} {path}")
            }
            StepSpec::Qnd { path } => write!(f, "qnd {path}"),
            StepSpec::Ppg { signal, control } => write!(f, "ppg {signal} {control}"),
            StepSpec::Herald { targets } => {
                f.write_str("herald")?;
                for (t, n) in targets {
                    write!(f, " {t}={n}")?;
                }
                Ok(())
            }
            StepSpec::Measure {
                path,
                basis,
                outcomes,
            } => {
                write!(f, "measure {path} {basis}")?;
                for o in outcomes {
                    write!(f, " {}", o.label)?;
                    if !o.correction.is_empty() {
                        f.write_str(" {")?;
                        for (i, s) in o.correction.iter().enumerate() {
                            if i > 0 {
                                f.write_str(" ;")?;
                            }
                            write!(f, " {s}")?;
                        }
                        f.write_str(" }")?;
                    }
                }
                Ok(())
            }
            StepSpec::Checkpoint(name) => write!(f, "checkpoint {name}"),
        }
    }
}

/// Parsed circuit document.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub paths: Vec<String>,
    pub signals: Vec<String>,
    pub control: String,
    /// Output port pair of each signal, in the order of `signals`.
    pub outputs: Vec<(String, String)>,
    pub steps: Vec<StepSpec>,
}

/// Values substituted while compiling a document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bindings {
    /// Gate phase in radians, substituted for `phi`.
    pub phi: Option<f64>,
    /// Efficiency of the polarization-analysis detectors.
    pub efficiency: f64,
}

impl Default for Bindings {
    fn default() -> Self {
        Bindings {
            phi: None,
            efficiency: 1.0,
        }
    }
}

/// A circuit ready to run, with the modes where qubits enter and leave.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    pub signals: Vec<(Mode, Mode)>,
    pub control: (Mode, Mode),
    pub outputs: Vec<((Mode, Mode), (Mode, Mode))>,
}

impl CompiledCircuit {
    pub fn registry(&self) -> &Arc<ModeRegistry> {
        self.circuit.registry()
    }
}

struct Compiler<'a> {
    registry: &'a ModeRegistry,
    bindings: &'a Bindings,
    next_loss: usize,
    first_loss: usize,
}

impl Compiler<'_> {
    fn take_loss(&mut self, n: usize) -> Vec<Mode> {
        let start = self.first_loss + self.next_loss;
        self.next_loss += n;
        (start..start + n).map(Mode).collect()
    }

    fn tunable(&self, phi: Param) -> Result<TunableGateParams> {
        TunableGateParams::new(phi.angle(self.bindings)?)
    }

    fn elements(&mut self, step: &StepSpec) -> Result<Vec<OpticalElement>> {
        let reg = self.registry;
        Ok(match step {
            StepSpec::Pbs { a, b } => vec![pbs(reg, a, b)?],
            StepSpec::Hwp { angle, path } => vec![hwp(angle.angle(self.bindings)?, reg, path)?],
            StepSpec::Qwp { angle, path } => vec![qwp(angle.angle(self.bindings)?, reg, path)?],
            StepSpec::Pdbs { t_h, t_v, a, b } => vec![pdbs(
                t_h.number("a transmissivity")?,
                t_v.number("a transmissivity")?,
                reg,
                a,
                b,
            )?],
            StepSpec::Bs { t, a, b } => {
                vec![beam_splitter(t.number("a transmissivity")?, reg, a, b)?]
            }
            StepSpec::Ndf { t, targets } => {
                let mut modes = Vec::new();
                for x in targets {
                    modes.extend(x.modes(reg)?);
                }
                let loss = self.take_loss(modes.len());
                vec![ndf(t.number("a transmissivity")?, &modes, &loss)?]
            }
            StepSpec::Phase { angle, target } => {
                let phi = angle.angle(self.bindings)?;
                target
                    .modes(reg)?
                    .into_iter()
                    .map(|m| phase_shift(phi, m))
                    .collect::<Result<_>>()?
            }
            other => {
                return Err(Error::Circuit(format!(
                    "'{other}' is not a single optical element"
                )))
            }
        })
    }

    fn steps(&mut self, step: &StepSpec) -> Result<Vec<Step>> {
        let reg = self.registry;
        if step.is_element() {
            return Ok(self
                .elements(step)?
                .into_iter()
                .map(Step::Element)
                .collect());
        }
        Ok(match step {
            StepSpec::CphasePi { signal, control } => cphase_pi(reg, signal, control)?,
            StepSpec::Cphase {
                phi,
                signal,
                control,
            } => vec![Step::Map(cphase_tunable(
                &self.tunable(*phi)?,
                reg,
                signal,
                control,
            )?)],
            StepSpec::Rebalance { kind, phi, path } => {
                let params = self.tunable(*phi)?;
                vec![Step::Element(match kind {
                    RebalanceKind::H => rebalance_h(&params, reg, path)?,
                    RebalanceKind::V => rebalance_v(&params, reg, path)?,
                })]
            }
            StepSpec::Qnd { path } => vec![Step::Herald(qnd_herald(reg, path)?)],
            StepSpec::Ppg { signal, control } => ppg(reg, signal, control)?,
            StepSpec::Herald { targets } => {
                let mut pattern = Pattern::new();
                let mut label = String::from("herald");
                for (t, n) in targets {
                    pattern = match t {
                        Target::Path(p) => {
                            let (h, v) = reg.path(p)?;
                            pattern.total(&[h, v], *n)
                        }
                        Target::Mode(..) => pattern.exact(t.modes(reg)?[0], *n),
                    };
                    let _ = write!(label, " {t}={n}");
                }
                vec![Step::Herald(HeraldRule::new(label, pattern))]
            }
            StepSpec::Measure {
                path,
                basis,
                outcomes,
            } => {
                let b = crate::circuit::Basis::by_name(basis)
                    .ok_or_else(|| Error::Circuit(format!("unknown basis '{basis}'")))?;
                let mut rules = Vec::new();
                for o in outcomes {
                    if !b.outcomes.iter().any(|(l, _)| l == &o.label) {
                        return Err(Error::Circuit(format!(
                            "basis {basis} has no outcome '{}'",
                            o.label
                        )));
                    }
                    let mut correction = Vec::new();
                    for s in &o.correction {
                        correction.extend(self.elements(s)?);
                    }
                    rules.push(BranchRule {
                        outcome: o.label.clone(),
                        correction,
                    });
                }
                vec![Step::Measure {
                    detector: DetectorConfig::new(self.bindings.efficiency, b)?,
                    modes: reg.path(path)?,
                    rules,
                }]
            }
            StepSpec::Checkpoint(name) => vec![Step::Checkpoint(name.clone())],
            _ => unreachable!("element steps handled above"),
        })
    }
}

impl CircuitSpec {
    /// Builds the mode registry (declared paths followed by one scalar loss
    /// mode per filtered mode, named `loss0`, `loss1`, ...) and the steps.
    pub fn compile(&self, bindings: &Bindings) -> Result<CompiledCircuit> {
        let mut registry = ModeRegistry::with_paths(&self.paths)?;
        let mut losses = 0;
        for s in &self.steps {
            losses += s.loss_modes_needed(&registry)?;
        }
        let first_loss = registry.len();
        for k in 0..losses {
            registry.push(ModeLabel::scalar(format!("loss{k}")))?;
        }
        let mut compiler = Compiler {
            registry: &registry,
            bindings,
            next_loss: 0,
            first_loss,
        };
        let mut steps = Vec::new();
        for s in &self.steps {
            steps.extend(compiler.steps(s)?);
        }
        let signals = self
            .signals
            .iter()
            .map(|p| registry.path(p))
            .collect::<Result<Vec<_>>>()?;
        let control = registry.path(&self.control)?;
        let outputs = self
            .outputs
            .iter()
            .map(|(a, b)| Ok((registry.path(a)?, registry.path(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledCircuit {
            circuit: Circuit::new(Arc::new(registry), steps),
            signals,
            control,
            outputs,
        })
    }
}

/// Canonical text form; `parse(&serialize(spec))` reproduces `spec`.
pub fn serialize(spec: &CircuitSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "modes {}", spec.paths.join(" "));
    for s in &spec.signals {
        let _ = writeln!(out, "signal {s}");
    }
    let _ = writeln!(out, "control {}", spec.control);
    for (a, b) in &spec.outputs {
        let _ = writeln!(out, "output {a} {b}");
    }
    for step in &spec.steps {
        let _ = writeln!(out, "{step}");
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let line = line.split('#').next().unwrap_or("");
    let mut toks = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        let special = matches!(ch, '{' | '}' | ';');
        if ch.is_whitespace() || special {
            if let Some(s) = start.take() {
                toks.push(Tok {
                    text: &line[s..i],
                    col: s + 1,
                });
            }
            if special {
                toks.push(Tok {
                    text: &line[i..i + 1],
                    col: i + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        toks.push(Tok {
            text: &line[s..],
            col: s + 1,
        });
    }
    toks
}

struct LineParser<'a, 't> {
    line: usize,
    toks: &'t [Tok<'a>],
    pos: usize,
    end_col: usize,
    paths: &'t [String],
}

impl<'a> LineParser<'a, '_> {
    fn err_at(&self, col: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<Tok<'a>> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self, what: &str) -> Result<Tok<'a>> {
        match self.toks.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.err_at(self.end_col, format!("expected {what}"))),
        }
    }

    fn word(&mut self, what: &str) -> Result<Tok<'a>> {
        let t = self.next(what)?;
        if matches!(t.text, "{" | "}" | ";") {
            return Err(self.err_at(t.col, format!("expected {what}, found '{}'", t.text)));
        }
        Ok(t)
    }

    fn done(&self) -> Result<()> {
        match self.peek() {
            Some(t) => Err(self.err_at(t.col, format!("unexpected '{}'", t.text))),
            None => Ok(()),
        }
    }

    fn path_name(&self, t: Tok<'_>, name: &str) -> Result<String> {
        if self.paths.iter().any(|p| p == name) {
            Ok(name.to_string())
        } else {
            Err(self.err_at(t.col, format!("unregistered mode '{name}'")))
        }
    }

    fn path(&mut self) -> Result<String> {
        let t = self.word("a path")?;
        self.path_name(t, t.text)
    }

    fn target_text(&self, t: Tok<'_>, text: &str) -> Result<Target> {
        match text.split_once(':') {
            None => Ok(Target::Path(self.path_name(t, text)?)),
            Some((p, pol)) => {
                let pol = match pol {
                    "H" => Polarization::H,
                    "V" => Polarization::V,
                    _ => return Err(self.err_at(t.col, format!("unregistered mode '{text}'"))),
                };
                Ok(Target::Mode(self.path_name(t, p)?, pol))
            }
        }
    }

    fn target(&mut self) -> Result<Target> {
        let t = self.word("a path or mode")?;
        self.target_text(t, t.text)
    }

    fn param(&mut self, what: &str) -> Result<Param> {
        let t = self.word(what)?;
        self.param_text(t, t.text)
    }

    fn param_text(&self, t: Tok<'_>, text: &str) -> Result<Param> {
        if text == "phi" {
            return Ok(Param::Phi);
        }
        let bad = || self.err_at(t.col, format!("malformed number '{text}'"));
        if let Some((a, b)) = text.split_once('/') {
            let a: i64 = a.parse().map_err(|_| bad())?;
            let b: i64 = b.parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            return Ok(Param::Ratio(a, b));
        }
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Param::Value(v)),
            _ => Err(bad()),
        }
    }

    fn step(&mut self, in_correction: bool) -> Result<StepSpec> {
        let kw = self.word("a step")?;
        let step = match kw.text {
            "pbs" => StepSpec::Pbs {
                a: self.path()?,
                b: self.path()?,
            },
            "hwp" => StepSpec::Hwp {
                angle: self.param("an angle")?,
                path: self.path()?,
            },
            "qwp" => StepSpec::Qwp {
                angle: self.param("an angle")?,
                path: self.path()?,
            },
            "pdbs" => StepSpec::Pdbs {
                t_h: self.param("T_H")?,
                t_v: self.param("T_V")?,
                a: self.path()?,
                b: self.path()?,
            },
            "bs" => StepSpec::Bs {
                t: self.param("a transmissivity")?,
                a: self.path()?,
                b: self.path()?,
            },
            "ndf" => {
                let t = self.param("a transmissivity")?;
                let mut targets = vec![self.target()?];
                while matches!(self.peek(), Some(x) if !matches!(x.text, ";" | "}")) {
                    targets.push(self.target()?);
                }
                StepSpec::Ndf { t, targets }
            }
            "phase" => StepSpec::Phase {
                angle: self.param("an angle")?,
                target: self.target()?,
            },
            _ if in_correction => {
                return Err(self.err_at(
                    kw.col,
                    format!("unknown element '{}' in a correction", kw.text),
                ))
            }
            "cphase-pi" => StepSpec::CphasePi {
                signal: self.path()?,
                control: self.path()?,
            },
            "cphase" => StepSpec::Cphase {
                phi: self.param("a phase")?,
                signal: self.path()?,
                control: self.path()?,
            },
            "rebalance" => {
                let k = self.word("'h' or 'v'")?;
                let kind = match k.text {
                    "h" => RebalanceKind::H,
                    "v" => RebalanceKind::V,
                    other => {
                        return Err(
                            self.err_at(k.col, format!("expected 'h' or 'v', found '{other}'"))
                        )
                    }
                };
                StepSpec::Rebalance {
                    kind,
                    phi: self.param("a phase")?,
                    path: self.path()?,
                }
            }
            "qnd" => StepSpec::Qnd { path: self.path()? },
            "ppg" => StepSpec::Ppg {
                signal: self.path()?,
                control: self.path()?,
            },
            "herald" => {
                let mut targets = Vec::new();
                while let Some(t) = self.peek() {
                    self.pos += 1;
                    let (lhs, rhs) = t
                        .text
                        .split_once('=')
                        .ok_or_else(|| self.err_at(t.col, "expected TARGET=COUNT"))?;
                    let n: u32 = rhs.parse().map_err(|_| {
                        self.err_at(t.col + lhs.len() + 1, format!("malformed number '{rhs}'"))
                    })?;
                    targets.push((self.target_text(t, lhs)?, n));
                }
                if targets.is_empty() {
                    return Err(self.err_at(self.end_col, "expected TARGET=COUNT"));
                }
                StepSpec::Herald { targets }
            }
            "measure" => {
                let path = self.path()?;
                let b = self.word("a basis")?;
                if crate::circuit::Basis::by_name(b.text).is_none() {
                    return Err(self.err_at(b.col, format!("unknown basis '{}'", b.text)));
                }
                let mut outcomes = Vec::new();
                while self.peek().is_some() {
                    let label = self.word("an outcome")?.text.to_string();
                    let mut correction = Vec::new();
                    if matches!(self.peek(), Some(t) if t.text == "{") {
                        self.pos += 1;
                        loop {
                            if matches!(self.peek(), Some(t) if t.text == "}") {
                                self.pos += 1;
                                break;
                            }
                            correction.push(self.step(true)?);
                            match self.next("'}'")? {
                                t if t.text == ";" => continue,
                                t if t.text == "}" => break,
                                t => {
                                    return Err(
                                        self.err_at(t.col, format!("unexpected '{}'", t.text))
                                    )
                                }
                            }
                        }
                    }
                    outcomes.push(OutcomeSpec { label, correction });
                }
                StepSpec::Measure {
                    path,
                    basis: b.text.to_string(),
                    outcomes,
                }
            }
            "checkpoint" => StepSpec::Checkpoint(self.word("a checkpoint name")?.text.to_string()),
            other => return Err(self.err_at(kw.col, format!("unknown element '{other}'"))),
        };
        Ok(step)
    }
}

/// Parses a circuit document. Errors carry the 1-based line and column.
pub fn parse(text: &str) -> Result<CircuitSpec> {
    let mut header_seen = false;
    let mut paths: Option<Vec<String>> = None;
    let mut signals = Vec::new();
    let mut control: Option<String> = None;
    let mut outputs = Vec::new();
    let mut steps = Vec::new();
    let mut last_line = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokenize(raw);
        let Some(first) = toks.first().copied() else {
            continue;
        };
        let end_col = raw.split('#').next().unwrap_or("").trim_end().len() + 1;
        if !header_seen {
            let joined: Vec<&str> = toks.iter().map(|t| t.text).collect();
            if joined.join(" ") != HEADER {
                return Err(Error::Parse {
                    line,
                    column: first.col,
                    message: format!("expected format header '{HEADER}'"),
                });
            }
            header_seen = true;
            continue;
        }
        if first.text == "modes" {
            if paths.is_some() {
                return Err(Error::Parse {
                    line,
                    column: first.col,
                    message: "modes declared twice".into(),
                });
            }
            let mut declared: Vec<String> = Vec::new();
            for t in &toks[1..] {
                if declared.iter().any(|p| p == t.text) {
                    return Err(Error::Parse {
                        line,
                        column: t.col,
                        message: format!("mode '{}' is declared twice", t.text),
                    });
                }
                if t.text.contains([':', '=', '/', '{', '}', ';']) {
                    return Err(Error::Parse {
                        line,
                        column: t.col,
                        message: format!("invalid path name '{}'", t.text),
                    });
                }
                declared.push(t.text.to_string());
            }
            if declared.is_empty() {
                return Err(Error::Parse {
                    line,
                    column: end_col,
                    message: "no modes declared".into(),
                });
            }
            paths = Some(declared);
            continue;
        }
        let Some(declared) = paths.as_deref() else {
            return Err(Error::Parse {
                line,
                column: first.col,
                message: "no modes declared".into(),
            });
        };
        let mut p = LineParser {
            line,
            toks: &toks,
            pos: 0,
            end_col,
            paths: declared,
        };
        match first.text {
            "signal" => {
                p.pos = 1;
                signals.push(p.path()?);
            }
            "control" => {
                p.pos = 1;
                if control.is_some() {
                    return Err(p.err_at(first.col, "control declared twice"));
                }
                control = Some(p.path()?);
            }
            "output" => {
                p.pos = 1;
                outputs.push((p.path()?, p.path()?));
            }
            _ => steps.push(p.step(false)?),
        }
        p.done()?;
    }

    let at_end = |message: &str| Error::Parse {
        line: last_line,
        column: 1,
        message: message.into(),
    };
    let paths = paths.ok_or_else(|| at_end("no modes declared"))?;
    let control = control.ok_or_else(|| at_end("no control path declared"))?;
    if signals.is_empty() {
        return Err(at_end("no signal path declared"));
    }
    if outputs.len() != signals.len() {
        return Err(at_end("each signal needs exactly one output line"));
    }
    Ok(CircuitSpec {
        paths,
        signals,
        control,
        outputs,
        steps,
    })
}
