//! The three router pipelines and extraction of routing amplitudes,
//! routing ratio, success probability and output fidelities.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::circuit::RunOutput;
use crate::error::{Error, Result};
use crate::fock::{Mode, Pattern, StateVector, Tolerances};
use crate::format::{
    self, Bindings, CircuitSpec, CompiledCircuit, OutcomeSpec, Param, RebalanceKind, StepSpec,
    Target,
};

/// Squared port amplitudes below this are treated as an empty port.
const EMPTY_PORT: f64 = 1e-24;

/// Polarization qubit `alpha |H> + beta |V>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalQubit {
    alpha: Complex64,
    beta: Complex64,
}

impl SignalQubit {
    /// Requires `|alpha|^2 + |beta|^2 = 1` to within 1e-12.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if n.is_nan() || (n - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(n));
        }
        Ok(SignalQubit { alpha, beta })
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(SignalQubit {
            alpha: alpha / n,
            beta: beta / n,
        })
    }

    pub fn horizontal() -> Self {
        SignalQubit {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    /// Uniform draw on the Bloch sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
        let polar = z.clamp(-1.0, 1.0).acos();
        SignalQubit {
            alpha: Complex64::new((polar / 2.0).cos(), 0.0),
            beta: Complex64::from_polar((polar / 2.0).sin(), y.atan2(x)),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// `alpha a_H^dag + beta a_V^dag` applied to `state`.
    fn inject(&self, state: &StateVector, (h, v): (Mode, Mode)) -> Result<StateVector> {
        state
            .create(h)?
            .scale(self.alpha)
            .add(&state.create(v)?.scale(self.beta))
    }
}

/// Control qubit `cos(theta) |H> + e^{i vartheta} sin(theta) |V>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlQubit {
    theta: f64,
    vartheta: f64,
}

impl ControlQubit {
    pub fn new(theta: f64, vartheta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::domain("theta", theta, "[0, pi/2]"));
        }
        if !(0.0..2.0 * PI).contains(&vartheta) {
            return Err(Error::domain("vartheta", vartheta, "[0, 2 pi)"));
        }
        Ok(ControlQubit { theta, vartheta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn vartheta(&self) -> f64 {
        self.vartheta
    }

    fn as_signal(&self) -> SignalQubit {
        SignalQubit {
            alpha: Complex64::new(self.theta.cos(), 0.0),
            beta: Complex64::from_polar(self.theta.sin(), self.vartheta),
        }
    }
}

/// Output of one router run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouterResult {
    /// Amplitude of the signal state in output 1 (all signals in output 1
    /// for a multi-signal run).
    pub a1: Complex64,
    pub a2: Complex64,
    /// Routing ratio, `tan chi = |A2| / |A1|`.
    pub chi: f64,
    pub p_succ: f64,
    pub fidelity_out1: Option<f64>,
    pub fidelity_out2: Option<f64>,
}

impl RouterResult {
    /// `arg(A2 / A1)` when both ports are populated.
    pub fn relative_phase(&self) -> Option<f64> {
        (self.a1.norm_sqr() > EMPTY_PORT && self.a2.norm_sqr() > EMPTY_PORT)
            .then(|| (self.a2 / self.a1).arg())
    }
}

/// Simulation knobs shared by all routers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub efficiency: f64,
    pub tolerances: Tolerances,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            efficiency: 1.0,
            tolerances: Tolerances::default(),
        }
    }
}

/// Full record of a router run, including branch states and checkpoints.
#[derive(Debug, Clone)]
pub struct RouterRun {
    pub result: RouterResult,
    pub output: RunOutput,
    pub compiled: CompiledCircuit,
}

/// Fixed-gate router; with `equalize`, an extra `ndf 1/3` on output 1.
pub fn fixed_router_spec(equalize: bool) -> CircuitSpec {
    let mut spec = format::parse(format::FIXED_ROUTER).expect("bundled document parses");
    if equalize {
        spec.steps.push(StepSpec::Ndf {
            t: Param::Ratio(1, 3),
            targets: vec![Target::Path("1".into())],
        });
    }
    spec
}

pub fn tunable_router_spec() -> CircuitSpec {
    format::parse(format::TUNABLE_ROUTER).expect("bundled document parses")
}

/// Chain of `n` signals routed by one control photon. Signal `k` enters on
/// `s{k}.1` and leaves by `s{k}.1` / `s{k}.2`. The control enters every
/// pass through a 50:50 coupler and is checked by a presence detector
/// before being fed back.
pub fn multi_router_spec(n: usize) -> Result<CircuitSpec> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "n >= 1"));
    }
    let c = "c".to_string();
    let p = |k: usize, port: usize| format!("s{k}.{port}");
    let mut paths = Vec::new();
    let mut signals = Vec::new();
    let mut outputs = Vec::new();
    let mut steps = Vec::new();
    for k in 1..=n {
        let (a, b) = (p(k, 1), p(k, 2));
        paths.extend([a.clone(), b.clone()]);
        signals.push(a.clone());
        outputs.push((a.clone(), b.clone()));
        steps.push(StepSpec::Ndf {
            t: Param::Ratio(1, 2),
            targets: vec![Target::Path(c.clone())],
        });
        steps.extend([
            StepSpec::Pbs {
                a: a.clone(),
                b: b.clone(),
            },
            StepSpec::Rebalance {
                kind: RebalanceKind::H,
                phi: Param::Phi,
                path: a.clone(),
            },
            StepSpec::Rebalance {
                kind: RebalanceKind::V,
                phi: Param::Phi,
                path: b.clone(),
            },
            StepSpec::Cphase {
                phi: Param::Phi,
                signal: a.clone(),
                control: c.clone(),
            },
            StepSpec::Qnd { path: c.clone() },
            StepSpec::Cphase {
                phi: Param::Phi,
                signal: b.clone(),
                control: c.clone(),
            },
            StepSpec::Hwp {
                angle: Param::Value(22.5),
                path: a.clone(),
            },
            StepSpec::Hwp {
                angle: Param::Value(22.5),
                path: b.clone(),
            },
            StepSpec::Pbs {
                a: a.clone(),
                b: b.clone(),
            },
            StepSpec::Hwp {
                angle: Param::Value(45.0),
                path: b.clone(),
            },
        ]);
        if k < n {
            steps.push(StepSpec::Qnd { path: c.clone() });
        }
    }
    steps.push(StepSpec::Measure {
        path: c.clone(),
        basis: "DA".into(),
        outcomes: vec![
            OutcomeSpec {
                label: "D".into(),
                correction: vec![],
            },
            OutcomeSpec {
                label: "A".into(),
                correction: vec![StepSpec::Phase {
                    angle: Param::Value(180.0),
                    target: Target::Path(p(1, 2)),
                }],
            },
        ],
    });
    paths.push(c.clone());
    Ok(CircuitSpec {
        paths,
        signals,
        control: c,
        outputs,
        steps,
    })
}

/// Input state: every signal in its injection path, control in its path.
pub fn prepare(
    compiled: &CompiledCircuit,
    signals: &[SignalQubit],
    control: &ControlQubit,
    tolerances: Tolerances,
) -> Result<StateVector> {
    if signals.len() != compiled.signals.len() {
        return Err(Error::Circuit(format!(
            "circuit takes {} signal(s), {} given",
            compiled.signals.len(),
            signals.len()
        )));
    }
    let mut state = StateVector::vacuum_with(compiled.registry().clone(), tolerances)?;
    for (s, &modes) in signals.iter().zip(&compiled.signals) {
        state = s.inject(&state, modes)?;
    }
    control.as_signal().inject(&state, compiled.control)
}

/// Expected product state with every signal leaving by port `port` (0 or 1).
fn port_state(
    compiled: &CompiledCircuit,
    signals: &[SignalQubit],
    port: usize,
    tolerances: Tolerances,
) -> Result<(StateVector, Pattern)> {
    let mut state = StateVector::vacuum_with(compiled.registry().clone(), tolerances)?;
    let mut pattern = Pattern::new();
    for (s, outs) in signals.iter().zip(&compiled.outputs) {
        let (h, v) = if port == 0 { outs.0 } else { outs.1 };
        state = s.inject(&state, (h, v))?;
        pattern = pattern.total(&[h, v], 1);
    }
    Ok((state, pattern))
}

/// Port amplitude, squared norm of the port component and summed squared
/// overlaps with the expected product state, over accepted branches.
fn port_summary(
    output: &RunOutput,
    expected: &StateVector,
    pattern: &Pattern,
) -> Result<(Complex64, f64, f64)> {
    let mut reference = None;
    let mut weight = 0.0;
    let mut overlap = 0.0;
    for b in output.accepted() {
        let (v, n) = b.state.project(pattern)?;
        let a = expected.inner(&v)?;
        if reference.is_none() && a.norm_sqr() > EMPTY_PORT {
            reference = Some(a);
        }
        weight += n;
        overlap += a.norm_sqr();
    }
    let magnitude = weight.sqrt();
    let amp = match reference {
        Some(a) => a / a.norm() * magnitude,
        None => Complex64::new(magnitude, 0.0),
    };
    Ok((amp, weight, overlap))
}

/// Squared overlap of each normalized output port with the input signal
/// product state; `None` for an empty port.
pub fn output_fidelity(
    compiled: &CompiledCircuit,
    output: &RunOutput,
    signals: &[SignalQubit],
) -> Result<(Option<f64>, Option<f64>)> {
    let tol = compiled_tolerances(output);
    let mut fid = [None, None];
    for (port, slot) in fid.iter_mut().enumerate() {
        let (expected, pattern) = port_state(compiled, signals, port, tol)?;
        let (_, weight, overlap) = port_summary(output, &expected, &pattern)?;
        *slot = (weight > EMPTY_PORT).then(|| overlap / weight);
    }
    Ok((fid[0], fid[1]))
}

fn compiled_tolerances(output: &RunOutput) -> Tolerances {
    output
        .branches
        .first()
        .map(|b| b.state.tolerances())
        .unwrap_or_default()
}

/// Runs a compiled router on the given qubits and extracts the result.
pub fn run_compiled(
    compiled: CompiledCircuit,
    signals: &[SignalQubit],
    control: &ControlQubit,
    tolerances: Tolerances,
) -> Result<RouterRun> {
    let input = prepare(&compiled, signals, control, tolerances)?;
    let output = compiled.circuit.run(&input)?;
    let mut amps = [Complex64::new(0.0, 0.0); 2];
    let mut fid = [None, None];
    for port in 0..2 {
        let (expected, pattern) = port_state(&compiled, signals, port, tolerances)?;
        let (a, weight, overlap) = port_summary(&output, &expected, &pattern)?;
        amps[port] = a;
        fid[port] = (weight > EMPTY_PORT).then(|| overlap / weight);
    }
    let result = RouterResult {
        a1: amps[0],
        a2: amps[1],
        chi: amps[1].norm().atan2(amps[0].norm()),
        p_succ: output.success_probability(),
        fidelity_out1: fid[0],
        fidelity_out2: fid[1],
    };
    Ok(RouterRun {
        result,
        output,
        compiled,
    })
}

/// Compiles `spec` and runs it.
pub fn run_spec(
    spec: &CircuitSpec,
    phi: Option<f64>,
    signals: &[SignalQubit],
    control: &ControlQubit,
    options: &SimOptions,
) -> Result<RouterRun> {
    let compiled = spec.compile(&Bindings {
        phi,
        efficiency: options.efficiency,
    })?;
    run_compiled(compiled, signals, control, options.tolerances)
}

pub fn route_fixed_run(
    signal: &SignalQubit,
    control: &ControlQubit,
    equalize: bool,
    options: &SimOptions,
) -> Result<RouterRun> {
    run_spec(
        &fixed_router_spec(equalize),
        None,
        &[*signal],
        control,
        options,
    )
}

pub fn route_fixed(
    signal: &SignalQubit,
    control: &ControlQubit,
    equalize: bool,
) -> Result<RouterResult> {
    Ok(route_fixed_run(signal, control, equalize, &SimOptions::default())?.result)
}

pub fn route_tunable_run(
    signal: &SignalQubit,
    control: &ControlQubit,
    phi: f64,
    options: &SimOptions,
) -> Result<RouterRun> {
    if !(0.0..=PI).contains(&phi) {
        return Err(Error::domain("phi", phi, "[0, pi]"));
    }
    run_spec(
        &tunable_router_spec(),
        Some(phi),
        &[*signal],
        control,
        options,
    )
}

pub fn route_tunable(
    signal: &SignalQubit,
    control: &ControlQubit,
    phi: f64,
) -> Result<RouterResult> {
    Ok(route_tunable_run(signal, control, phi, &SimOptions::default())?.result)
}

pub fn route_multi_run(
    signals: &[SignalQubit],
    control: &ControlQubit,
    options: &SimOptions,
) -> Result<RouterRun> {
    run_spec(
        &multi_router_spec(signals.len())?,
        Some(PI),
        signals,
        control,
        options,
    )
}

pub fn route_multi(signals: &[SignalQubit], control: &ControlQubit) -> Result<RouterResult> {
    Ok(route_multi_run(signals, control, &SimOptions::default())?.result)
}
