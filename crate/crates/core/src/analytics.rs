//! Closed-form router formulas and parameter sweeps that put them next to
//! simulated values.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::p_c;
use crate::router::{
    route_fixed_run, route_multi_run, route_tunable_run, ControlQubit, RouterResult, SignalQubit,
    SimOptions,
};

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::domain("theta", theta, "[0, pi/2]"));
    }
    Ok(())
}

/// Success probability of the fixed-gate router, `(1 + 2 cos^2 theta) / 24`.
pub fn p_succ_fixed(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok((1.0 + 2.0 * theta.cos().powi(2)) / 24.0)
}

/// Routing ratio of the fixed-gate router, `tan chi = tan(theta) / sqrt3`.
pub fn chi_of_theta(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(theta.sin().atan2(3f64.sqrt() * theta.cos()))
}

/// Largest routing ratio reachable with gate phase `phi`,
/// `atan((1 - cos phi) / sin phi)`.
pub fn chi_limit(phi: f64) -> Result<f64> {
    p_c(phi)?;
    // 1 - cos(phi) written as 2 sin^2(phi/2) to avoid cancellation
    Ok((2.0 * (phi / 2.0).sin().powi(2)).atan2(phi.sin()))
}

/// Published closed form for the minimum over theta of the tunable-router
/// success probability, `A_C^(4/3) / (2 + 2 A_C)`.
pub fn p_min_tunable(phi: f64) -> Result<f64> {
    let a = p_c(phi)?.sqrt();
    Ok(a.powi(4).cbrt() / (2.0 + 2.0 * a))
}

/// Published closed form for the control angle maximizing the
/// tunable-router success probability,
/// `(1/2) atan[A_C (1 - cos phi) / (1 - A_C^2)]`.
pub fn theta_at_pmax(phi: f64) -> Result<f64> {
    let a = p_c(phi)?.sqrt();
    Ok(0.5 * (a * (1.0 - phi.cos())).atan2(1.0 - a * a))
}

/// Published multi-signal success probability,
/// `2^(1 - 4n) (1 - (8/9) sin^2 theta)^n`.
pub fn p_total_multi(n: usize, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if n == 0 {
        return Err(Error::domain("n", 0.0, "n >= 1"));
    }
    let n = n as i32;
    Ok(2f64.powi(1 - 4 * n) * (1.0 - 8.0 / 9.0 * theta.sin().powi(2)).powi(n))
}

/// Output amplitudes `(A1, A2)` of the tunable router before the final
/// polarizing beam splitter, per unit signal amplitude.
pub fn tunable_amplitudes(theta: f64, vartheta: f64, phi: f64) -> Result<(Complex64, Complex64)> {
    check_theta(theta)?;
    let a = p_c(phi)?.sqrt();
    let den = 2.0 * (2.0 + 2.0 * a).sqrt();
    let e = Complex64::from_polar(1.0, phi);
    let s = Complex64::from_polar(theta.sin(), vartheta);
    let one = Complex64::new(1.0, 0.0);
    let a1 = a.sqrt() / den * (2.0 * theta.cos() + a * s * (one + e));
    let a2 = a.powi(3).sqrt() / den * s * (one - e);
    Ok((a1, a2))
}

/// Norm of the tunable-router output state.
pub fn p_succ_tunable(theta: f64, vartheta: f64, phi: f64) -> Result<f64> {
    let (a1, a2) = tunable_amplitudes(theta, vartheta, phi)?;
    Ok(a1.norm_sqr() + a2.norm_sqr())
}

/// Routing ratio of the tunable router,
/// `tan chi = A_C sin(theta) |1 - e^{i phi}| / |2 cos(theta) + A_C e^{i vartheta} sin(theta) (1 + e^{i phi})|`.
pub fn chi_tunable(theta: f64, vartheta: f64, phi: f64) -> Result<f64> {
    let (a1, a2) = tunable_amplitudes(theta, vartheta, phi)?;
    Ok(a2.norm().atan2(a1.norm()))
}

/// Success probability when both gates are replaced by a state-independent
/// c-phase gate of success probability `P_C`, i.e. with the uniform amplitude
/// `A_C` applied to every component: `P_C^2 / 4`.
pub fn p_succ_state_independent(phi: f64) -> Result<f64> {
    let p = p_c(phi)?;
    Ok(p * p / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouterKind {
    Fixed { equalize: bool },
    Tunable,
    Multi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Theta,
    Phi,
    /// Routing-ratio limit `chi_L = phi / 2`; produces the extremal-probability
    /// curves of the tunable router.
    ChiLimit,
    N,
}

/// Parameters held constant during a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedParams {
    pub router: RouterKind,
    pub theta: f64,
    pub vartheta: f64,
    pub phi: f64,
    pub n: usize,
    pub efficiency: f64,
    /// Seed for the random signal states.
    pub seed: u64,
    /// Grid size of the theta scans used for extremal probabilities.
    pub scan_points: usize,
}

impl Default for FixedParams {
    fn default() -> Self {
        FixedParams {
            router: RouterKind::Fixed { equalize: false },
            theta: 0.0,
            vartheta: 0.0,
            phi: PI,
            n: 1,
            efficiency: 1.0,
            seed: 0,
            scan_points: 201,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub fixed: FixedParams,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        let (name, lo, hi, dom) = match self.parameter {
            SweepParameter::Theta => ("theta", 0.0, FRAC_PI_2, "[0, pi/2]"),
            SweepParameter::Phi => ("phi", 0.0, PI, "[0, pi]"),
            SweepParameter::ChiLimit => ("chi_L", 0.0, FRAC_PI_2, "[0, pi/2]"),
            SweepParameter::N => ("n", 1.0, f64::INFINITY, "integers >= 1"),
        };
        if self.lo.partial_cmp(&self.hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::domain("sweep range", self.hi - self.lo, "lo < hi"));
        }
        for v in [self.lo, self.hi] {
            if !(lo..=hi).contains(&v) {
                return Err(Error::domain(name, v, dom));
            }
        }
        if self.parameter == SweepParameter::N {
            if self.lo.fract() != 0.0 || self.hi.fract() != 0.0 {
                return Err(Error::domain("n", self.lo, dom));
            }
        } else if self.points < 2 {
            return Err(Error::domain("points", self.points as f64, ">= 2"));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        match self.parameter {
            SweepParameter::N => (self.lo as usize..=self.hi as usize)
                .map(|n| n as f64)
                .collect(),
            _ => linspace(self.lo, self.hi, self.points),
        }
    }
}

/// `points` evenly spaced values from `lo` to `hi` inclusive; the last one
/// is exactly `hi`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|k| {
            if k + 1 == points {
                hi
            } else {
                lo + step * k as f64
            }
        })
        .collect()
}

/// One value in a table row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

pub const RESULT_COLUMNS: [&str; 8] = [
    "abs_a1",
    "abs_a2",
    "arg_a2_over_a1",
    "chi",
    "p_sim",
    "p_analytic",
    "fidelity_out1",
    "fidelity_out2",
];

/// Rows of parameter values followed by [`RESULT_COLUMNS`].
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Written as `# key=value` lines before the header.
    pub comments: Vec<String>,
}

impl Table {
    pub fn new(parameters: &[&str]) -> Self {
        let columns = parameters
            .iter()
            .chain(RESULT_COLUMNS.iter())
            .map(|s| s.to_string())
            .collect();
        Table {
            columns,
            rows: Vec::new(),
            comments: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].clone()).collect())
    }

    pub fn write_csv<W: io::Write>(&self, mut out: W) -> Result<()> {
        let io_err = |e: io::Error| Error::Circuit(format!("I/O error: {e}"));
        for c in &self.comments {
            writeln!(out, "# {c}").map_err(io_err)?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Circuit(format!("CSV error: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(csv_err)?;
        }
        w.flush().map_err(io_err)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }
}

/// Result cells in [`RESULT_COLUMNS`] order.
pub fn result_cells(r: Option<&RouterResult>, p_analytic: Option<f64>) -> Vec<Cell> {
    match r {
        Some(r) => vec![
            Cell::Num(r.a1.norm()),
            Cell::Num(r.a2.norm()),
            Cell::opt(r.relative_phase()),
            Cell::Num(r.chi),
            Cell::Num(r.p_succ),
            Cell::opt(p_analytic),
            Cell::opt(r.fidelity_out1),
            Cell::opt(r.fidelity_out2),
        ],
        None => {
            let mut v = vec![Cell::Empty; RESULT_COLUMNS.len()];
            v[5] = Cell::opt(p_analytic);
            v
        }
    }
}

/// Seeded signal states used by sweeps and the verification suite.
pub fn random_signals(seed: u64, n: usize) -> Vec<SignalQubit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| SignalQubit::random(&mut rng)).collect()
}

/// Runs one router configuration and returns the simulation with its
/// closed-form success probability.
pub fn evaluate(
    router: RouterKind,
    signals: &[SignalQubit],
    theta: f64,
    vartheta: f64,
    phi: f64,
    options: &SimOptions,
) -> Result<(RouterResult, f64)> {
    let ctl = ControlQubit::new(theta, vartheta)?;
    let eta = options.efficiency;
    Ok(match router {
        RouterKind::Fixed { equalize } => {
            let r = route_fixed_run(&signals[0], &ctl, equalize, options)?.result;
            let p = if equalize {
                1.0 / 24.0
            } else {
                p_succ_fixed(theta)?
            };
            (r, eta * p)
        }
        RouterKind::Tunable => {
            let r = route_tunable_run(&signals[0], &ctl, phi, options)?.result;
            (r, eta * p_succ_tunable(theta, vartheta, phi)?)
        }
        RouterKind::Multi => {
            let r = route_multi_run(signals, &ctl, options)?.result;
            (r, eta * p_total_multi(signals.len(), theta)?)
        }
    })
}

/// Simulated tunable-router success probability on an evenly spaced theta
/// grid over `[0, pi/2]` (`vartheta = 0`).
pub fn theta_scan(phi: f64, points: usize, signal: &SignalQubit) -> Result<Vec<(f64, f64)>> {
    let opts = SimOptions::default();
    linspace(0.0, FRAC_PI_2, points)
        .into_par_iter()
        .map(|th| {
            let r = route_tunable_run(signal, &ControlQubit::new(th, 0.0)?, phi, &opts)?;
            Ok((th, r.result.p_succ))
        })
        .collect()
}

/// Extremum of the simulated success probability over theta: grid search
/// followed by golden-section refinement inside the bracketing cells.
pub fn theta_extremum(
    phi: f64,
    points: usize,
    signal: &SignalQubit,
    maximize: bool,
) -> Result<(f64, f64)> {
    let scan = theta_scan(phi, points, signal)?;
    let sign = if maximize { 1.0 } else { -1.0 };
    let best = (0..scan.len())
        .max_by(|&i, &j| (sign * scan[i].1).total_cmp(&(sign * scan[j].1)))
        .expect("scan is not empty");
    let lo = scan[best.saturating_sub(1)].0;
    let hi = scan[(best + 1).min(scan.len() - 1)].0;
    let opts = SimOptions::default();
    let f = |th: f64| -> Result<f64> {
        let r = route_tunable_run(signal, &ControlQubit::new(th, 0.0)?, phi, &opts)?;
        Ok(sign * r.result.p_succ)
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > 1e-10 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    let mut candidates = [
        (scan[best].0, sign * scan[best].1),
        ((a + b) / 2.0, f((a + b) / 2.0)?),
    ];
    candidates.sort_by(|x, y| y.1.total_cmp(&x.1));
    let (th, v) = candidates[0];
    Ok((th, sign * v))
}

/// Evaluates a sweep. Points run in parallel; rows keep grid order.
pub fn sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let fx = &spec.fixed;
    let options = SimOptions {
        efficiency: fx.efficiency,
        ..SimOptions::default()
    };
    let grid = spec.grid();
    let mut table = match spec.parameter {
        SweepParameter::Theta => Table::new(&["theta"]),
        SweepParameter::Phi => Table::new(&["phi"]),
        SweepParameter::N => Table::new(&["n"]),
        SweepParameter::ChiLimit => Table::new(&["chi_limit", "curve", "theta"]),
    };
    table.comments.push(format!("seed={}", fx.seed));

    let rows: Vec<Vec<Vec<Cell>>> = match spec.parameter {
        SweepParameter::Theta => {
            let n = if fx.router == RouterKind::Multi {
                fx.n
            } else {
                1
            };
            let signals = random_signals(fx.seed, n);
            grid.par_iter()
                .map(|&th| {
                    let (r, p) = evaluate(fx.router, &signals, th, fx.vartheta, fx.phi, &options)?;
                    let mut row = vec![Cell::Num(th)];
                    row.extend(result_cells(Some(&r), Some(p)));
                    Ok(vec![row])
                })
                .collect::<Result<_>>()?
        }
        SweepParameter::Phi => {
            let signals = random_signals(fx.seed, 1);
            grid.par_iter()
                .map(|&phi| {
                    let (r, p) = evaluate(
                        RouterKind::Tunable,
                        &signals,
                        fx.theta,
                        fx.vartheta,
                        phi,
                        &options,
                    )?;
                    let mut row = vec![Cell::Num(phi)];
                    row.extend(result_cells(Some(&r), Some(p)));
                    Ok(vec![row])
                })
                .collect::<Result<_>>()?
        }
        SweepParameter::N => grid
            .par_iter()
            .map(|&n| {
                let signals = random_signals(fx.seed, n as usize);
                let (r, p) = evaluate(
                    RouterKind::Multi,
                    &signals,
                    fx.theta,
                    fx.vartheta,
                    PI,
                    &options,
                )?;
                let mut row = vec![Cell::Num(n)];
                row.extend(result_cells(Some(&r), Some(p)));
                Ok(vec![row])
            })
            .collect::<Result<_>>()?,
        SweepParameter::ChiLimit => {
            let signal = random_signals(fx.seed, 1)[0];
            grid.iter()
                .map(|&chi_l| extremal_rows(chi_l, fx.scan_points, &signal))
                .collect::<Result<_>>()?
        }
    };
    table.rows = rows.into_iter().flatten().collect();
    Ok(table)
}

/// Rows of the extremal-probability figure at one routing-ratio limit.
fn extremal_rows(chi_l: f64, scan_points: usize, signal: &SignalQubit) -> Result<Vec<Vec<Cell>>> {
    let phi = (2.0 * chi_l).min(PI);
    let opts = SimOptions::default();
    let mut rows = Vec::new();
    let mut push = |curve: &str, theta: Option<f64>, r: Option<&RouterResult>, p: Option<f64>| {
        let mut row = vec![Cell::Num(chi_l), Cell::Text(curve.into()), Cell::opt(theta)];
        row.extend(result_cells(r, p));
        rows.push(row);
    };
    let run = |th: f64| -> Result<RouterResult> {
        Ok(route_tunable_run(signal, &ControlQubit::new(th, 0.0)?, phi, &opts)?.result)
    };

    let (th_max, _) = theta_extremum(phi, scan_points, signal, true)?;
    let th_formula = theta_at_pmax(phi)?;
    push(
        "max",
        Some(th_max),
        Some(&run(th_max)?),
        Some(p_succ_tunable(th_formula, 0.0, phi)?),
    );
    let (th_min, _) = theta_extremum(phi, scan_points, signal, false)?;
    push(
        "min",
        Some(th_min),
        Some(&run(th_min)?),
        Some(p_min_tunable(phi)?),
    );
    push(
        "state-independent",
        None,
        None,
        Some(p_succ_state_independent(phi)?),
    );
    let sig = [*signal];
    let (r, p) = evaluate(
        RouterKind::Fixed { equalize: false },
        &sig,
        0.0,
        0.0,
        0.0,
        &opts,
    )?;
    push("fixed-max", Some(0.0), Some(&r), Some(p));
    let (r, p) = evaluate(
        RouterKind::Fixed { equalize: false },
        &sig,
        FRAC_PI_2,
        0.0,
        0.0,
        &opts,
    )?;
    push("fixed-min", Some(FRAC_PI_2), Some(&r), Some(p));
    Ok(rows)
}

/// The success-probability-versus-routing-ratio figure of the fixed router.
pub fn figure3(points: usize, seed: u64) -> Result<Table> {
    sweep(&SweepSpec {
        parameter: SweepParameter::Theta,
        lo: 0.0,
        hi: FRAC_PI_2,
        points,
        fixed: FixedParams {
            seed,
            ..FixedParams::default()
        },
    })
}

/// Extremal success probabilities of the tunable router versus the
/// routing-ratio limit.
pub fn figure5(points: usize, seed: u64) -> Result<Table> {
    sweep(&SweepSpec {
        parameter: SweepParameter::ChiLimit,
        lo: 0.0,
        hi: FRAC_PI_2,
        points,
        fixed: FixedParams {
            seed,
            ..FixedParams::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fixed_formulas() {
        assert_relative_eq!(p_succ_fixed(0.0).unwrap(), 0.125, epsilon = 1e-15);
        assert_relative_eq!(
            p_succ_fixed(FRAC_PI_2).unwrap(),
            1.0 / 24.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(p_succ_fixed(PI / 4.0).unwrap(), 1.0 / 12.0, epsilon = 1e-15);
        assert_eq!(chi_of_theta(0.0).unwrap(), 0.0);
        assert_relative_eq!(chi_of_theta(FRAC_PI_2).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_relative_eq!(chi_of_theta(PI / 3.0).unwrap(), PI / 4.0, epsilon = 1e-15);
        assert!(p_succ_fixed(-0.1).is_err());
    }

    #[test]
    fn chi_limit_is_half_phase() {
        assert_eq!(chi_limit(0.0).unwrap(), 0.0);
        assert_relative_eq!(chi_limit(PI).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_relative_eq!(chi_limit(FRAC_PI_2).unwrap(), PI / 4.0, epsilon = 1e-15);
        for phi in linspace(0.0, PI, 1000) {
            assert_relative_eq!(chi_limit(phi).unwrap(), phi / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn tunable_formulas() {
        // plug-in values at phi = pi, A_C = 1/3
        let a: f64 = 1.0 / 3.0;
        assert_relative_eq!(
            p_min_tunable(PI).unwrap(),
            a.powf(4.0 / 3.0) / (2.0 + 2.0 * a),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            theta_at_pmax(PI).unwrap(),
            0.5 * (0.75f64).atan(),
            epsilon = 1e-15
        );
        assert!(theta_at_pmax(1e-9).unwrap().abs() < 1e-9);
        // norm of the output amplitudes at phi = pi
        assert_relative_eq!(
            p_succ_tunable(0.0, 0.0, PI).unwrap(),
            0.125,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            p_succ_tunable(FRAC_PI_2, 0.0, PI).unwrap(),
            1.0 / 72.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            chi_tunable(FRAC_PI_2, 0.0, 1.0).unwrap(),
            0.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn multi_formula() {
        assert_relative_eq!(p_total_multi(1, 0.0).unwrap(), 0.125, epsilon = 1e-15);
        assert_relative_eq!(
            p_total_multi(1, FRAC_PI_2).unwrap(),
            1.0 / 72.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            p_total_multi(3, 0.0).unwrap(),
            2f64.powi(-11),
            epsilon = 1e-18
        );
        assert_relative_eq!(p_total_multi(2, 0.0).unwrap(), 1.0 / 128.0, epsilon = 1e-18);
        assert!(p_total_multi(0, 0.0).is_err());
    }

    #[test]
    fn state_independent_line() {
        assert_relative_eq!(
            p_succ_state_independent(0.0).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            p_succ_state_independent(PI).unwrap(),
            1.0 / 324.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, FRAC_PI_2, 101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], FRAC_PI_2);
    }

    #[test]
    fn figure3_shape() {
        let t = figure3(11, 1).unwrap();
        assert_eq!(t.rows.len(), 11);
        let p: Vec<f64> = t
            .column("p_sim")
            .unwrap()
            .iter()
            .map(|c| c.as_f64().unwrap())
            .collect();
        assert_relative_eq!(p[0], 0.125, epsilon = 1e-12);
        assert_relative_eq!(p[10], 1.0 / 24.0, epsilon = 1e-12);
        assert!(p.windows(2).all(|w| w[1] < w[0]));
        let csv = t.to_csv_string().unwrap();
        assert!(csv.starts_with("# seed=1\ntheta,abs_a1,abs_a2,"));
    }

    #[test]
    fn sweep_validation() {
        let mut spec = SweepSpec {
            parameter: SweepParameter::Theta,
            lo: 0.5,
            hi: 0.1,
            points: 5,
            fixed: FixedParams::default(),
        };
        assert!(sweep(&spec).is_err());
        spec.lo = 0.0;
        spec.hi = 2.0;
        assert!(sweep(&spec).is_err());
        spec.hi = 1.0;
        spec.points = 1;
        assert!(sweep(&spec).is_err());
        let spec = SweepSpec {
            parameter: SweepParameter::N,
            lo: 1.0,
            hi: 3.0,
            points: 0,
            fixed: FixedParams::default(),
        };
        let t = sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_relative_eq!(
            t.rows[2][5].as_f64().unwrap(),
            2f64.powi(-11),
            epsilon = 1e-16
        );
    }

    #[test]
    fn extremum_matches_closed_form_norm() {
        let s = SignalQubit::horizontal();
        let phi = 2.0;
        let (_, pmin) = theta_extremum(phi, 101, &s, false).unwrap();
        let a = p_c(phi).unwrap().sqrt();
        assert_relative_eq!(pmin, a.powi(3) / (2.0 + 2.0 * a), epsilon = 1e-12);
        let (th, pmax) = theta_extremum(phi, 101, &s, true).unwrap();
        // largest eigenvalue of the quadratic form in (cos, sin)
        let b = a * (1.0 + phi.cos());
        let lambda = (1.0 + a * a) / 2.0 + (((1.0 - a * a) / 2.0).powi(2) + b * b / 4.0).sqrt();
        assert_relative_eq!(pmax, a / (2.0 + 2.0 * a) * lambda, epsilon = 1e-12);
        assert_relative_eq!(p_succ_tunable(th, 0.0, phi).unwrap(), pmax, epsilon = 1e-12);
    }
}
