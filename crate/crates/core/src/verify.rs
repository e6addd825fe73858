//! Acceptance suite: each criterion recomputes its quantities by simulation
//! and compares them with the closed forms at a fixed tolerance.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytics::{
    self, linspace, p_min_tunable, p_succ_fixed, p_total_multi, random_signals, result_cells,
    tunable_amplitudes, Cell, Table,
};
use crate::circuit::{apply_element, measure_and_branch, Basis, DetectorConfig};
use crate::elements::{
    beam_splitter, hwp, mode_beam_splitter, pbs, pdbs, phase_shift, qwp, OpticalElement,
};
use crate::error::Result;
use crate::fock::{FockState, Mode, ModeRegistry, Pattern, Polarization, StateVector, Tolerances};
use crate::gates::p_c;
use crate::router::{
    route_fixed_run, route_multi_run, route_tunable_run, ControlQubit, RouterResult, SignalQubit,
    SimOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 20130101 }
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    /// Individual comparisons, failing ones first.
    pub details: Vec<String>,
}

impl CriterionReport {
    fn new(id: u32, title: &'static str) -> Self {
        CriterionReport {
            id,
            title,
            passed: true,
            summary: String::new(),
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.passed = false;
            self.details.push(format!("FAIL {}", detail()));
        }
    }

    fn note(&mut self, detail: String) {
        self.details.push(detail);
    }

    fn error(id: u32, title: &'static str, e: crate::Error) -> Self {
        CriterionReport {
            id,
            title,
            passed: false,
            summary: format!("error: {e}"),
            details: Vec::new(),
        }
    }

    /// One line: `criterion N PASS|FAIL title: summary`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.summary
        )
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.line())?;
        for d in &self.details {
            writeln!(f, "    {d}")?;
        }
        Ok(())
    }
}

fn theta_grid() -> Vec<f64> {
    linspace(0.0, FRAC_PI_2, 7)
}

const VARTHETAS: [f64; 3] = [0.0, FRAC_PI_2, PI];

/// The 7 x 3 x 5 grid shared by the first criteria.
fn fixed_grid(cfg: &VerifyConfig) -> Vec<(f64, f64, SignalQubit)> {
    let signals = random_signals(cfg.seed, 5);
    let mut out = Vec::new();
    for th in theta_grid() {
        for vt in VARTHETAS {
            for s in &signals {
                out.push((th, vt, *s));
            }
        }
    }
    out
}

fn finish(mut r: CriterionReport, checks: usize) -> CriterionReport {
    let failed = r.details.iter().filter(|d| d.starts_with("FAIL")).count();
    r.details.sort_by_key(|d| !d.starts_with("FAIL"));
    if r.summary.is_empty() {
        r.summary = format!("{} of {checks} checks passed", checks - failed);
    }
    r
}

macro_rules! try_report {
    ($id:expr, $title:expr, $body:expr) => {
        match (|| -> Result<CriterionReport> { $body })() {
            Ok(r) => r,
            Err(e) => CriterionReport::error($id, $title, e),
        }
    };
}

pub fn criterion_1(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "fixed-router amplitudes";
    try_report!(1, T, {
        let mut r = CriterionReport::new(1, T);
        let grid = fixed_grid(cfg);
        let runs: Vec<RouterResult> = grid
            .par_iter()
            .map(|&(th, vt, s)| {
                Ok(route_fixed_run(
                    &s,
                    &ControlQubit::new(th, vt)?,
                    false,
                    &SimOptions::default(),
                )?
                .result)
            })
            .collect::<Result<_>>()?;
        for (&(th, vt, _), res) in grid.iter().zip(&runs) {
            let w1 = th.cos() / (2.0 * 2f64.sqrt());
            let w2 = th.sin() / (2.0 * 6f64.sqrt());
            r.check((res.a1.norm() - w1).abs() <= 1e-10, || {
                format!("theta={th} vartheta={vt}: |A1|={} want {w1}", res.a1.norm())
            });
            r.check((res.a2.norm() - w2).abs() <= 1e-10, || {
                format!("theta={th} vartheta={vt}: |A2|={} want {w2}", res.a2.norm())
            });
        }
        Ok(finish(r, 2 * grid.len()))
    })
}

pub fn criterion_2(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "fixed-router success probability";
    try_report!(2, T, {
        let mut r = CriterionReport::new(2, T);
        let s = random_signals(cfg.seed, 1)[0];
        let opts = SimOptions::default();
        for (th, want) in [(0.0, 1.0 / 8.0), (FRAC_PI_2, 1.0 / 24.0)] {
            let p = route_fixed_run(&s, &ControlQubit::new(th, 0.0)?, false, &opts)?
                .result
                .p_succ;
            r.check((p - want).abs() <= 1e-12, || {
                format!("theta={th}: P={p} want {want}")
            });
        }
        let fig = analytics::figure3(101, cfg.seed)?;
        let theta = fig.column("theta").expect("theta column");
        let sim = fig.column("p_sim").expect("p_sim column");
        let mut worst: f64 = 0.0;
        for (t, p) in theta.iter().zip(&sim) {
            let (t, p) = (
                t.as_f64().unwrap_or(f64::NAN),
                p.as_f64().unwrap_or(f64::NAN),
            );
            let want = p_succ_fixed(t)?;
            worst = worst.max((p - want).abs());
            r.check((p - want).abs() <= 1e-10, || {
                format!("curve theta={t}: P={p} want {want}")
            });
        }
        r.note(format!("101-point curve: max deviation {worst:.3e}"));
        Ok(finish(r, 2 + theta.len()))
    })
}

pub fn criterion_3(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "signal preservation";
    try_report!(3, T, {
        let mut r = CriterionReport::new(3, T);
        let grid = fixed_grid(cfg);
        let runs: Vec<RouterResult> = grid
            .par_iter()
            .map(|&(th, vt, s)| {
                Ok(route_fixed_run(
                    &s,
                    &ControlQubit::new(th, vt)?,
                    false,
                    &SimOptions::default(),
                )?
                .result)
            })
            .collect::<Result<_>>()?;
        let mut checks = 0;
        for (&(th, vt, _), res) in grid.iter().zip(&runs) {
            for (port, f, expect_empty) in [
                (1, res.fidelity_out1, th == FRAC_PI_2),
                (2, res.fidelity_out2, th == 0.0),
            ] {
                checks += 1;
                match f {
                    Some(f) => r.check((f - 1.0).abs() <= 1e-10, || {
                        format!("theta={th} vartheta={vt}: port {port} fidelity {f}")
                    }),
                    None => r.check(expect_empty, || {
                        format!("theta={th} vartheta={vt}: port {port} unexpectedly empty")
                    }),
                }
            }
        }
        Ok(finish(r, checks))
    })
}

fn state_fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr() / (a.norm_sqr() * b.norm_sqr()))
}

pub fn criterion_4(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "feed-forward equivalence";
    try_report!(4, T, {
        let mut r = CriterionReport::new(4, T);
        let mut checks = 0;
        for (th, vt, s) in fixed_grid(cfg) {
            let run = route_fixed_run(
                &s,
                &ControlQubit::new(th, vt)?,
                false,
                &SimOptions::default(),
            )?;
            for name in ["post-detection", "pre-pbs2"] {
                let cps: Vec<_> = run.output.checkpoint(name).collect();
                let d = cps.iter().find(|c| c.outcomes == ["D"]).expect("D branch");
                let a = cps.iter().find(|c| c.outcomes == ["A"]).expect("A branch");
                checks += 1;
                let f = state_fidelity(&d.state, &a.state)?;
                r.check(f >= 1.0 - 1e-12, || {
                    format!("theta={th} vartheta={vt} at {name}: fidelity {f}")
                });
            }
        }
        Ok(finish(r, checks))
    })
}

pub fn criterion_5(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "equalized success probability";
    try_report!(5, T, {
        let mut r = CriterionReport::new(5, T);
        let signals = random_signals(cfg.seed, 5);
        let mut thetas = theta_grid();
        thetas.extend(linspace(0.0, FRAC_PI_2, 20));
        let mut checks = 0;
        for th in thetas {
            for s in &signals {
                checks += 1;
                let p = route_fixed_run(
                    s,
                    &ControlQubit::new(th, 0.0)?,
                    true,
                    &SimOptions::default(),
                )?
                .result
                .p_succ;
                r.check((p - 1.0 / 24.0).abs() <= 1e-12, || {
                    format!("theta={th}: P={p}")
                });
            }
        }
        Ok(finish(r, checks))
    })
}

pub fn criterion_6(_cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "tunable-gate success probability P_C";
    try_report!(6, T, {
        let mut r = CriterionReport::new(6, T);
        let p0 = p_c(0.0)?;
        let ppi = p_c(PI)?;
        r.check((p0 - 1.0).abs() <= 1e-12, || format!("P_C(0)={p0}"));
        r.check((ppi - 1.0 / 9.0).abs() <= 1e-12, || {
            format!("P_C(pi)={ppi}")
        });
        let grid = linspace(0.0, PI, 1000);
        let values = grid.iter().map(|&x| p_c(x)).collect::<Result<Vec<_>>>()?;
        let rising: Vec<usize> = (1..values.len())
            .filter(|&k| values[k] > values[k - 1])
            .collect();
        if let Some(&k) = rising.first() {
            let (kmin, vmin) = values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, v)| (i, *v))
                .expect("grid not empty");
            r.check(false, || {
                format!(
                    "not monotone decreasing: {} of {} steps increase, first at phi={:.6}; minimum {vmin:.8} at phi={:.6}",
                    rising.len(),
                    values.len() - 1,
                    grid[k],
                    grid[kmin]
                )
            });
        }
        Ok(finish(r, 3))
    })
}

/// Amplitude of a one-photon Fock state in `state`.
fn single_photon(state: &StateVector, mode: Mode) -> Complex64 {
    state.amplitude_of(&[(mode, 1)])
}

/// `(theta, phi, simulated coefficients, closed-form coefficients, chi)` for one tunable run.
type ArmCase = (f64, f64, [Complex64; 4], [Complex64; 4], f64);

pub fn criterion_7(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "tunable-router amplitudes and routing limit";
    try_report!(7, T, {
        let mut r = CriterionReport::new(7, T);
        let s = random_signals(cfg.seed, 1)[0];
        let mut cases = Vec::new();
        for th in theta_grid() {
            for phi in linspace(0.0, PI, 7) {
                cases.push((th, phi));
            }
        }
        let outcomes: Vec<ArmCase> = cases
            .par_iter()
            .map(|&(th, phi)| {
                let run = route_tunable_run(
                    &s,
                    &ControlQubit::new(th, 0.0)?,
                    phi,
                    &SimOptions::default(),
                )?;
                let cp = run
                    .output
                    .checkpoint("pre-pbs2")
                    .next()
                    .expect("checkpoint");
                let reg = cp.state.registry();
                let m = |p: &str, pol| reg.mode(p, pol);
                let got = [
                    single_photon(&cp.state, m("1", Polarization::H)?),
                    single_photon(&cp.state, m("1", Polarization::V)?),
                    single_photon(&cp.state, m("2", Polarization::V)?),
                    single_photon(&cp.state, m("2", Polarization::H)?),
                ];
                let (big, small) = tunable_amplitudes(th, 0.0, phi)?;
                let want = [
                    s.alpha() * big,
                    s.alpha() * small,
                    s.beta() * big,
                    s.beta() * small,
                ];
                Ok((th, phi, got, want, run.result.chi))
            })
            .collect::<Result<_>>()?;
        let mut checks = 0;
        for (th, phi, got, want, chi) in outcomes {
            // one global phase per branch, fixed on the largest coefficient
            let k = (0..4)
                .max_by(|&i, &j| want[i].norm().total_cmp(&want[j].norm()))
                .unwrap();
            let g = if got[k].norm() > 0.0 {
                got[k] / got[k].norm() / (want[k] / want[k].norm())
            } else {
                Complex64::new(1.0, 0.0)
            };
            for i in 0..4 {
                checks += 1;
                let d = (got[i] / g - want[i]).norm();
                r.check(d <= 1e-10, || {
                    format!("theta={th:.4} phi={phi:.4} coefficient {i}: off by {d:.3e}")
                });
            }
            checks += 1;
            r.check(chi <= phi / 2.0 + 1e-10, || {
                format!("theta={th:.4} phi={phi:.4}: chi={chi} above phi/2")
            });
            if th == FRAC_PI_2 {
                checks += 1;
                r.check((chi - phi / 2.0).abs() <= 1e-10, || {
                    format!("theta=pi/2 phi={phi:.4}: chi={chi}, want phi/2")
                });
            }
        }
        Ok(finish(r, checks))
    })
}

const OPTIMUM_PHIS: [(&str, f64); 4] = [
    ("pi/4", PI / 4.0),
    ("pi/2", FRAC_PI_2),
    ("3pi/4", 3.0 * PI / 4.0),
    ("pi", PI),
];

pub fn criterion_8(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "control angle of maximal success probability";
    try_report!(8, T, {
        let mut r = CriterionReport::new(8, T);
        let s = random_signals(cfg.seed, 1)[0];
        let points = 2001;
        for (label, phi) in OPTIMUM_PHIS {
            let scan = analytics::theta_scan(phi, points, &s)?;
            let (th_sim, p_sim) = scan
                .iter()
                .copied()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("scan not empty");
            let th_formula = analytics::theta_at_pmax(phi)?;
            let d = (th_sim - th_formula).abs();
            r.note(format!(
                "phi={label}: simulated argmax {th_sim:.6} (P={p_sim:.10}), closed form {th_formula:.6}, difference {d:.2e}"
            ));
            r.check(d <= 1e-3, || {
                format!("phi={label}: simulated argmax {th_sim:.6} vs closed form {th_formula:.6}")
            });
        }
        Ok(finish(r, OPTIMUM_PHIS.len()))
    })
}

pub fn criterion_9(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "minimal success probability report";
    try_report!(9, T, {
        let mut r = CriterionReport::new(9, T);
        let s = random_signals(cfg.seed, 1)[0];
        let mut flagged = 0;
        for (label, phi) in OPTIMUM_PHIS {
            let (th, p_sim) = analytics::theta_extremum(phi, 2001, &s, false)?;
            let p_formula = p_min_tunable(phi)?;
            let agree = (p_sim - p_formula).abs() <= 1e-9;
            if !agree {
                flagged += 1;
            }
            r.note(format!(
                "phi={label}: simulated min {p_sim:.12} at theta={th:.6}, closed form {p_formula:.12}{}",
                if agree { "" } else { "  DISCREPANCY" }
            ));
        }
        r.summary = format!(
            "{} of {} phases agree; {flagged} discrepancies flagged",
            OPTIMUM_PHIS.len() - flagged,
            OPTIMUM_PHIS.len()
        );
        Ok(finish(r, OPTIMUM_PHIS.len()))
    })
}

pub fn criterion_10(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "multi-signal routing";
    try_report!(10, T, {
        let mut r = CriterionReport::new(10, T);
        let mut checks = 0;
        for n in 1..=3usize {
            let signals = random_signals(cfg.seed.wrapping_add(n as u64), n);
            for (label, th) in [("0", 0.0), ("pi/4", PI / 4.0), ("pi/2", FRAC_PI_2)] {
                let res = route_multi_run(
                    &signals,
                    &ControlQubit::new(th, 0.0)?,
                    &SimOptions::default(),
                )?
                .result;
                let want = p_total_multi(n, th)?;
                checks += 1;
                r.check((res.p_succ - want).abs() <= 1e-10, || {
                    format!(
                        "n={n} theta={label}: simulated P={:.10e}, formula {want:.10e}",
                        res.p_succ
                    )
                });
                for (port, f) in [(1, res.fidelity_out1), (2, res.fidelity_out2)] {
                    if let Some(f) = f {
                        checks += 1;
                        r.check(f >= 1.0 - 1e-10, || {
                            format!("n={n} theta={label}: port {port} fidelity {f}")
                        });
                    }
                }
            }
        }
        Ok(finish(r, checks))
    })
}

fn lossless_elements(registry: &ModeRegistry, rng: &mut ChaCha8Rng) -> Result<Vec<OpticalElement>> {
    let mut out = Vec::new();
    let paths = ["1", "2", "c"];
    for _ in 0..20 {
        let a = paths[rng.random_range(0..3)];
        let b = paths[(paths.iter().position(|p| *p == a).unwrap() + rng.random_range(1..3)) % 3];
        let angle = rng.random_range(-PI..PI);
        out.push(hwp(angle, registry, a)?);
        out.push(qwp(angle, registry, a)?);
        out.push(pbs(registry, a, b)?);
        out.push(pdbs(rng.random(), rng.random(), registry, a, b)?);
        out.push(beam_splitter(rng.random(), registry, a, b)?);
        out.push(phase_shift(angle, registry.mode(a, Polarization::V)?)?);
    }
    Ok(out)
}

fn random_state(
    registry: &Arc<ModeRegistry>,
    photons: u8,
    rng: &mut ChaCha8Rng,
) -> Result<StateVector> {
    let modes = registry.len();
    let mut terms = Vec::new();
    for _ in 0..4 {
        let mut occ = vec![0u8; modes];
        for _ in 0..photons {
            occ[rng.random_range(0..modes)] += 1;
        }
        terms.push((
            FockState::from_occupations(occ),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        ));
    }
    let s = StateVector::from_terms(registry.clone(), Tolerances::default(), terms)?;
    let n = s.norm_sqr().sqrt();
    Ok(s.scale(Complex64::new(1.0 / n, 0.0)))
}

pub fn criterion_11(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "property suites";
    try_report!(11, T, {
        let mut r = CriterionReport::new(11, T);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let registry = Arc::new(ModeRegistry::with_paths(&["1", "2", "c"])?);
        let elements = lossless_elements(&registry, &mut rng)?;
        let mut checks = 0;

        let mut worst_unitarity: f64 = 0.0;
        for e in &elements {
            let m = e.matrix();
            let defect = (m.adjoint() * m - nalgebra::DMatrix::identity(m.ncols(), m.ncols()))
                .iter()
                .fold(0.0f64, |acc, z| acc.max(z.norm()));
            worst_unitarity = worst_unitarity.max(defect);
            checks += 1;
            r.check(defect < 1e-12, || {
                format!("unitarity: {} defect {defect:.3e}", e.name())
            });
        }
        r.note(format!(
            "unitarity: {} elements, worst defect {worst_unitarity:.2e}",
            elements.len()
        ));

        for photons in 1..=3u8 {
            for _ in 0..10 {
                let mut s = random_state(&registry, photons, &mut rng)?;
                for _ in 0..6 {
                    let e = &elements[rng.random_range(0..elements.len())];
                    s = apply_element(&s, e)?;
                }
                checks += 1;
                let n = s.norm_sqr();
                r.check((n - 1.0).abs() < 1e-12, || {
                    format!("norm conservation: {photons} photons, norm^2 {n}")
                });
            }
        }

        let (ch, cv) = registry.path("c")?;
        for _ in 0..10 {
            let rest = random_state(&registry, 1, &mut rng)?;
            let mut s = rest
                .create(ch)?
                .scale(Complex64::new(0.6, 0.0))
                .add(&rest.create(cv)?.scale(Complex64::new(0.0, 0.8)))?;
            // keep only terms with exactly one photon in c
            s = s.project(&Pattern::new().total(&[ch, cv], 1))?.0;
            let total = s.norm_sqr();
            for basis in [Basis::diagonal(), Basis::rectilinear()] {
                let branches =
                    measure_and_branch(&s, &DetectorConfig::ideal(basis), (ch, cv), &[])?;
                let sum: f64 = branches.iter().map(|b| b.probability()).sum();
                checks += 1;
                r.check((sum - total).abs() <= 1e-12, || {
                    format!("branch completeness: {sum} vs {total}")
                });
            }
            let (h1, _) = registry.path("1")?;
            let sum: f64 = (0..=3)
                .map(|k| s.project(&Pattern::new().exact(h1, k)).map(|x| x.1))
                .sum::<Result<f64>>()?;
            checks += 1;
            r.check((sum - total).abs() <= 1e-12, || {
                format!("pattern completeness: {sum} vs {total}")
            });
        }

        let reg2 = Arc::new(ModeRegistry::new([
            crate::fock::ModeLabel::scalar("a"),
            crate::fock::ModeLabel::scalar("b"),
        ])?);
        let two = StateVector::vacuum(reg2)?
            .create(Mode(0))?
            .create(Mode(1))?;
        let out = apply_element(&two, &mode_beam_splitter(0.5, Mode(0), Mode(1))?)?;
        let coinc = out.amplitude_of(&[(Mode(0), 1), (Mode(1), 1)]).norm();
        let bunched = out.amplitude_of(&[(Mode(0), 2)]).norm_sqr();
        checks += 2;
        r.check(coinc < 1e-15, || {
            format!("HOM: coincidence amplitude {coinc}")
        });
        r.check((bunched - 0.5).abs() < 1e-15, || {
            format!("HOM: P(2,0)={bunched}")
        });

        let exact = SimOptions {
            tolerances: Tolerances {
                prune: 0.0,
                ..Tolerances::default()
            },
            ..SimOptions::default()
        };
        let signals = random_signals(cfg.seed, 3);
        let mut worst: f64 = 0.0;
        for th in theta_grid() {
            let ctl = ControlQubit::new(th, 0.7)?;
            let pairs = [
                (
                    route_fixed_run(&signals[0], &ctl, false, &SimOptions::default())?.result,
                    route_fixed_run(&signals[0], &ctl, false, &exact)?.result,
                ),
                (
                    route_tunable_run(&signals[0], &ctl, 2.0, &SimOptions::default())?.result,
                    route_tunable_run(&signals[0], &ctl, 2.0, &exact)?.result,
                ),
                (
                    route_multi_run(&signals, &ctl, &SimOptions::default())?.result,
                    route_multi_run(&signals, &ctl, &exact)?.result,
                ),
            ];
            for (a, b) in pairs {
                let d = [
                    (a.p_succ - b.p_succ).abs(),
                    (a.a1.norm() - b.a1.norm()).abs(),
                    (a.a2.norm() - b.a2.norm()).abs(),
                    (a.fidelity_out1.unwrap_or(1.0) - b.fidelity_out1.unwrap_or(1.0)).abs(),
                    (a.fidelity_out2.unwrap_or(1.0) - b.fidelity_out2.unwrap_or(1.0)).abs(),
                ]
                .into_iter()
                .fold(0.0, f64::max);
                worst = worst.max(d);
                checks += 1;
                r.check(d <= 1e-12, || {
                    format!("pruning soundness at theta={th}: deviation {d:.3e}")
                });
            }
        }
        r.note(format!("pruning soundness: worst deviation {worst:.2e}"));
        Ok(finish(r, checks))
    })
}

/// CSV artifacts written by `verify`: the two figures and the criterion-1
/// grid.
pub fn artifacts(cfg: &VerifyConfig) -> Result<Vec<(String, String)>> {
    let fig3 = analytics::figure3(101, cfg.seed)?;
    let fig5 = analytics::figure5(31, cfg.seed)?;
    let mut grid = Table::new(&[
        "theta", "vartheta", "alpha_re", "alpha_im", "beta_re", "beta_im",
    ]);
    grid.comments.push(format!("seed={}", cfg.seed));
    let rows: Vec<Vec<Cell>> = fixed_grid(cfg)
        .par_iter()
        .map(|&(th, vt, s)| {
            let res = route_fixed_run(
                &s,
                &ControlQubit::new(th, vt)?,
                false,
                &SimOptions::default(),
            )?
            .result;
            let mut row: Vec<Cell> = [th, vt, s.alpha().re, s.alpha().im, s.beta().re, s.beta().im]
                .into_iter()
                .map(Cell::Num)
                .collect();
            row.extend(result_cells(Some(&res), Some(p_succ_fixed(th)?)));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    grid.rows = rows;
    Ok(vec![
        ("figure3.csv".into(), fig3.to_csv_string()?),
        ("figure5.csv".into(), fig5.to_csv_string()?),
        ("fixed_grid.csv".into(), grid.to_csv_string()?),
    ])
}

pub fn criterion_12(cfg: &VerifyConfig) -> CriterionReport {
    const T: &str = "deterministic output";
    try_report!(12, T, {
        let mut r = CriterionReport::new(12, T);
        let first = artifacts(cfg)?;
        let second = artifacts(cfg)?;
        for ((name, a), (_, b)) in first.iter().zip(&second) {
            r.check(a.as_bytes() == b.as_bytes(), || {
                format!("{name} differs between runs")
            });
            r.note(format!("{name}: {} bytes", a.len()));
        }
        Ok(finish(r, first.len()))
    })
}

pub type CriterionFn = fn(&VerifyConfig) -> CriterionReport;

pub const CRITERIA: [CriterionFn; 12] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
    criterion_12,
];

pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|f| f(cfg)).collect()
}
