//! Seeded property suites shared by the `verify` command and the acceptance
//! tests. Every suite returns a [`SuiteReport`] whose JSON form depends only
//! on the configuration, the seed and the mutation.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::equation::{
    curvature_drift, integrate_worldline, residual_ep, residual_proper, Jet, Trajectory,
};
use crate::error::Result;
use crate::fd::FdPolicy;
use crate::hamiltonian::{
    canonical_flow, compare_flows, energy_along, hamiltonian_forms, inverse_legendre, jacobi_block, momenta,
    momentum_along, relative_drift, typeset_matrix, CanonicalState,
};
use crate::lagrangian::{
    eval_l, euler_poisson_operator, gauge_difference_check, momenta_of, EpPolicy, LagrangianSpec, Which, EP_SIGN,
};
use crate::minkowski::Vec2;
use crate::sampling::Sampler;
use crate::spin::{
    calibrate_coincidence, dixon_residuals, pirani_spin_from_motion, planar_spin_residual, CoincidenceSample,
    SpinCheck,
};
use crate::symmetry::{invariance_report, lorentz_transform_jet, PoincareGen, SymmetrySample, IDENTITIES};
use crate::variationality::{
    coefficients_of_eq20, helmholtz_report, CoefficientField, MutatedField, Mutation, Sample, CONDITIONS,
};

pub const HELMHOLTZ_SAMPLES: usize = 50;
pub const SYMMETRY_SAMPLES: usize = 50;
pub const BOOST_SAMPLES: usize = 10;
pub const EP_SAMPLES: usize = 200;
pub const GAUGE_SAMPLES: usize = 100;
pub const DEFECT_SAMPLES: usize = 100;
pub const LEGENDRE_SAMPLES: usize = 1000;
pub const JACOBI_SAMPLES: usize = 100;
pub const COINCIDENCE_SAMPLES: usize = 1000;

/// Velocities for the canonical checks stay inside this disk, clear of the
/// fold of the Legendre map at √(2/3).
pub const CANONICAL_SAMPLE_SPEED: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Equation,
    Helmholtz,
    Symmetry,
    Lagrangian,
    Hamiltonian,
    Spin,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Equation, Suite::Helmholtz, Suite::Symmetry, Suite::Lagrangian, Suite::Hamiltonian, Suite::Spin];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Equation => "equation",
            Suite::Helmholtz => "helmholtz",
            Suite::Symmetry => "symmetry",
            Suite::Lagrangian => "lagrangian",
            Suite::Hamiltonian => "hamiltonian",
            Suite::Spin => "spin",
        }
    }

    pub fn parse(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// Passes when the residual is strictly below the tolerance.
    Below,
    /// Passes when the residual is strictly above the tolerance (mutation
    /// and control runs).
    Above,
    /// Passes when the residual is exactly zero (structural checks).
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub samples: usize,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, max_residual: f64, tolerance: f64, samples: usize) -> Self {
        // NaN never passes
        let passed = max_residual < tolerance;
        Check { name: name.into(), max_residual, tolerance, comparison: Comparison::Below, samples, passed }
    }

    pub fn zero(name: impl Into<String>, max_residual: f64, samples: usize) -> Self {
        let passed = max_residual == 0.0;
        Check { name: name.into(), max_residual, tolerance: 0.0, comparison: Comparison::Zero, samples, passed }
    }

    pub fn above(name: impl Into<String>, max_residual: f64, tolerance: f64, samples: usize) -> Self {
        let passed = max_residual > tolerance;
        Check { name: name.into(), max_residual, tolerance, comparison: Comparison::Above, samples, passed }
    }
}

/// A single sampled residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub check: String,
    pub sample: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub spin: Vec<SpinCheck>,
    pub residuals: Vec<Residual>,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, mutation: Option<Mutation>) -> Self {
        SuiteReport { suite, seed, mutation, passed: true, checks: Vec::new(), spin: Vec::new(), residuals: Vec::new() }
    }

    fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    fn record_residuals(&mut self, name: &str, values: &[f64]) {
        self.residuals.extend(values.iter().enumerate().map(|(i, &value)| Residual {
            check: name.to_string(),
            sample: i,
            value,
        }));
    }

    /// Records per-sample residuals and the aggregated check.
    fn push_sampled(&mut self, name: &str, values: &[f64], tolerance: f64) {
        self.record_residuals(name, values);
        self.push(Check::below(name, max_abs(values.iter().copied()), tolerance, values.len()));
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    // propagate NaN so a broken sample cannot pass
    values.into_iter().fold(0.0, |m: f64, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn vec_drift(values: &[Vec2]) -> f64 {
    let Some(first) = values.first() else { return 0.0 };
    let scale = first.amax().max(1e-300);
    values.iter().map(|p| (p - first).amax() / scale).fold(0.0, f64::max)
}

/// Runs one suite. `mutation` replaces the coefficient field in the
/// helmholtz and symmetry suites and is ignored elsewhere.
pub fn run_suite(suite: Suite, config: &RunConfig, mutation: Option<Mutation>) -> Result<SuiteReport> {
    match suite {
        Suite::Equation => equation_suite(config),
        Suite::Helmholtz => helmholtz_suite(config, mutation),
        Suite::Symmetry => symmetry_suite(config, mutation),
        Suite::Lagrangian => lagrangian_suite(config),
        Suite::Hamiltonian => hamiltonian_suite(config),
        Suite::Spin => spin_suite(config),
    }
}

fn field(config: &RunConfig, mutation: Option<Mutation>) -> Box<dyn CoefficientField> {
    let base = coefficients_of_eq20(config.mu(), &config.convention);
    match mutation {
        None => Box::new(base),
        Some(m) => Box::new(MutatedField { base, mutation: m }),
    }
}

/// The configured worldline of the third-order equation.
pub fn worldline(config: &RunConfig) -> Result<Trajectory> {
    integrate_worldline(
        config.x0(),
        config.v0(),
        config.vp0(),
        config.mu(),
        (config.t_span[0], config.t_span[1]),
        &config.integration,
        &config.convention,
    )
}

pub fn equation_suite(config: &RunConfig) -> Result<SuiteReport> {
    let conv = &config.convention;
    let mu = config.mu();
    let mut report = SuiteReport::new(Suite::Equation, config.seed, None);
    let traj = worldline(config)?;
    let proper = traj.to_proper_time(conv)?;
    let worst = max_abs(proper.jets.iter().map(|p| residual_proper(p, mu, conv).amax()));
    report.push(Check::below("proper-time-residual", worst, 1e-6, proper.len()));
    report.push(Check::below("curvature-drift", curvature_drift(&proper, conv)?, 1e-6, proper.len()));
    Ok(report)
}

pub fn helmholtz_suite(config: &RunConfig, mutation: Option<Mutation>) -> Result<SuiteReport> {
    let cf = field(config, mutation);
    let mut rng = Sampler::new(config.seed);
    let samples: Vec<Sample> = (0..HELMHOLTZ_SAMPLES)
        .map(|_| {
            let t = rng.uniform(-1.0, 1.0);
            let x = rng.unit_box();
            Sample::new(t, x, rng.velocity())
        })
        .collect();
    let rows = helmholtz_report(cf.as_ref(), &samples, &FdPolicy::default())?;
    let mut report = SuiteReport::new(Suite::Helmholtz, config.seed, mutation);
    for cond in CONDITIONS {
        let values: Vec<f64> = rows.iter().filter(|r| r.condition == cond).map(|r| r.residual).collect();
        report.push_sampled(&format!("helmholtz-({cond})"), &values, 1e-6);
    }
    Ok(report)
}

pub fn symmetry_suite(config: &RunConfig, mutation: Option<Mutation>) -> Result<SuiteReport> {
    let conv = &config.convention;
    let mu = config.mu();
    let cf = field(config, mutation);
    let mut rng = Sampler::new(config.seed);
    let samples: Vec<SymmetrySample> = (0..SYMMETRY_SAMPLES)
        .map(|_| SymmetrySample {
            v: rng.velocity(),
            vp: rng.unit_box(),
            omega: rng.uniform(-1.0, 1.0),
            piv: rng.unit_box(),
        })
        .collect();
    let rows = invariance_report(cf.as_ref(), &samples, conv, &FdPolicy::default())?;
    let mut report = SuiteReport::new(Suite::Symmetry, config.seed, mutation);
    for id in IDENTITIES {
        let values: Vec<f64> = rows.iter().filter(|r| r.identity == id).map(|r| r.residual).collect();
        report.push_sampled(&format!("invariance-{id}"), &values, 1e-6);
    }
    let mut boosted = Vec::with_capacity(BOOST_SAMPLES);
    for _ in 0..BOOST_SAMPLES {
        let (v, vp) = (rng.velocity(), rng.unit_box());
        let gen = PoincareGen::new(rng.uniform(-1.0, 1.0), rng.unit_box());
        let lambda = rng.uniform(-0.5, 0.5);
        let jet = Jet::on_shell(0.0, rng.unit_box(), v, vp, mu, conv)?;
        let out = lorentz_transform_jet(&jet, &gen, lambda, conv)?;
        boosted.push(residual_ep(&out, mu, conv)?.amax());
    }
    report.push_sampled("boosted-solution", &boosted, 1e-8);
    Ok(report)
}

pub fn lagrangian_suite(config: &RunConfig) -> Result<SuiteReport> {
    let conv = &config.convention;
    let mu = config.mu();
    let policy = EpPolicy::default();
    let mut rng = Sampler::new(config.seed);
    let mut report = SuiteReport::new(Suite::Lagrangian, config.seed, None);

    let jets: Vec<Jet> = (0..EP_SAMPLES)
        .map(|_| {
            let (v, vp, vpp) = (rng.velocity(), rng.unit_box(), rng.unit_box());
            Jet::new(0.0, Vec2::zeros(), v, vp, vpp)
        })
        .collect();
    for (which, name) in [(Which::L1, "euler-poisson-l1"), (Which::L2, "euler-poisson-l2")] {
        let spec = LagrangianSpec::new(which, mu);
        let values = jets
            .iter()
            .map(|j| Ok((euler_poisson_operator(&spec, j, conv, &policy)? - residual_ep(j, mu, conv)? * EP_SIGN).amax()))
            .collect::<Result<Vec<_>>>()?;
        report.push_sampled(name, &values, 1e-5);
    }

    let gauge = (0..GAUGE_SAMPLES)
        .map(|_| gauge_difference_check(&rng.velocity(), &rng.unit_box(), conv))
        .collect::<Result<Vec<_>>>()?;
    report.push_sampled("gauge-identity", &gauge, 1e-7);

    let mut defect1 = Vec::with_capacity(DEFECT_SAMPLES);
    let mut defect2 = Vec::with_capacity(DEFECT_SAMPLES);
    for _ in 0..DEFECT_SAMPLES {
        let jet = Jet::new(0.0, Vec2::zeros(), rng.velocity(), rng.unit_box(), rng.unit_box());
        let l1 = |v: &Vec2, vp: &Vec2| eval_l(&LagrangianSpec::new(Which::L1, mu), v, vp, conv);
        let l2 = |v: &Vec2, vp: &Vec2| eval_l(&LagrangianSpec::new(Which::L2, mu), v, vp, conv);
        defect1.push(momenta_of(&l1, &jet, &policy)?.1.x);
        defect2.push(momenta_of(&l2, &jet, &policy)?.1.y);
    }
    report.push_sampled("defect-l1-first-momentum", &defect1, 1e-12);
    report.push_sampled("defect-l2-first-momentum", &defect2, 1e-12);
    Ok(report)
}

pub fn hamiltonian_suite(config: &RunConfig) -> Result<SuiteReport> {
    let conv = &config.convention;
    let mu = config.mu();
    let mut rng = Sampler::new(config.seed);
    let mut report = SuiteReport::new(Suite::Hamiltonian, config.seed, None);

    let mut roundtrip = Vec::with_capacity(LEGENDRE_SAMPLES);
    let mut forms = Vec::with_capacity(LEGENDRE_SAMPLES);
    for _ in 0..LEGENDRE_SAMPLES {
        let (v, vp) = (rng.velocity_within(CANONICAL_SAMPLE_SPEED), rng.unit_box());
        let (p, pp) = momenta(&v, &vp, mu, conv)?;
        let (v2, vp2) = inverse_legendre(&p, &pp, mu, conv)?;
        roundtrip.push((v2 - v).amax().max((vp2 - vp).amax()));
        let h = hamiltonian_forms(&v, &vp, mu, conv)?;
        forms.push((h.wedge_form - h.momentum_form).abs() / h.wedge_form.abs().max(1.0));
    }
    report.push_sampled("legendre-roundtrip", &roundtrip, 1e-10);
    report.push_sampled("hamiltonian-forms", &forms, 1e-12);

    let mut jacobi = Vec::with_capacity(JACOBI_SAMPLES);
    let mut structural = Vec::with_capacity(JACOBI_SAMPLES);
    for _ in 0..JACOBI_SAMPLES {
        let v = rng.velocity_within(CANONICAL_SAMPLE_SPEED);
        let block = jacobi_block(&v, conv)?;
        let w = conv.subluminal(&v)?;
        let printed = typeset_matrix(&v, conv)? * (2.0 * w.powf(1.5) / block.delta);
        jacobi.push((block.dv_dpp - printed).amax() / printed.amax().max(1.0));
        // v is recovered from p′ alone: shifting p leaves it bit-identical
        let vp = rng.unit_box();
        let (p, pp) = momenta(&v, &vp, mu, conv)?;
        let (va, _) = inverse_legendre(&p, &pp, mu, conv)?;
        let (vb, _) = inverse_legendre(&(p + rng.unit_box()), &pp, mu, conv)?;
        structural.push((va - vb).amax());
    }
    report.push_sampled("jacobi-block", &jacobi, 1e-8);
    report.record_residuals("dv-dp-vanishes", &structural);
    report.push(Check::zero("dv-dp-vanishes", max_abs(structural.iter().copied()), structural.len()));

    let direct = worldline(config)?;
    let state0 = CanonicalState::from_velocities(config.t_span[0], config.x0(), &config.v0(), &config.vp0(), mu, conv)?;
    let canonical = canonical_flow(&state0, mu, config.t_span[1], &config.integration, conv)?;
    let n = direct.len();
    report.push(Check::below("energy-drift-direct", relative_drift(energy_along(&direct, conv)?), 1e-6, n));
    report.push(Check::below("momentum-drift-direct", vec_drift(&momentum_along(&direct, conv)?), 1e-6, n));
    let m = canonical.states.len();
    report.push(Check::below("energy-drift-canonical", relative_drift(canonical.energy.iter().copied()), 1e-6, m));
    let cp: Vec<Vec2> = canonical.states.iter().map(|s| s.p).collect();
    report.push(Check::below("momentum-drift-canonical", vec_drift(&cp), 1e-6, m));
    report.push(Check::below("two-flow-deviation", compare_flows(&direct, &canonical)?.max_deviation, 1e-6, n));
    Ok(report)
}

/// Coincidence samples: v in the subluminal disk, v′ in the unit box,
/// m₀ ∈ [0.5, 2], 𝔰³ ∈ ±[0.5, 2].
pub fn coincidence_samples(rng: &mut Sampler, n: usize) -> Vec<CoincidenceSample> {
    (0..n)
        .map(|_| {
            let (v, vp) = (rng.velocity(), rng.unit_box());
            let m0 = rng.uniform(0.5, 2.0);
            let s3 = rng.uniform(0.5, 2.0) * if rng.uniform(-1.0, 1.0) < 0.0 { -1.0 } else { 1.0 };
            (v, vp, m0, s3)
        })
        .collect()
}

pub fn spin_suite(config: &RunConfig) -> Result<SuiteReport> {
    let mut rng = Sampler::new(config.seed);
    let mut report = SuiteReport::new(Suite::Spin, config.seed, None);
    let samples = coincidence_samples(&mut rng, COINCIDENCE_SAMPLES);
    let calibration = calibrate_coincidence(&samples, &config.convention, 1e-10)?;
    let closing_count = calibration.trials.iter().filter(|t| t.max_residual < 1e-10).count();
    let best = calibration.trials.iter().map(|t| t.max_residual).fold(f64::INFINITY, f64::min);
    let mut coincidence = Check::below("coincidence", best, 1e-10, samples.len());
    coincidence.passed &= closing_count == 1;
    report.push(coincidence);
    for t in &calibration.trials {
        report.spin.push(SpinCheck {
            check: "coincidence".into(),
            max_residual: t.max_residual,
            samples: samples.len(),
            sigma: t.sigma,
            sgn_g: t.sgn_g,
        });
    }
    let Some(closing) = calibration.closing else {
        report.passed = false;
        return Ok(report);
    };

    let conv = config.convention.with_sgn_g(closing.sgn_g)?;
    let (m0, _) = config.mass.spin_pair();
    let mu = config.mu();
    let cfg = RunConfig { convention: conv, ..config.clone() };
    let proper = worldline(&cfg)?.to_proper_time(&conv)?;
    let n = proper.len();
    let mut a_ud = 0.0f64;
    let mut a_u = 0.0f64;
    let mut planar = 0.0f64;
    for j in &proper.jets {
        let st = pirani_spin_from_motion(j, m0, mu, &conv)?;
        a_ud = a_ud.max(st.a.dot(&j.ud).abs());
        a_u = a_u.max((st.a.dot(&j.u) + m0 / mu).abs());
        planar = planar.max(planar_spin_residual(&st, j));
    }
    let (scalar_p, scalar_s) = dixon_residuals(&proper, m0, mu, &conv)?;
    let rows = [
        Check::below("spin-orthogonal-acceleration", a_ud, 1e-8, n),
        Check::below("spin-pirani-projection", a_u, 1e-8, n),
        Check::below("dixon-momentum", scalar_p, 1e-5, n),
        Check::below("dixon-spin", scalar_s, 1e-5, n),
        Check::below("planar-spin", planar, 1e-10, n),
    ];
    for c in rows {
        report.spin.push(SpinCheck {
            check: c.name.clone(),
            max_residual: c.max_residual,
            samples: n,
            sigma: closing.sigma,
            sgn_g: closing.sgn_g,
        });
        report.push(c);
    }
    Ok(report)
}

/// Runs every suite in order.
pub fn run_all(config: &RunConfig, mutation: Option<Mutation>) -> Result<Vec<SuiteReport>> {
    Suite::ALL.iter().map(|&s| run_suite(s, config, mutation)).collect()
}
