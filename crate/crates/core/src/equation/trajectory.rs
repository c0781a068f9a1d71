use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{solve_jerk, to_proper_jet, Integration, Jet, ProperJet};
use crate::error::{Error, Result};
use crate::minkowski::{Convention, Vec2};

pub const TRAJECTORY_CSV_HEADER: [&str; 7] = ["t", "x1", "x2", "v1", "v2", "vp1", "vp2"];

/// Samples of a time-parametrized solution, strictly increasing in t.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    jets: Vec<Jet>,
    pub integration: Integration,
    pub mu: f64,
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub v1: f64,
    pub v2: f64,
    pub vp1: f64,
    pub vp2: f64,
}

/// JSON sidecar describing how a trajectory was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub initial: InitialData,
    pub mu: f64,
    pub method: String,
    pub step: f64,
    pub t_span: [f64; 2],
    pub convention: Convention,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub x: [f64; 2],
    pub v: [f64; 2],
    pub vp: [f64; 2],
}

impl Trajectory {
    pub fn new(jets: Vec<Jet>, integration: Integration, mu: f64) -> Result<Self> {
        if jets.is_empty() {
            return Err(Error::MalformedTrajectory("no samples".into()));
        }
        if let Some(w) = jets.windows(2).find(|w| !(w[1].t > w[0].t)) {
            return Err(Error::MalformedTrajectory(format!(
                "time not strictly increasing at t = {}",
                w[1].t
            )));
        }
        Ok(Trajectory { jets, integration, mu })
    }

    pub fn jets(&self) -> &[Jet] {
        &self.jets
    }

    pub fn first(&self) -> &Jet {
        &self.jets[0]
    }

    pub fn last(&self) -> &Jet {
        self.jets.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.jets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets.is_empty()
    }

    pub fn manifest(&self, conv: &Convention) -> Manifest {
        let j = self.first();
        Manifest {
            initial: InitialData { x: [j.x.x, j.x.y], v: [j.v.x, j.v.y], vp: [j.vp.x, j.vp.y] },
            mu: self.mu,
            method: self.integration.method.name().to_string(),
            step: self.integration.step,
            t_span: [j.t, self.last().t],
            convention: *conv,
            samples: self.len(),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = TrajectoryRecord> + '_ {
        self.jets.iter().map(|j| TrajectoryRecord {
            t: j.t,
            x1: j.x.x,
            x2: j.x.y,
            v1: j.v.x,
            v2: j.v.y,
            vp1: j.vp.x,
            vp2: j.vp.y,
        })
    }

    /// Writes `t,x1,x2,v1,v2,vp1,vp2` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in self.records() {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rebuilds a trajectory from CSV rows; v″ is recovered from the
    /// equation of motion with the given μ.
    pub fn from_csv<R: Read>(input: R, mu: f64, integration: Integration, conv: &Convention) -> Result<Self> {
        let records = read_records(input)?;
        let jets = records
            .iter()
            .map(|r| {
                let v = Vec2::new(r.v1, r.v2);
                let vp = Vec2::new(r.vp1, r.vp2);
                Ok(Jet::new(r.t, Vec2::new(r.x1, r.x2), v, vp, solve_jerk(&v, &vp, mu, conv)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(jets, integration, mu)
    }

    /// Reparametrizes by proper time. τ is accumulated with the cubic
    /// Hermite rule, using dτ/dt = √w and its exact derivative (v·v′)/√w.
    pub fn to_proper_time(&self, conv: &Convention) -> Result<ProperTrajectory> {
        let mut tau = Vec::with_capacity(self.len());
        let mut jets = Vec::with_capacity(self.len());
        let rate = |j: &Jet| -> Result<(f64, f64)> {
            let s = conv.lorentz_factor(&j.v)?;
            Ok((s, conv.dot2(&j.v, &j.vp) / s))
        };
        let mut acc = 0.0;
        let mut prev: Option<(&Jet, (f64, f64))> = None;
        for j in &self.jets {
            let r = rate(j)?;
            if let Some((pj, pr)) = prev {
                let h = j.t - pj.t;
                acc += 0.5 * h * (pr.0 + r.0) + h * h / 12.0 * (pr.1 - r.1);
            }
            tau.push(acc);
            jets.push(to_proper_jet(j, conv)?);
            prev = Some((j, r));
        }
        Ok(ProperTrajectory { tau, jets })
    }
}

/// Parses and validates trajectory CSV. The header must match
/// [`TRAJECTORY_CSV_HEADER`] exactly and every value must be finite.
pub fn read_records<R: Read>(input: R) -> Result<Vec<TrajectoryRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRAJECTORY_CSV_HEADER.iter().copied()) {
        return Err(Error::MalformedTrajectory(format!("unexpected header {:?}", header)));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: TrajectoryRecord = row?;
        let values = [r.t, r.x1, r.x2, r.v1, r.v2, r.vp1, r.vp2];
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::MalformedTrajectory(format!("non-finite value at t = {}", r.t)));
        }
        out.push(r);
    }
    if out.is_empty() {
        return Err(Error::MalformedTrajectory("no rows".into()));
    }
    Ok(out)
}

/// Proper-time samples with their τ values.
#[derive(Debug, Clone, PartialEq)]
pub struct ProperTrajectory {
    pub tau: Vec<f64>,
    pub jets: Vec<ProperJet>,
}

impl ProperTrajectory {
    pub fn len(&self) -> usize {
        self.jets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets.is_empty()
    }
}
