//! The sourced continuity equation solved along characteristics, used as an
//! independent check on the spectral density.

use crate::error::{Error, Result};
use crate::field::{PointEvaluator, SpectralScalarField, VelocityField};
use crate::galerkin::{truncated_coupling_source, GalerkinTruncation, SimState};
use crate::params::ModelParams;

/// One stored time level of a run.
#[derive(Clone, Debug)]
pub struct FlowSnapshot {
    pub t: f64,
    pub u: VelocityField,
    /// Mass transfer rate `Ψ`.
    pub source: SpectralScalarField,
    pub rho: SpectralScalarField,
}

/// Velocity, source and density at every accepted step, ascending in time.
#[derive(Clone, Debug, Default)]
pub struct FlowHistory {
    snapshots: Vec<FlowSnapshot>,
}

impl FlowHistory {
    pub fn new() -> Self {
        FlowHistory::default()
    }

    /// Appends a level; times must increase strictly.
    pub fn push(&mut self, snapshot: FlowSnapshot) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if !(snapshot.t > last.t) {
                return Err(Error::Input(format!(
                    "history times must increase: {} after {}",
                    snapshot.t, last.t
                )));
            }
            last.rho.check_grid(&snapshot.rho)?;
        }
        self.snapshots.push(snapshot);
        Ok(())
    }

    /// Records a state, computing its mass transfer rate.
    pub fn record(&mut self, s: &SimState, trunc: &GalerkinTruncation, params: &ModelParams) -> Result<()> {
        let source = truncated_coupling_source(&s.psi, &s.u, trunc, params)?;
        self.push(FlowSnapshot {
            t: s.t,
            u: s.u.clone(),
            source,
            rho: s.rho.clone(),
        })
    }

    pub fn snapshots(&self) -> &[FlowSnapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn start(&self) -> Option<f64> {
        self.snapshots.first().map(|s| s.t)
    }

    pub fn end(&self) -> Option<f64> {
        self.snapshots.last().map(|s| s.t)
    }

    fn covers(&self, t: f64) -> Result<()> {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) if t >= a && t <= b => Ok(()),
            (Some(a), Some(b)) => Err(Error::Coverage {
                requested: t,
                start: a,
                end: b,
            }),
            _ => Err(Error::Coverage {
                requested: t,
                start: f64::NAN,
                end: f64::NAN,
            }),
        }
    }

    /// Index `i` with `t_i <= t <= t_{i+1}` and the weight of `t_{i+1}`.
    fn bracket(&self, t: f64) -> (usize, f64) {
        let n = self.snapshots.len();
        if n == 1 {
            return (0, 0.0);
        }
        let i = self.snapshots.partition_point(|s| s.t <= t).clamp(1, n - 1) - 1;
        let (a, b) = (self.snapshots[i].t, self.snapshots[i + 1].t);
        (i, ((t - a) / (b - a)).clamp(0.0, 1.0))
    }

    fn blend(a: &SpectralScalarField, b: &SpectralScalarField, w: f64) -> SpectralScalarField {
        if w == 0.0 {
            a.clone()
        } else {
            SpectralScalarField::lincomb(1.0 - w, a, w, b)
        }
    }

    /// Evaluator of `(u_1..u_d, Ψ)` linearly interpolated in time.
    fn evaluator(&self, t: f64) -> Result<PointEvaluator> {
        self.covers(t)?;
        let (i, w) = self.bracket(t);
        let a = &self.snapshots[i];
        let b = &self.snapshots[(i + 1).min(self.snapshots.len() - 1)];
        let mut fields: Vec<SpectralScalarField> = a
            .u
            .components()
            .iter()
            .zip(b.u.components())
            .map(|(x, y)| FlowHistory::blend(x, y, w))
            .collect();
        fields.push(FlowHistory::blend(&a.source, &b.source, w));
        let refs: Vec<&SpectralScalarField> = fields.iter().collect();
        Ok(PointEvaluator::for_fields(&refs))
    }

    /// Velocity interpolated linearly in time.
    pub fn velocity_at(&self, t: f64) -> Result<VelocityField> {
        self.covers(t)?;
        let (i, w) = self.bracket(t);
        let a = &self.snapshots[i];
        let b = &self.snapshots[(i + 1).min(self.snapshots.len() - 1)];
        let comps = a
            .u
            .components()
            .iter()
            .zip(b.u.components())
            .map(|(x, y)| FlowHistory::blend(x, y, w))
            .collect();
        VelocityField::from_components_unchecked(comps)
    }
}

/// A trajectory `X_α(t)` of the flow.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicTrace {
    pub seed: Vec<f64>,
    /// Sample times in the order of integration.
    pub times: Vec<f64>,
    /// Positions wrapped into the fundamental cell.
    pub positions: Vec<Vec<f64>>,
    /// `Ψ` sampled along the trajectory at `times`.
    pub sources: Vec<f64>,
    /// `∫ Ψ(τ, X_α(τ)) dτ` over the traced interval, oriented forward in time.
    pub accumulated_source: f64,
}

fn wrap(x: f64, l: f64) -> f64 {
    let w = x.rem_euclid(l);
    if w >= l {
        0.0
    } else {
        w
    }
}

/// Integrates `dX/dt = u(t, X)` from `t_from` to `t_to` (either direction) for
/// every seed with classical RK4, sub-stepping each history interval with steps
/// no longer than `dt_sub`. Positions are recorded at every history time crossed.
pub fn trace_characteristics(
    history: &FlowHistory,
    seeds: &[Vec<f64>],
    t_from: f64,
    t_to: f64,
    dt_sub: f64,
) -> Result<Vec<CharacteristicTrace>> {
    if !(dt_sub > 0.0 && dt_sub.is_finite()) {
        return Err(Error::Parameter(format!("sub-step must be positive, got {dt_sub}")));
    }
    history.covers(t_from)?;
    history.covers(t_to)?;
    let first = history.snapshots.first().expect("covered history is nonempty");
    let grid = first.rho.grid().clone();
    let dim = grid.dim();
    for s in seeds {
        if s.len() != dim {
            return Err(Error::Dimension(format!(
                "seed has {} coordinates on a {dim}-dimensional grid",
                s.len()
            )));
        }
    }

    // nodes: t_from, every history time strictly between, t_to
    let forward = t_to >= t_from;
    let mut nodes = vec![t_from];
    let inner: Vec<f64> = history
        .snapshots
        .iter()
        .map(|s| s.t)
        .filter(|&t| if forward { t > t_from && t < t_to } else { t < t_from && t > t_to })
        .collect();
    if forward {
        nodes.extend(inner);
    } else {
        nodes.extend(inner.into_iter().rev());
    }
    if t_to != t_from {
        nodes.push(t_to);
    }

    let lengths = grid.lengths().to_vec();
    let mut pos: Vec<Vec<f64>> = seeds.to_vec();
    let mut traces: Vec<CharacteristicTrace> = seeds
        .iter()
        .map(|s| CharacteristicTrace {
            seed: s.clone(),
            times: Vec::with_capacity(nodes.len()),
            positions: Vec::with_capacity(nodes.len()),
            sources: Vec::with_capacity(nodes.len()),
            accumulated_source: 0.0,
        })
        .collect();

    let sample = |traces: &mut Vec<CharacteristicTrace>, pos: &[Vec<f64>], t: f64, ev: &PointEvaluator| {
        for (tr, x) in traces.iter_mut().zip(pos) {
            let wrapped: Vec<f64> = x.iter().zip(&lengths).map(|(&v, &l)| wrap(v, l)).collect();
            let psi = ev.eval_all(&wrapped)[dim].re;
            tr.times.push(t);
            tr.positions.push(wrapped);
            tr.sources.push(psi);
        }
    };

    let mut ev = history.evaluator(nodes[0])?;
    sample(&mut traces, &pos, nodes[0], &ev);
    for w in nodes.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let steps = ((tb - ta).abs() / dt_sub).ceil().max(1.0) as usize;
        let h = (tb - ta) / steps as f64;
        for k in 0..steps {
            let t0 = ta + h * k as f64;
            let e_mid = history.evaluator(t0 + 0.5 * h)?;
            let e_end = if k + 1 == steps {
                history.evaluator(tb)?
            } else {
                history.evaluator(t0 + h)?
            };
            for x in pos.iter_mut() {
                let vel = |e: &PointEvaluator, p: &[f64]| -> Vec<f64> {
                    let v = e.eval_all(p);
                    (0..dim).map(|a| v[a].re).collect()
                };
                let k1 = vel(&ev, x);
                let p2: Vec<f64> = (0..dim).map(|a| x[a] + 0.5 * h * k1[a]).collect();
                let k2 = vel(&e_mid, &p2);
                let p3: Vec<f64> = (0..dim).map(|a| x[a] + 0.5 * h * k2[a]).collect();
                let k3 = vel(&e_mid, &p3);
                let p4: Vec<f64> = (0..dim).map(|a| x[a] + h * k3[a]).collect();
                let k4 = vel(&e_end, &p4);
                for a in 0..dim {
                    x[a] += h / 6.0 * (k1[a] + 2.0 * (k2[a] + k3[a]) + k4[a]);
                }
            }
            ev = e_end;
        }
        sample(&mut traces, &pos, tb, &ev);
    }

    for tr in traces.iter_mut() {
        let integral = integrate_samples(&tr.times, &tr.sources);
        tr.accumulated_source = if forward { integral } else { -integral };
    }
    Ok(traces)
}

/// `∫ f dt` over samples at (possibly nonuniform, possibly descending) times,
/// by composite Simpson on pairs of intervals. A trailing odd interval uses the
/// quadratic through the last three samples.
pub fn integrate_samples(t: &[f64], f: &[f64]) -> f64 {
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
    }
    // ∫_{t0}^{t2} of the quadratic through three points
    let pair = |i: usize| -> f64 {
        let h0 = t[i + 1] - t[i];
        let h1 = t[i + 2] - t[i + 1];
        let hs = h0 + h1;
        hs / 6.0
            * (f[i] * (2.0 - h1 / h0) + f[i + 1] * hs * hs / (h0 * h1) + f[i + 2] * (2.0 - h0 / h1))
    };
    let mut sum = 0.0;
    let mut i = 0;
    while i + 2 < n {
        sum += pair(i);
        i += 2;
    }
    if i + 1 < n {
        // last interval [t_{n-2}, t_{n-1}] from the quadratic through the last three points
        let (a, b, c) = (n - 3, n - 2, n - 1);
        let h0 = t[b] - t[a];
        let h1 = t[c] - t[b];
        let w_a = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        let w_b = h1 * (h1 + 3.0 * h0) / (6.0 * h0);
        let w_c = h1 * (3.0 * h0 + 2.0 * h1) / (6.0 * (h0 + h1));
        sum += w_a * f[a] + w_b * f[b] + w_c * f[c];
    }
    sum
}

/// `ρ(t, x) = ρ₀(α) + ∫ Ψ(τ, X_α(τ)) dτ` with `α` found by tracing the
/// characteristic through `x` back to the start of the history, where `ρ₀`
/// is given.
pub fn density_oracle(
    rho0: &SpectralScalarField,
    history: &FlowHistory,
    points: &[Vec<f64>],
    t: f64,
    dt_sub: f64,
) -> Result<Vec<f64>> {
    let start = history
        .start()
        .ok_or(Error::Coverage {
            requested: t,
            start: f64::NAN,
            end: f64::NAN,
        })?;
    let traces = trace_characteristics(history, points, t, start, dt_sub)?;
    let ev = PointEvaluator::new(rho0);
    Ok(traces
        .iter()
        .map(|tr| {
            let alpha = tr.positions.last().expect("at least one sample");
            ev.eval(alpha).re + tr.accumulated_source
        })
        .collect())
}

/// Relative defect of the integrated renormalized continuity equation with
/// `R(ρ) = ρ²`: `|∫ρ(t)² − ∫ρ₀² − 2∫∫ρΨ| / ∫ρ₀²`, time integral by Simpson
/// over the stored levels.
pub fn renormalized_check(history: &FlowHistory) -> Result<f64> {
    let snaps = history.snapshots();
    let (first, last) = match (snaps.first(), snaps.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Input("empty history".into())),
    };
    let sq = |r: &SpectralScalarField| r.norm_sqr();
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let prod: Vec<f64> = snaps.iter().map(|s| 2.0 * s.rho.inner(&s.source).re).collect();
    let e0 = sq(&first.rho);
    let defect = sq(&last.rho) - e0 - integrate_samples(&times, &prod);
    Ok(defect.abs() / e0)
}
