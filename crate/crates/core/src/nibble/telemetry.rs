//! Per-round parameters of the coloring state and the inequalities they are
//! expected to satisfy.
//!
//! [`snapshot`] reads the engine's maintained structures; [`recompute`]
//! derives the same numbers from `H`, the coloring and the probability
//! vectors alone, so the two can be checked against each other.

use std::fmt::Write as _;

use serde::Serialize;

use super::state::ColoringState;

/// Slack allowed when an inequality is evaluated in floating point.
const FLAG_TOLERANCE: f64 = 1e-9;

/// Maxima (and the entropy minimum) over uncolored vertices after a round.
/// Vectors indexed by `i - 2` cover the restriction sizes `2..=k-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelemetrySnapshot {
    pub t: usize,
    pub uncolored: usize,
    /// `max Ξ_e` over edges of `H^(t)`.
    pub max_xi_e: f64,
    pub max_xi_u: f64,
    pub max_xi_u_c: f64,
    pub max_phi: Vec<f64>,
    pub max_phi_c: Vec<f64>,
    /// `min h_u`; zero once every vertex is colored.
    pub min_entropy: f64,
    pub max_d_i_c: Vec<usize>,
    pub max_d_i: Vec<usize>,
    /// Largest degree in `H^(t)`.
    pub max_d_h: usize,
    /// Largest `d(u) = d_H(u) + Σ_i d_i(u)`.
    pub max_d: usize,
    /// Largest `p_u(B(u))`.
    pub max_bad_mass: f64,
    /// Largest `|1 - Σ_c p_u(c)|`.
    pub max_mass_deviation: f64,
}

impl TelemetrySnapshot {
    fn zero(t: usize, k: usize) -> Self {
        let r = k.saturating_sub(2);
        TelemetrySnapshot {
            t,
            uncolored: 0,
            max_xi_e: 0.0,
            max_xi_u: 0.0,
            max_xi_u_c: 0.0,
            max_phi: vec![0.0; r],
            max_phi_c: vec![0.0; r],
            min_entropy: f64::INFINITY,
            max_d_i_c: vec![0; r],
            max_d_i: vec![0; r],
            max_d_h: 0,
            max_d: 0,
            max_bad_mass: 0.0,
            max_mass_deviation: 0.0,
        }
    }

    fn finish(mut self) -> Self {
        if self.uncolored == 0 {
            self.min_entropy = 0.0;
        }
        self
    }

    /// Column names of [`TelemetrySnapshot::csv_row`] for uniformity `k`.
    pub fn csv_header(k: usize) -> String {
        let mut s = String::from("t,uncolored,max_xi_e");
        for i in 2..k {
            write!(s, ",max_phi_{i}").unwrap();
        }
        s.push_str(",min_h,max_d,max_sum_dev,max_p_bad");
        s
    }

    pub fn csv_row(&self) -> String {
        let mut s = format!("{},{},{}", self.t, self.uncolored, self.max_xi_e);
        for x in &self.max_phi {
            write!(s, ",{x}").unwrap();
        }
        write!(
            s,
            ",{},{},{},{}",
            self.min_entropy, self.max_d, self.max_mass_deviation, self.max_bad_mass
        )
        .unwrap();
        s
    }

    /// Integer fields equal and float fields within `rel` relative error.
    pub fn agrees_with(&self, other: &Self, rel: f64) -> bool {
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= rel * a.abs().max(b.abs());
        let close_all = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| close(x, y));
        self.t == other.t
            && self.uncolored == other.uncolored
            && self.max_d_i_c == other.max_d_i_c
            && self.max_d_i == other.max_d_i
            && self.max_d_h == other.max_d_h
            && self.max_d == other.max_d
            && close(self.max_xi_e, other.max_xi_e)
            && close(self.max_xi_u, other.max_xi_u)
            && close(self.max_xi_u_c, other.max_xi_u_c)
            && close_all(&self.max_phi, &other.max_phi)
            && close_all(&self.max_phi_c, &other.max_phi_c)
            && close(self.min_entropy, other.min_entropy)
            && close(self.max_bad_mass, other.max_bad_mass)
            && close(self.max_mass_deviation, other.max_mass_deviation)
    }
}

/// `-Σ p log p` with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Telemetry from the engine's incidence lists.
pub fn snapshot(state: &ColoringState) -> TelemetrySnapshot {
    let g = state.graph();
    let k = g.k();
    let w = state.num_colors();
    let mut s = TelemetrySnapshot::zero(state.round(), k);
    for &e in state.active_edges() {
        s.max_xi_e = s.max_xi_e.max(state.xi_edge(e as usize));
    }
    let mut xi_c = vec![0.0; w];
    let mut phi_c = vec![0.0; w];
    let mut d_c = vec![0usize; w];
    for u in state.uncolored_vertices() {
        s.uncolored += 1;
        let p = state.probs(u);

        xi_c.iter_mut().for_each(|x| *x = 0.0);
        for &e in state.active_through(u) {
            let others: Vec<u32> = g.edge(e as usize).iter().copied().filter(|&v| v != u).collect();
            for (c, x) in xi_c.iter_mut().enumerate() {
                *x += others.iter().map(|&v| state.prob(v, c as u32)).product::<f64>();
            }
        }
        let xi_u: f64 = p.iter().zip(&xi_c).map(|(a, b)| a * b).sum();
        s.max_xi_u = s.max_xi_u.max(xi_u);
        s.max_xi_u_c = xi_c.iter().copied().fold(s.max_xi_u_c, f64::max);

        let mut d = state.active_through(u).len();
        s.max_d_h = s.max_d_h.max(d);
        for i in 2..k {
            phi_c.iter_mut().for_each(|x| *x = 0.0);
            d_c.iter_mut().for_each(|x| *x = 0);
            let mut d_i = 0;
            for r in state.restrictions_through(u).filter(|r| r.members.len() == i) {
                let c = r.color as usize;
                phi_c[c] += r
                    .members
                    .iter()
                    .filter(|&&v| v != u)
                    .map(|&v| state.prob(v, r.color))
                    .product::<f64>();
                d_c[c] += 1;
                d_i += 1;
            }
            let phi: f64 = p.iter().zip(&phi_c).map(|(a, b)| a * b).sum();
            s.max_phi[i - 2] = s.max_phi[i - 2].max(phi);
            s.max_phi_c[i - 2] = phi_c.iter().copied().fold(s.max_phi_c[i - 2], f64::max);
            s.max_d_i_c[i - 2] = s.max_d_i_c[i - 2].max(d_c.iter().copied().max().unwrap_or(0));
            s.max_d_i[i - 2] = s.max_d_i[i - 2].max(d_i);
            d += d_i;
        }
        s.max_d = s.max_d.max(d);

        s.min_entropy = s.min_entropy.min(entropy(p));
        let bad = state.capped_count(u) as f64 * state.params().p_hat;
        s.max_bad_mass = s.max_bad_mass.max(bad);
        s.max_mass_deviation = s.max_mass_deviation.max((1.0 - p.iter().sum::<f64>()).abs());
    }
    s.finish()
}

/// How an edge of `H` looks from an uncolored vertex under the current
/// coloring: fully uncolored, a restriction edge of some size and color, or
/// irrelevant.
enum View {
    Active,
    Restricted { color: u32, open: Vec<u32> },
    Dead,
}

fn classify(state: &ColoringState, edge: &[u32]) -> View {
    let open: Vec<u32> = edge.iter().copied().filter(|&v| state.is_uncolored(v)).collect();
    if open.len() == edge.len() {
        return View::Active;
    }
    let colors: Vec<u32> = edge.iter().filter_map(|&v| state.color(v)).collect();
    if open.len() >= 2 && colors.iter().all(|&c| c == colors[0]) {
        View::Restricted { color: colors[0], open }
    } else {
        View::Dead
    }
}

/// Telemetry from `H`, the coloring and the probabilities alone, scanning
/// every edge of `H` through every uncolored vertex.
pub fn recompute(state: &ColoringState) -> TelemetrySnapshot {
    let g = state.graph();
    let k = g.k();
    let w = state.num_colors() as u32;
    let p_hat = state.params().p_hat;
    let mut s = TelemetrySnapshot::zero(state.round(), k);
    for e in g.edges() {
        if let View::Active = classify(state, e) {
            let xi: f64 = (0..w)
                .map(|c| e.iter().map(|&v| state.prob(v, c)).product::<f64>())
                .sum();
            s.max_xi_e = s.max_xi_e.max(xi);
        }
    }
    for u in 0..g.num_vertices() as u32 {
        if !state.is_uncolored(u) {
            continue;
        }
        s.uncolored += 1;
        let mut xi_u = 0.0;
        let mut d_h = 0;
        let mut phi = vec![0.0; k.saturating_sub(2)];
        let mut d_i = vec![0usize; k.saturating_sub(2)];
        for c in 0..w {
            let mut xi_u_c = 0.0;
            let mut phi_c = vec![0.0; k.saturating_sub(2)];
            let mut d_c = vec![0usize; k.saturating_sub(2)];
            for &e in g.incident(u) {
                let edge = g.edge(e as usize);
                match classify(state, edge) {
                    View::Active => {
                        xi_u_c += edge
                            .iter()
                            .filter(|&&v| v != u)
                            .map(|&v| state.prob(v, c))
                            .product::<f64>();
                        if c == 0 {
                            d_h += 1;
                            xi_u += (0..w)
                                .map(|b| edge.iter().map(|&v| state.prob(v, b)).product::<f64>())
                                .sum::<f64>();
                        }
                    }
                    View::Restricted { color, open } if color == c => {
                        let i = open.len() - 2;
                        let prod: f64 = open.iter().filter(|&&v| v != u).map(|&v| state.prob(v, c)).product();
                        phi_c[i] += prod;
                        phi[i] += state.prob(u, c) * prod;
                        d_c[i] += 1;
                        d_i[i] += 1;
                    }
                    _ => {}
                }
            }
            s.max_xi_u_c = s.max_xi_u_c.max(xi_u_c);
            for i in 0..phi_c.len() {
                s.max_phi_c[i] = s.max_phi_c[i].max(phi_c[i]);
                s.max_d_i_c[i] = s.max_d_i_c[i].max(d_c[i]);
            }
        }
        s.max_xi_u = s.max_xi_u.max(xi_u);
        for i in 0..phi.len() {
            s.max_phi[i] = s.max_phi[i].max(phi[i]);
            s.max_d_i[i] = s.max_d_i[i].max(d_i[i]);
        }
        s.max_d_h = s.max_d_h.max(d_h);
        s.max_d = s.max_d.max(d_h + d_i.iter().sum::<usize>());
        let p: Vec<f64> = (0..w).map(|c| state.prob(u, c)).collect();
        let h: f64 = p.iter().map(|&x| if x > 0.0 { -x * x.ln() } else { 0.0 }).sum();
        s.min_entropy = s.min_entropy.min(h);
        let bad: f64 = p.iter().filter(|&&x| x == p_hat).sum();
        s.max_bad_mass = s.max_bad_mass.max(bad);
        s.max_mass_deviation = s.max_mass_deviation.max((1.0 - p.iter().sum::<f64>()).abs());
    }
    s.finish()
}

/// One inequality evaluated over all uncolored vertices (or edges).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    /// `A`, `B`, `Ca(i)`, `C`, `D`, `Dc(i)` or `star`.
    pub name: String,
    /// Smallest `bound - value` seen; negative means violated.
    pub slack: f64,
    pub pass: bool,
}

fn flag(name: String, slack: f64) -> Flag {
    Flag {
        name,
        slack,
        pass: slack >= -FLAG_TOLERANCE,
    }
}

/// Evaluates the round-`t` inequalities on the state: mass drift, edge
/// weight growth, restriction weight decay, entropy loss, degree decay,
/// per-color restriction degree and bad-color mass. Violations are
/// reported, not raised; the bounds are asymptotic.
pub fn flags(state: &ColoringState) -> Vec<Flag> {
    let p = state.params();
    let g = state.graph();
    let k = g.k();
    let kf = k as f64;
    let t = state.round() as f64;
    let delta = p.max_degree.max(2) as f64;
    let (eps, theta, omega, p_hat) = (p.epsilon, p.theta, p.omega, p.p_hat);
    let w = state.num_colors() as u32;
    let mut out = Vec::new();

    let mut slack = f64::INFINITY;
    for u in state.uncolored_vertices() {
        let sum: f64 = state.probs(u).iter().sum();
        slack = slack.min(t * delta.powf(-eps) - (1.0 - sum).abs());
    }
    out.push(flag("A".into(), slack));

    let mut slack = f64::INFINITY;
    for &e in state.active_edges() {
        let bound = state.initial_xi_edge(e as usize) + t / delta.powf(1.0 + eps);
        slack = slack.min(bound - state.xi_edge(e as usize));
    }
    out.push(flag("B".into(), slack));

    let decay = 1.0 - theta / (3.0 * kf);
    for i in 2..k {
        let bound = kf.powi(2 * (k - i) as i32) * omega * decay.powf(t);
        let mut slack = f64::INFINITY;
        for u in state.uncolored_vertices() {
            let phi: f64 = state
                .restrictions_through(u)
                .filter(|r| r.members.len() == i)
                .map(|r| r.members.iter().map(|&v| state.prob(v, r.color)).product::<f64>())
                .sum();
            slack = slack.min(bound - phi);
        }
        out.push(flag(format!("Ca({i})"), slack));
    }

    let geometric: f64 = (0..=state.round()).map(|tau| decay.powi(tau as i32)).sum();
    let loss = kf.powi(2 * k as i32) * eps * geometric;
    let mut slack = f64::INFINITY;
    for u in state.uncolored_vertices() {
        slack = slack.min(entropy(state.probs(u)) - (state.initial_entropy(u) - loss));
    }
    out.push(flag("C".into(), slack));

    let bound = (1.0 - theta / (2.0 * kf)).powf(t) * delta;
    let mut slack = f64::INFINITY;
    for u in state.uncolored_vertices() {
        let d = state.active_through(u).len() + state.restrictions_through(u).count();
        slack = slack.min(bound - d as f64);
    }
    out.push(flag("D".into(), slack));

    for i in 2..k {
        let bound = (1.0 + 2.0 * kf * theta).powf(t) * delta * p_hat.powi((k - i) as i32);
        let mut slack = f64::INFINITY;
        for u in state.uncolored_vertices() {
            for c in 0..w {
                let d = state
                    .restrictions_through(u)
                    .filter(|r| r.members.len() == i && r.color == c)
                    .count();
                slack = slack.min(bound - d as f64);
            }
        }
        out.push(flag(format!("Dc({i})"), slack));
    }

    let mut slack = f64::INFINITY;
    for u in state.uncolored_vertices() {
        slack = slack.min(eps / 10.0 - state.capped_count(u) as f64 * p_hat);
    }
    out.push(flag("star".into(), slack));
    out
}

/// Engine telemetry, its naive recomputation and the invariant flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelemetryCheck {
    pub engine: TelemetrySnapshot,
    pub naive: TelemetrySnapshot,
    /// Whether `engine` matches `naive` (counts exactly, floats to 1e-9).
    pub consistent: bool,
    pub flags: Vec<Flag>,
}

impl TelemetryCheck {
    pub fn all_flags_pass(&self) -> bool {
        self.flags.iter().all(|f| f.pass)
    }
}

pub fn telemetry_check(state: &ColoringState) -> TelemetryCheck {
    let engine = snapshot(state);
    let naive = recompute(state);
    TelemetryCheck {
        consistent: engine.agrees_with(&naive, 1e-9),
        engine,
        naive,
        flags: flags(state),
    }
}
